/*
 * Copyright 2026 The thermoptic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "thermoptic/common.hpp"
#include "thermoptic/fisher.hpp"
#include "thermoptic/fock.hpp"
#include "thermoptic/optimize.hpp"
#include "thermoptic/parallel.hpp"
#include "thermoptic/photon_counting.hpp"
#include "thermoptic/rng.hpp"
#include "thermoptic/spatial.hpp"

namespace thermoptic {

using Matrix3c = Eigen::Matrix3cd;

/// Two-spatial-mode state restricted to span{|0,0>, |0,1>, |1,0>}, not
/// renormalized; trace_deficit is the discarded mass.
struct TruncatedState {
  Matrix3c rho;
  double trace_deficit = 0.0;
};

inline constexpr double kTruncationGuard = 0.1;
inline constexpr double kMaxTraceDeficit = 1e-2;

inline TruncatedState truncated_state(const SpatialParams& params) {
  if (params.n_mean > kTruncationGuard) {
    std::ostringstream os;
    os << "truncated_state: n = " << params.n_mean << " exceeds " << kTruncationGuard;
    throw DomainError(os.str());
  }
  // The cutoff-1 basis enumerates exactly (0,0), (0,1), (1,0), and the passive
  // lift does not mix photon-number sectors, so this block is exact.
  const FockBasis basis(2, FockCutoff(1));
  TruncatedState out{spatial_density_matrix(params, basis), 0.0};
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  out.trace_deficit = 1.0 - out.rho.trace().real();
  if (out.trace_deficit > kMaxTraceDeficit) {
    std::ostringstream os;
    os << "truncated_state: discarded mass " << out.trace_deficit << " is too large for a one-photon truncation";
    throw NumericalError(os.str());
  }
  return out;
}

inline constexpr double kPovmFdStep = 1e-6;

/// Central-difference derivatives of the truncated density matrix.
inline std::array<Matrix3c, 3> truncated_state_derivatives(const SpatialParams& params) {
  std::array<Matrix3c, 3> out;
  for (int i = 0; i < 3; ++i) {
    const double h = kPovmFdStep * std::max(1.0, std::abs(params[i]));
    out[static_cast<size_t>(i)] =
        (truncated_state(params.with(i, params[i] + h)).rho - truncated_state(params.with(i, params[i] - h)).rho) /
        (2.0 * h);
  }
  return out;
}

/// SLD quantum Fisher information of a (possibly sub-normalized) density
/// matrix from its spectrum.
inline FisherMatrix density_matrix_qfi(const CMatrix& rho, const std::vector<CMatrix>& drho, double cutoff = 1e-14) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  const RVector& lam = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();
  std::vector<CMatrix> d;
  for (const auto& m : drho) d.push_back(v.adjoint() * m * v);
  const auto n = static_cast<Eigen::Index>(drho.size());
  RMatrix iq = RMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      const double s = lam(j) + lam(k);
      if (s <= cutoff) continue;
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
          iq(a, b) += 2.0 * std::real(d[static_cast<size_t>(a)](j, k) * d[static_cast<size_t>(b)](k, j)) / s;
        }
      }
    }
  }
  return FisherMatrix(0.5 * (iq + iq.transpose()), FisherKind::quantum);
}

inline FisherMatrix truncated_qfi(const SpatialParams& params) {
  const auto d = truncated_state_derivatives(params);
  return density_matrix_qfi(truncated_state(params).rho, {d[0], d[1], d[2]});
}

/// Six-element POVM p {|u1_k><u1_k|} + (1 - p) {|u2_k><u2_k|}.
class MixturePovm {
 public:
  MixturePovm(const Matrix3c& u1, const Matrix3c& u2, double p) : u1_(u1), u2_(u2), p_(p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("MixturePovm: p must lie in [0, 1]");
    for (const auto* u : {&u1_, &u2_}) {
      if ((*u * u->adjoint() - Matrix3c::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
        throw DomainError("MixturePovm: basis matrix is not unitary");
      }
    }
    for (int k = 0; k < 3; ++k) {
      elements_[static_cast<size_t>(k)] = p_ * u1_.col(k) * u1_.col(k).adjoint();
      elements_[static_cast<size_t>(k + 3)] = (1.0 - p_) * u2_.col(k) * u2_.col(k).adjoint();
    }
  }

  [[nodiscard]] const Matrix3c& u1() const { return u1_; }
  [[nodiscard]] const Matrix3c& u2() const { return u2_; }
  [[nodiscard]] double p() const { return p_; }
  [[nodiscard]] const std::array<Matrix3c, 6>& elements() const { return elements_; }

  [[nodiscard]] double completeness_residual() const {
    Matrix3c sum = Matrix3c::Zero();
    for (const auto& e : elements_) sum += e;
    return (sum - Matrix3c::Identity()).cwiseAbs().maxCoeff();
  }

 private:
  Matrix3c u1_, u2_;
  double p_;
  std::array<Matrix3c, 6> elements_;
};

/// Basis of traceless Hermitian 3x3 matrices (Gell-Mann ordering: the three
/// symmetric and antisymmetric off-diagonal pairs, then two diagonals).
inline const std::array<Matrix3c, 8>& su3_generators() {
  static const std::array<Matrix3c, 8> gens = [] {
    std::array<Matrix3c, 8> g;
    int k = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        g[static_cast<size_t>(k)].setZero();
        g[static_cast<size_t>(k)](i, j) = g[static_cast<size_t>(k)](j, i) = 1.0;
        ++k;
        g[static_cast<size_t>(k)].setZero();
        g[static_cast<size_t>(k)](i, j) = cplx(0.0, -1.0);
        g[static_cast<size_t>(k)](j, i) = cplx(0.0, 1.0);
        ++k;
      }
    }
    g[6] = Matrix3c::Zero();
    g[6](0, 0) = 1.0;
    g[6](1, 1) = -1.0;
    g[7] = Matrix3c::Zero();
    g[7](0, 0) = g[7](1, 1) = 1.0 / std::sqrt(3.0);
    g[7](2, 2) = -2.0 / std::sqrt(3.0);
    return g;
  }();
  return gens;
}

inline constexpr int kPovmParameters = 17;

/// exp(i sum_k c_k G_k) for the first 8 coefficients starting at `offset`.
inline Matrix3c unitary_from_generators(const std::vector<double>& x, size_t offset) {
  Matrix3c h = Matrix3c::Zero();
  const auto& g = su3_generators();
  for (size_t k = 0; k < 8; ++k) h += x[offset + k] * g[k];
  const Matrix3c ih = cplx(0.0, 1.0) * h;
  return ih.exp();
}

/// 8 + 8 generator coefficients for the two bases and a logit for p.
inline MixturePovm povm_from_parameters(const std::vector<double>& x) {
  if (x.size() != static_cast<size_t>(kPovmParameters)) throw DomainError("povm_from_parameters: need 17 values");
  const double p = 1.0 / (1.0 + std::exp(-x[16]));
  return MixturePovm(unitary_from_generators(x, 0), unitary_from_generators(x, 8), p);
}

/// Outcome probabilities tr(rho E_k) and their gradients.
struct PovmStatistics {
  std::vector<double> probs;
  RMatrix gradients;  // 6 x 3
};

inline PovmStatistics povm_statistics(const MixturePovm& povm, const Matrix3c& rho, const std::array<Matrix3c, 3>& drho) {
  PovmStatistics s{std::vector<double>(6), RMatrix::Zero(6, 3)};
  for (size_t k = 0; k < 6; ++k) {
    const auto& e = povm.elements()[k];
    s.probs[k] = (rho * e).trace().real();
    for (size_t i = 0; i < 3; ++i) s.gradients(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = (drho[i] * e).trace().real();
  }
  return s;
}

inline FisherMatrix povm_fisher(const MixturePovm& povm, const SpatialParams& params) {
  const auto s = povm_statistics(povm, truncated_state(params).rho, truncated_state_derivatives(params));
  return classical_fisher(s.probs, s.gradients);
}

struct GillMassarBounds {
  double lower = 0.0;         // d^2 / (D - 1)
  double upper_scheme = 0.0;  // d^2, equal-split scheme
};

inline GillMassarBounds gill_massar_bounds(int d, int big_d) {
  if (d < 1) throw DomainError("gill_massar_bounds: need d >= 1");
  if (big_d < 2) throw DomainError("gill_massar_bounds: need D >= 2");
  const double dd = static_cast<double>(d) * d;
  return {dd / (big_d - 1.0), dd};
}

/// Which QFI the search cost tr(I_Q I_C^{-1}) is measured against.
///  - gaussian: the QFI of the untruncated two-mode state (default, the same
///    I_Q every other scheme is scored with);
///  - truncated: the QFI of the sub-normalized three-level state the POVMs act
///    on. Information carried by two or more photons is absent from both I_C
///    and this reference.
enum class PovmReference { gaussian, truncated };

struct PovmSearchResult {
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> best_parameters;
  std::vector<double> restart_costs;
  double gill_massar_value = 0.0;  // tr(I_Q^{-1} I_C) at the optimum
  double gaussian_reference_cost = 0.0;
  double truncated_reference_cost = 0.0;
  double trace_deficit = 0.0;
  PovmReference reference = PovmReference::gaussian;
};

inline constexpr double kPovmPenalty = 1e6;

inline PovmSearchResult optimize_povm(const SpatialParams& params, int restarts = 32, std::uint64_t seed = 0,
                                      PovmReference reference = PovmReference::gaussian) {
  if (restarts < 1) throw DomainError("optimize_povm: need at least one restart");
  const auto state = truncated_state(params);
  const auto drho = truncated_state_derivatives(params);
  const auto iq_trunc = density_matrix_qfi(state.rho, {drho[0], drho[1], drho[2]});
  const auto iq_gauss = qfi_spatial(params);
  const FisherMatrix& iq = reference == PovmReference::truncated ? iq_trunc : iq_gauss;

  auto fisher_of = [&](const std::vector<double>& x) {
    const auto s = povm_statistics(povm_from_parameters(x), state.rho, drho);
    return classical_fisher(s.probs, s.gradients);
  };
  const Objective objective = [&](const std::vector<double>& x) {
    try {
      const double v = cost(iq, fisher_of(x));
      return std::isfinite(v) ? v : kPovmPenalty;
    } catch (const std::exception&) {
      return kPovmPenalty;
    }
  };

  std::vector<NelderMeadResult> runs(static_cast<size_t>(restarts));
  parallel_for(runs.size(), [&](size_t r) {
    auto rng = make_rng(seed, r);
    std::vector<double> x0(kPovmParameters);
    for (auto& v : x0) v = 2.0 * uniform01(rng) - 1.0;
    x0[16] = 0.0;
    NelderMeadOptions opt;
    opt.max_evaluations = 40000;
    opt.size_tol = 1e-9;
    opt.rel_ftol = 1e-12;
    opt.stall_window = 2000;
    auto best = nelder_mead(objective, x0, std::vector<double>(kPovmParameters, 0.3), opt);
    for (int again = 0; again < 3; ++again) {
      auto next = nelder_mead(objective, best.x, std::vector<double>(kPovmParameters, 0.05), opt);
      const bool improved = next.value < best.value - 1e-12;
      if (next.value <= best.value) best = std::move(next);
      if (!improved) break;
    }
    runs[r] = std::move(best);
  });

  PovmSearchResult out;
  out.reference = reference;
  out.trace_deficit = state.trace_deficit;
  for (const auto& run : runs) {
    out.restart_costs.push_back(run.value);
    if (run.value < out.best_cost) {
      out.best_cost = run.value;
      out.best_parameters = run.x;
    }
  }
  if (!(out.best_cost < kPovmPenalty)) {
    std::ostringstream os;
    os << "optimize_povm: all " << restarts << " restarts ended on singular Fisher matrices";
    throw NumericalError(os.str());
  }
  const auto ic = fisher_of(out.best_parameters);
  out.gill_massar_value = trace_with_inverse(ic.matrix(), iq.matrix()).value;
  out.gaussian_reference_cost = cost(iq_gauss, ic);
  out.truncated_reference_cost = cost(iq_trunc, ic);
  return out;
}

}  // namespace thermoptic
