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

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "thermoptic/common.hpp"
#include "thermoptic/fisher.hpp"
#include "thermoptic/fock.hpp"
#include "thermoptic/gaussian_state.hpp"
#include "thermoptic/photon_counting.hpp"
#include "thermoptic/povm.hpp"
#include "thermoptic/quadratic_observable.hpp"
#include "thermoptic/rng.hpp"
#include "thermoptic/spatial.hpp"

namespace thermoptic {

/// One invariant check: passes when value <= bound (upper) or value >= bound.
struct CheckResult {
  std::string suite;
  char group = '-';  // oracle-suite letter a..f, '-' for the rest
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool upper = true;
  bool pass = false;
};

enum class VerifySuite { core, oracle, all };

struct VerifyOptions {
  std::uint64_t seed = 0;
  // Multiplies every upper bound; anything below 1 tightens the suite (used to
  // check that the harness can fail).
  double tolerance_scale = 1.0;
  int draws = 50;
  int povms = 100;
};

namespace detail {

class CheckSink {
 public:
  CheckSink(std::string suite, double scale) : suite_(std::move(suite)), scale_(scale) {}

  void upper(char group, std::string name, double value, double bound) {
    bound *= scale_;
    out_.push_back({suite_, group, std::move(name), value, bound, true, value <= bound});
  }
  void lower(char group, std::string name, double value, double bound) {
    out_.push_back({suite_, group, std::move(name), value, bound, false, value >= bound});
  }
  std::vector<CheckResult> take() { return std::move(out_); }

 private:
  std::string suite_;
  double scale_;
  std::vector<CheckResult> out_;
};

inline SpatialParams random_spatial(std::mt19937_64& rng, double n_max = 0.1) {
  const double n = 1e-3 + (n_max - 1e-3) * uniform01(rng);
  const double g = 0.05 + 0.9 * uniform01(rng);
  return SpatialParams(n, g, kTwoPi * uniform01(rng));
}

inline CMatrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  CMatrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = cplx(2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0);
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

/// Coefficient k and residual of obs = k (n1 - n2) + rest.
inline std::pair<cplx, double> number_difference_part(const QuadraticObservable& obs) {
  const cplx k = 0.5 * (obs.hop_coefficient(0, 0) - obs.hop_coefficient(1, 1));
  const auto diff = QuadraticObservable::number(2, 0) - QuadraticObservable::number(2, 1);
  return {k, obs.distance(k * diff)};
}

inline constexpr double kFdRelStep = 1e-5;

/// Central-difference derivatives of the truncated Fock density matrix.
inline std::vector<CMatrix> fock_density_derivatives(const SpatialParams& p, const FockBasis& basis) {
  std::vector<CMatrix> out;
  for (int i = 0; i < 3; ++i) {
    const double h = kFdRelStep * std::max(1.0, std::abs(p[i]));
    out.push_back((spatial_density_matrix(p.with(i, p[i] + h), basis) - spatial_density_matrix(p.with(i, p[i] - h), basis)) /
                  (2.0 * h));
  }
  return out;
}

/// max_ij |A_ij - B_ij| / sqrt(B_ii B_jj).
inline double normalized_difference(const RMatrix& a, const RMatrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double scale = std::sqrt(std::abs(b(i, i) * b(j, j)));
      const double d = std::abs(a(i, j) - b(i, j));
      worst = std::max(worst, scale > 0.0 ? d / scale : d);
    }
  }
  return worst;
}

inline std::string at(const SpatialParams& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.4g, %.4g, %.4g)", p.n_mean, p.gamma_abs, p.phi);
  return buf;
}

inline std::vector<SpatialParams> check_points(std::uint64_t seed, int extra) {
  std::vector<SpatialParams> pts{SpatialParams(0.01, 0.5, kPi / 4.0)};
  auto rng = make_rng(seed, 0x5eed);
  for (int i = 0; i < extra; ++i) pts.push_back(random_spatial(rng));
  return pts;
}

/// Commutator claims, SLD defining equation, [rho, L] expectations, X
/// variances and the idealized weighted scheme.
inline void core_checks(CheckSink& sink, const VerifyOptions& opt) {
  for (const auto& p : check_points(opt.seed, 4)) {
    const std::string where = at(p);
    const auto state = two_spatial_covariance(p);
    std::array<QuadraticObservable, 3> l{sld_spatial(0, p), sld_spatial(1, p), sld_spatial(2, p)};

    sink.upper('d', "[L_n, L_g] = 0 " + where, qo_commutator(l[0], l[1]).max_abs_coefficient(), 1e-10);
    sink.upper('d', "[L_n, L_phi] ~ n1 - n2 " + where, number_difference_part(qo_commutator(l[0], l[2])).second, 1e-10);
    sink.upper('d', "[L_g, L_phi] ~ n1 - n2 " + where, number_difference_part(qo_commutator(l[1], l[2])).second, 1e-10);
    const auto x = x_operators(p);
    sink.upper('d', "[X_n, X_g] = 0 " + where, qo_commutator(x[0], x[1]).max_abs_coefficient(), 1e-10);
    sink.upper('d', "[X_n, X_phi] = 0 " + where, qo_commutator(x[0], x[2]).max_abs_coefficient(), 1e-10);
    sink.upper('d', "[X_g, X_phi] ~ n1 - n2 " + where, number_difference_part(qo_commutator(x[1], x[2])).second, 1e-10);

    const FockBasis basis(2, tail_rule(p));
    const CMatrix rho = spatial_density_matrix(p, basis);
    const auto drho = fock_density_derivatives(p, basis);
    std::array<CMatrix, 3> lf;
    for (size_t j = 0; j < 3; ++j) lf[j] = qo_fock_matrix(l[j], basis);
    for (size_t j = 0; j < 3; ++j) {
      const CMatrix resid = drho[j] - 0.5 * (rho * lf[j] + lf[j] * rho);
      sink.upper('c', "SLD equation residual, parameter " + std::to_string(j) + " " + where, resid.norm(), 1e-6);
    }
    for (size_t i = 0; i < 3; ++i) {
      for (size_t j = i + 1; j < 3; ++j) {
        const std::string pair = std::to_string(i) + std::to_string(j);
        sink.upper('e', "tr(rho [L_i, L_j]) Wick, ij=" + pair + " " + where,
                   std::abs(qo_expectation(qo_commutator(l[i], l[j]), state)), 1e-8);
        sink.upper('e', "tr(rho [L_i, L_j]) Fock, ij=" + pair + " " + where,
                   std::abs((rho * (lf[i] * lf[j] - lf[j] * lf[i])).trace()), 1e-8);
      }
    }

    const RMatrix inv = qfi_spatial(p).matrix().inverse();
    for (int i = 0; i < 3; ++i) {
      const double v = qo_variance(x[static_cast<size_t>(i)], state);
      sink.upper('-', "Var(X_" + std::to_string(i) + ") = [I_Q^-1]_ii, relative " + where,
                 std::abs(v - inv(i, i)) / inv(i, i), 1e-8);
    }
  }
  const auto ideal = weighted_scheme(SpatialParams(0.01, 0.5, kPi / 4.0), true);
  sink.upper('-', "weighted scheme, delta = 0: |cost - 5|", std::abs(ideal.cost_star - 5.0), 1e-6);
  sink.upper('-', "weighted scheme, delta = 0: |p - 1/2|", std::abs(ideal.p_star - 0.5), 1e-6);
}

/// Brute-force Fock comparisons and the Gill-Massar bounds.
inline void oracle_checks(CheckSink& sink, const VerifyOptions& opt) {
  auto rng = make_rng(opt.seed, 0xa);
  double worst_direct = 0.0, worst_ft = 0.0, worst_bs = 0.0;
  for (int k = 0; k < opt.draws; ++k) {
    const auto p = random_spatial(rng);
    const auto cutoff = tail_rule(p);
    const double psi = kTwoPi * uniform01(rng);
    worst_direct = std::max(worst_direct, p_out_bs(p, cutoff).max_abs_difference(fock_oracle(p, u_phase_bs(p.phi), cutoff)));
    worst_ft = std::max(worst_ft, p_out_ft(p, cutoff).max_abs_difference(
                                      fock_oracle(p, CountingScheme::fourier().total_unitary(p.phi), cutoff)));
    const auto bs = CountingScheme::beam_splitter(psi);
    worst_bs = std::max(worst_bs, count_distribution(bs, p, cutoff).max_abs_difference(
                                      fock_oracle(p, bs.total_unitary(p.phi), cutoff)));
  }
  const std::string draws = " (" + std::to_string(opt.draws) + " draws)";
  sink.upper('a', "direct counting vs Fock oracle" + draws, worst_direct, 1e-10);
  sink.upper('a', "Fourier counting vs Fock oracle" + draws, worst_ft, 1e-10);
  sink.upper('a', "beam-splitter counting vs Fock oracle" + draws, worst_bs, 1e-10);

  for (const auto& p : check_points(opt.seed, 5)) {
    const FockBasis basis(2, tail_rule(p));
    const auto oracle = density_matrix_qfi(spatial_density_matrix(p, basis), fock_density_derivatives(p, basis));
    sink.upper('b', "Gaussian QFI vs Fock eigendecomposition QFI " + at(p),
               normalized_difference(qfi_spatial(p).matrix(), oracle.matrix()), 1e-4);
  }

  for (int k = 0; k < 10; ++k) {
    const DiagThermalParams x{0.05 * uniform01(rng), 0.05 * uniform01(rng)};
    const CMatrix u = random_unitary(rng, 2);
    const auto state = apply_mode_unitary(direct_sum({thermal_spectral_covariance(x.x1), thermal_spectral_covariance(x.x2)}), u);
    const FockBasis basis(2, tail_rule(x));
    const CMatrix v = lift_passive_unitary(u, basis);
    const CMatrix rho = v * thermal_density_matrix(x, basis) * v.adjoint();
    CMatrix c(4, 4);
    for (Eigen::Index i = 0; i < 16; ++i) c(i / 4, i % 4) = cplx(2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0);
    const QuadraticObservable raw(2, cplx(uniform01(rng), uniform01(rng)), c);
    const auto obs = raw + raw.adjoint();
    sink.upper('-', "Wick expectation vs Fock trace, draw " + std::to_string(k),
               std::abs(qo_expectation(obs, state) - (rho * qo_fock_matrix(obs, basis)).trace()), 1e-8);
  }

  // Gill-Massar: D = 3 truncation, I_Q of the untruncated state.
  const auto bounds = gill_massar_bounds(3, 3);
  double worst_gm = 0.0, worst_cost = std::numeric_limits<double>::infinity(), worst_order = -1.0;
  auto prng = make_rng(opt.seed, 0xf);
  for (int k = 0; k < opt.povms; ++k) {
    const auto p = random_spatial(prng, 0.02);
    std::vector<double> xs(kPovmParameters);
    for (auto& v : xs) v = kPi * (2.0 * uniform01(prng) - 1.0);
    const auto ic = povm_fisher(povm_from_parameters(xs), p);
    const auto iq = qfi_spatial(p);
    worst_gm = std::max(worst_gm, trace_with_inverse(ic.matrix(), iq.matrix()).value);
    worst_cost = std::min(worst_cost, cost(iq, ic));
    worst_order = std::max(worst_order, Eigen::SelfAdjointEigenSolver<RMatrix>(ic.matrix() - iq.matrix(), Eigen::EigenvaluesOnly)
                                            .eigenvalues()
                                            .maxCoeff());
  }
  const std::string povms = " (" + std::to_string(opt.povms) + " random POVMs)";
  sink.upper('f', "Gill-Massar tr(I_Q^-1 I_C) <= D - 1" + povms, worst_gm, 2.0);
  sink.lower('f', "tr(I_Q I_C^-1) >= d^2/(D-1)" + povms, worst_cost, bounds.lower);
  sink.upper('-', "I_C <= I_Q, largest eigenvalue of I_C - I_Q" + povms, worst_order, 1e-8);

  const auto best = optimize_povm(SpatialParams(0.01, 0.5, kPi / 4.0), 4, opt.seed);
  sink.upper('f', "Gill-Massar at searched POVM", best.gill_massar_value, 2.0);
  sink.lower('f', "tr(I_Q I_C^-1) at searched POVM", best.best_cost, bounds.lower);
}

}  // namespace detail

inline std::vector<CheckResult> run_verify(VerifySuite suite, const VerifyOptions& opt = {}) {
  std::vector<CheckResult> out;
  if (suite != VerifySuite::oracle) {
    detail::CheckSink sink("core", opt.tolerance_scale);
    detail::core_checks(sink, opt);
    auto r = sink.take();
    out.insert(out.end(), r.begin(), r.end());
  }
  if (suite != VerifySuite::core) {
    detail::CheckSink sink("oracle", opt.tolerance_scale);
    detail::oracle_checks(sink, opt);
    auto r = sink.take();
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

}  // namespace thermoptic
