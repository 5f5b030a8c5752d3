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

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "thermoptic/common.hpp"
#include "thermoptic/fisher.hpp"
#include "thermoptic/fock.hpp"
#include "thermoptic/gaussian_state.hpp"
#include "thermoptic/params.hpp"

namespace thermoptic {

/// U(phi) = (1/sqrt 2) [[-e^{-i phi}, e^{-i phi}], [1, 1]]; maps the diagonal
/// thermal state onto the two-spatial-mode state.
inline TwoModeUnitary u_phase_bs(double phase) {
  const cplx e = std::polar(1.0, -phase);
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd u;
  u << -e * s, e * s, s, s;
  return TwoModeUnitary(u);
}

/// Probabilities of photon counts (m1, m2) with m1 + m2 <= N_max, plus the
/// probability mass beyond the cutoff.
class CountDistribution {
 public:
  CountDistribution(FockCutoff cutoff, RMatrix probs, double tail_bound)
      : cutoff_(cutoff), probs_(std::move(probs)), tail_(tail_bound) {}

  [[nodiscard]] FockCutoff cutoff() const { return cutoff_; }
  [[nodiscard]] int n_max() const { return cutoff_.max_total_photons; }
  [[nodiscard]] double tail_bound() const { return tail_; }
  [[nodiscard]] double operator()(int m1, int m2) const {
    if (m1 < 0 || m2 < 0 || m1 + m2 > n_max()) return 0.0;
    return probs_(m1, m2);
  }
  /// (N_max+1)^2 table, zero outside the simplex.
  [[nodiscard]] const RMatrix& table() const { return probs_; }
  [[nodiscard]] double total() const { return probs_.sum(); }
  [[nodiscard]] double max_abs_difference(const CountDistribution& other) const {
    const int n = std::max(n_max(), other.n_max());
    double d = 0.0;
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; a + b <= n; ++b) d = std::max(d, std::abs((*this)(a, b) - other(a, b)));
    }
    return d;
  }

 private:
  FockCutoff cutoff_;
  RMatrix probs_;
  double tail_;
};

namespace detail {

/// Exact binomial coefficients; C(n, k) = 0 outside 0 <= k <= n.
class BinomialTable {
 public:
  explicit BinomialTable(int n_max) : n_(n_max), t_(static_cast<size_t>((n_max + 1) * (n_max + 1)), 0) {
    if (n_max > 60) throw DomainError("BinomialTable: N_max above 60 overflows 64-bit coefficients");
    for (int n = 0; n <= n_max; ++n) {
      at(n, 0) = 1;
      for (int k = 1; k <= n; ++k) at(n, k) = at(n - 1, k - 1) + (k <= n - 1 ? at(n - 1, k) : 0);
    }
  }
  [[nodiscard]] double operator()(int n, int k) const {
    if (n < 0 || k < 0 || k > n || n > n_) return 0.0;
    return static_cast<double>(t_[static_cast<size_t>(n * (n_ + 1) + k)]);
  }

 private:
  std::uint64_t& at(int n, int k) { return t_[static_cast<size_t>(n * (n_ + 1) + k)]; }
  int n_;
  std::vector<std::uint64_t> t_;
};

inline const BinomialTable& binomials(int n_max) {
  static const BinomialTable table(60);
  if (n_max > 60) throw DomainError("photon counting: N_max above 60 is not supported");
  return table;
}

/// Geometric distribution x^n / (1+x)^{n+1} and its x-derivative.
inline double geometric(double x, int n) { return std::pow(x, n) / std::pow(1.0 + x, n + 1); }
inline double geometric_dx(double x, int n) {
  const double tail = -(n + 1.0) * std::pow(x, n) / std::pow(1.0 + x, n + 2);
  if (n == 0) return tail;
  return n * std::pow(x, n - 1) / std::pow(1.0 + x, n + 1) + tail;
}

}  // namespace detail

/// P(n1 + n2 > N) for independent geometric counts with means x1, x2, summed
/// directly so that tiny tails are not lost to cancellation.
inline double thermal_tail(const DiagThermalParams& x, int n_max) {
  const double r1 = x.x1 / (1.0 + x.x1);
  const double r2 = x.x2 / (1.0 + x.x2);
  double tail = std::pow(r1, n_max + 1);
  for (int n1 = 0; n1 <= n_max; ++n1) tail += (1.0 - r1) * std::pow(r1, n1) * std::pow(r2, n_max - n1 + 1);
  return tail;
}

inline constexpr int kMinCutoff = 6;
inline constexpr double kTailTarget = 1e-14;

/// Smallest N_max >= 6 whose unassigned mass is below 1e-14.
inline FockCutoff tail_rule(const DiagThermalParams& x) {
  for (int n = kMinCutoff; n <= 60; ++n) {
    if (thermal_tail(x, n) < kTailTarget) return FockCutoff(n);
  }
  std::ostringstream os;
  os << "tail_rule: no cutoff up to 60 reaches tail " << kTailTarget << " at x = (" << x.x1 << ", " << x.x2 << ")";
  throw NumericalError(os.str());
}

inline FockCutoff tail_rule(const SpatialParams& p) { return tail_rule(DiagThermalParams::from(p)); }

inline CountDistribution p_in(const DiagThermalParams& x, FockCutoff cutoff) {
  if (!(x.x1 >= 0.0) || !(x.x2 >= 0.0)) throw DomainError("p_in: occupations must be >= 0");
  const int n = cutoff.max_total_photons;
  RMatrix t = RMatrix::Zero(n + 1, n + 1);
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; a + b <= n; ++b) t(a, b) = detail::geometric(x.x1, a) * detail::geometric(x.x2, b);
  }
  return CountDistribution(cutoff, t, thermal_tail(x, n));
}

/// Counting directly on the two-spatial-mode state (U(phi) applied to the
/// diagonal thermal state). Independent of phi.
inline CountDistribution p_out_bs(const SpatialParams& params, FockCutoff cutoff) {
  const auto x = DiagThermalParams::from(params);
  const int nmax = cutoff.max_total_photons;
  const auto& c = detail::binomials(nmax);
  RMatrix t = RMatrix::Zero(nmax + 1, nmax + 1);
  for (int total = 0; total <= nmax; ++total) {
    for (int m1 = 0; m1 <= total; ++m1) {
      const int m2 = total - m1;
      double p = 0.0;
      for (int n1 = 0; n1 <= total; ++n1) {
        const int n2 = total - n1;
        double s = 0.0;
        for (int j = 0; j <= m1; ++j) s += ((j % 2) ? -1.0 : 1.0) * c(n1, j) * c(n2, m1 - j);
        // m1! m2! / (n1! n2!) = C(N, n1) / C(N, m1)
        p += detail::geometric(x.x1, n1) * detail::geometric(x.x2, n2) * c(total, n1) / c(total, m1) * s * s /
             std::ldexp(1.0, total);
      }
      t(m1, m2) = p;
    }
  }
  return CountDistribution(cutoff, t, thermal_tail(x, nmax));
}

namespace detail {

/// Interference amplitude for the mode transformation
///   T(e) = (1/2) [[1 + e, 1 - e], [1 - e, 1 + e]],  |e| = 1,
/// between input counts (n1, N-n1) and output counts (m1, N-m1):
///   S = sum_j C(n1, j) C(n2, m1 - j) (1 - e)^{m1 + n1 - 2j} (1 + e)^{m2 - n1 + 2j}
/// together with dS/de. Both exponents are non-negative wherever the
/// binomials are non-zero.
struct Amplitude {
  cplx s;
  cplx ds;
};

inline Amplitude interference(int m1, int m2, int n1, int n2, cplx e, const BinomialTable& c) {
  const cplx a = 1.0 - e, b = 1.0 + e;
  Amplitude out{0.0, 0.0};
  for (int j = std::max(0, m1 - n2); j <= std::min(m1, n1); ++j) {
    const int pa = m1 + n1 - 2 * j;
    const int pb = m2 - n1 + 2 * j;
    const double w = c(n1, j) * c(n2, m1 - j);
    const cplx fa = std::pow(a, pa), fb = std::pow(b, pb);
    out.s += w * fa * fb;
    cplx d = 0.0;
    if (pa > 0) d -= static_cast<double>(pa) * std::pow(a, pa - 1) * fb;
    if (pb > 0) d += static_cast<double>(pb) * fa * std::pow(b, pb - 1);
    out.ds += w * d;
  }
  return out;
}

/// Counts after T(e) acting on the diagonal thermal state, with gradients in
/// (x1, x2) and in arg(e).
struct InterferenceCounts {
  RMatrix p, dx1, dx2, darg;
};

inline InterferenceCounts interference_counts(const DiagThermalParams& x, cplx e, int nmax) {
  const auto& c = binomials(nmax);
  InterferenceCounts out{RMatrix::Zero(nmax + 1, nmax + 1), RMatrix::Zero(nmax + 1, nmax + 1),
                         RMatrix::Zero(nmax + 1, nmax + 1), RMatrix::Zero(nmax + 1, nmax + 1)};
  const cplx de = cplx(0.0, 1.0) * e;  // d e / d arg(e)
  for (int total = 0; total <= nmax; ++total) {
    const double scale = std::ldexp(1.0, -2 * total);
    for (int m1 = 0; m1 <= total; ++m1) {
      const int m2 = total - m1;
      for (int n1 = 0; n1 <= total; ++n1) {
        const int n2 = total - n1;
        const auto amp = interference(m1, m2, n1, n2, e, c);
        const double w = c(total, n1) / c(total, m1) * scale;
        const double mag = std::norm(amp.s);
        const double dmag = 2.0 * std::real(std::conj(amp.s) * amp.ds * de);
        const double g1 = geometric(x.x1, n1), g2 = geometric(x.x2, n2);
        out.p(m1, m2) += w * g1 * g2 * mag;
        out.dx1(m1, m2) += w * geometric_dx(x.x1, n1) * g2 * mag;
        out.dx2(m1, m2) += w * g1 * geometric_dx(x.x2, n2) * mag;
        out.darg(m1, m2) += w * g1 * g2 * dmag;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Counting after the Fourier transform U(0) acts on the two-spatial-mode
/// state, i.e. after U(0) U(phi) acts on the diagonal thermal state.
inline CountDistribution p_out_ft(const SpatialParams& params, FockCutoff cutoff) {
  const auto x = DiagThermalParams::from(params);
  const int nmax = cutoff.max_total_photons;
  auto counts = detail::interference_counts(x, std::polar(1.0, -params.phi), nmax);
  return CountDistribution(cutoff, counts.p, thermal_tail(x, nmax));
}

/// Diagonal thermal density matrix with counts distributed as p_in.
inline CMatrix thermal_density_matrix(const DiagThermalParams& x, const FockBasis& basis) {
  CMatrix rho = CMatrix::Zero(basis.size(), basis.size());
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    const auto& occ = basis.state(i);
    rho(i, i) = detail::geometric(x.x1, occ[0]) * detail::geometric(x.x2, occ[1]);
  }
  return rho;
}

/// Truncated Fock density matrix of the two-spatial-mode state.
inline CMatrix spatial_density_matrix(const SpatialParams& params, const FockBasis& basis) {
  if (basis.n_modes() != 2) throw DomainError("spatial_density_matrix: basis must have two modes");
  const CMatrix v = lift_passive_unitary(CMatrix(u_phase_bs(params.phi).matrix()), basis);
  return v * thermal_density_matrix(DiagThermalParams::from(params), basis) * v.adjoint();
}

/// Brute-force counts: thermal density matrix conjugated by the Fock lift of
/// u, diagonal read off.
inline CountDistribution fock_oracle(const SpatialParams& params, const TwoModeUnitary& u, FockCutoff cutoff) {
  const FockBasis basis(2, cutoff);
  const auto x = DiagThermalParams::from(params);
  const CMatrix v = lift_passive_unitary(CMatrix(u.matrix()), basis);
  const CMatrix rho = v * thermal_density_matrix(x, basis) * v.adjoint();
  const int n = cutoff.max_total_photons;
  RMatrix t = RMatrix::Zero(n + 1, n + 1);
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    const auto& occ = basis.state(i);
    t(occ[0], occ[1]) = rho(i, i).real();
  }
  return CountDistribution(cutoff, t, thermal_tail(x, n));
}

/// Photon counting preceded by a fixed mode transformation.
///  - direct:        count the two-spatial-mode state as it is;
///  - beam_splitter: apply U(psi)^dag first, with psi held fixed;
///  - fourier:       apply U(0) first.
struct CountingScheme {
  enum class Kind { direct, beam_splitter, fourier };
  Kind kind = Kind::direct;
  double phase = 0.0;

  static CountingScheme direct() { return {Kind::direct, 0.0}; }
  static CountingScheme beam_splitter(double psi) { return {Kind::beam_splitter, psi}; }
  static CountingScheme fourier() { return {Kind::fourier, 0.0}; }

  /// Total transformation acting on the diagonal thermal state.
  [[nodiscard]] TwoModeUnitary total_unitary(double phi) const {
    switch (kind) {
      case Kind::direct: return u_phase_bs(phi);
      case Kind::beam_splitter: return u_phase_bs(phase).adjoint() * u_phase_bs(phi);
      case Kind::fourier: return u_phase_bs(0.0) * u_phase_bs(phi);
    }
    return u_phase_bs(phi);
  }
};

/// Count probabilities with analytic gradients in (n, |gamma|, phi).
struct CountModel {
  CountDistribution distribution;
  RMatrix gradients;  // rows follow the (m1, m2) enumeration of outcomes(), columns the parameters
  std::vector<std::pair<int, int>> outcomes;
};

inline CountModel count_model(const CountingScheme& scheme, const SpatialParams& params, FockCutoff cutoff) {
  const auto x = DiagThermalParams::from(params);
  const int nmax = cutoff.max_total_photons;
  RMatrix p, dx1, dx2, dphi;
  if (scheme.kind == CountingScheme::Kind::direct) {
    // phi-independent; x-gradients from the same sum with differentiated
    // geometric weights.
    const auto& c = detail::binomials(nmax);
    p = dx1 = dx2 = dphi = RMatrix::Zero(nmax + 1, nmax + 1);
    for (int total = 0; total <= nmax; ++total) {
      for (int m1 = 0; m1 <= total; ++m1) {
        const int m2 = total - m1;
        for (int n1 = 0; n1 <= total; ++n1) {
          const int n2 = total - n1;
          double s = 0.0;
          for (int j = 0; j <= m1; ++j) s += ((j % 2) ? -1.0 : 1.0) * c(n1, j) * c(n2, m1 - j);
          const double w = c(total, n1) / c(total, m1) * s * s / std::ldexp(1.0, total);
          const double g1 = detail::geometric(x.x1, n1), g2 = detail::geometric(x.x2, n2);
          p(m1, m2) += w * g1 * g2;
          dx1(m1, m2) += w * detail::geometric_dx(x.x1, n1) * g2;
          dx2(m1, m2) += w * g1 * detail::geometric_dx(x.x2, n2);
        }
      }
    }
  } else {
    // T = (1/2)[[1+e, 1-e], [1-e, 1+e]] with e = e^{i(psi - phi)}; the Fourier
    // scheme is psi = 0. d arg(e) / d phi = -1.
    const double psi = scheme.kind == CountingScheme::Kind::fourier ? 0.0 : scheme.phase;
    auto counts = detail::interference_counts(x, std::polar(1.0, psi - params.phi), nmax);
    p = std::move(counts.p);
    dx1 = std::move(counts.dx1);
    dx2 = std::move(counts.dx2);
    dphi = -counts.darg;
  }
  CountModel out{CountDistribution(cutoff, p, thermal_tail(x, nmax)), RMatrix(), {}};
  for (int a = 0; a <= nmax; ++a) {
    for (int b = 0; a + b <= nmax; ++b) out.outcomes.emplace_back(a, b);
  }
  out.gradients = RMatrix::Zero(static_cast<Eigen::Index>(out.outcomes.size()), 3);
  const double g = params.gamma_abs, n = params.n_mean;
  for (size_t k = 0; k < out.outcomes.size(); ++k) {
    const auto [a, b] = out.outcomes[k];
    const auto r = static_cast<Eigen::Index>(k);
    out.gradients(r, 0) = (1.0 - g) * dx1(a, b) + (1.0 + g) * dx2(a, b);
    out.gradients(r, 1) = -n * dx1(a, b) + n * dx2(a, b);
    out.gradients(r, 2) = dphi(a, b);
  }
  return out;
}

inline CountDistribution count_distribution(const CountingScheme& scheme, const SpatialParams& params,
                                            FockCutoff cutoff) {
  return count_model(scheme, params, cutoff).distribution;
}

inline FisherMatrix count_fisher(const CountingScheme& scheme, const SpatialParams& params, FockCutoff cutoff) {
  const auto model = count_model(scheme, params, cutoff);
  std::vector<double> probs;
  probs.reserve(model.outcomes.size());
  for (const auto& [a, b] : model.outcomes) probs.push_back(model.distribution(a, b));
  return classical_fisher(probs, model.gradients);
}

inline FisherMatrix count_fisher(const CountingScheme& scheme, const SpatialParams& params) {
  return count_fisher(scheme, params, tail_rule(params));
}

}  // namespace thermoptic
