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
#include <sstream>
#include <vector>

#include "thermoptic/common.hpp"
#include "thermoptic/fisher.hpp"
#include "thermoptic/gaussian_state.hpp"
#include "thermoptic/optimize.hpp"
#include "thermoptic/params.hpp"
#include "thermoptic/photon_counting.hpp"
#include "thermoptic/quadratic_observable.hpp"

namespace thermoptic {

// Parameter indices of the spatial model.
inline constexpr int kParamN = 0;
inline constexpr int kParamGamma = 1;
inline constexpr int kParamPhi = 2;

/// Number-conserving two-mode observable P n_tot + Q a1^dag a2 + Q^* a2^dag a1 + R.
struct PqrCoefficients {
  double p = 0.0;
  cplx q = 0.0;
  double r = 0.0;

  [[nodiscard]] QuadraticObservable observable() const {
    return cplx(p) * QuadraticObservable::total_number(2) + q * QuadraticObservable::hop(2, 0, 1) +
           std::conj(q) * QuadraticObservable::hop(2, 1, 0) + cplx(r) * QuadraticObservable::identity(2);
  }

  [[nodiscard]] double distance(const PqrCoefficients& o) const {
    return std::max({std::abs(p - o.p), std::abs(q - o.q), std::abs(r - o.r)});
  }

  /// Reads (P, Q, R) off a number-conserving observable whose two number
  /// coefficients agree; throws otherwise.
  static PqrCoefficients from(const QuadraticObservable& obs, double tol = 1e-8) {
    const cplx p1 = obs.hop_coefficient(0, 0), p2 = obs.hop_coefficient(1, 1);
    const double scale = std::max(1.0, obs.max_abs_coefficient());
    if (!obs.number_conserving(tol * scale) || std::abs(p1 - p2) > tol * scale) {
      throw NumericalError("PqrCoefficients: observable is not of the form P n_tot + Q a1^dag a2 + h.c. + R");
    }
    return {0.5 * (p1 + p2).real(), obs.hop_coefficient(0, 1), obs.normal_ordered_constant().real()};
  }
};

namespace detail {

inline void require_sld_domain(int j, const SpatialParams& params) {
  if (j < 0 || j > 2) throw DomainError("spatial SLD: parameter index must be 0, 1 or 2");
  if (j != kParamPhi && params.gamma_abs >= 1.0) {
    throw DomainError("spatial SLD: pole at |gamma| = 1 (denominator |gamma|^2 - 1 vanishes)");
  }
  if (j == kParamN && params.n_mean <= 0.0) throw DomainError("spatial SLD: pole at n = 0 (denominator n vanishes)");
}

}  // namespace detail

/// Reference closed forms for the coefficients, with (n - 1)^2 denominators.
/// `plus_one` swaps every (n - 1)^2 for (n + 1)^2, the combination that
/// thermal-state algebra suggests. Kept for cross-checking only.
inline PqrCoefficients pqr_tabulated(int j, const SpatialParams& params, bool plus_one = false) {
  detail::require_sld_domain(j, params);
  const double n = params.n_mean, g = params.gamma_abs;
  const cplx e = std::polar(1.0, -params.phi);
  const double shifted = plus_one ? (n + 1.0) : (n - 1.0);
  const double d = n * n * g * g - shifted * shifted;
  switch (j) {
    case kParamN:
      return {(n + 1.0) / (n * d), g * e / (n * d), 2.0 * n * (g * g * n - n - 1.0) / (n * d)};
    case kParamGamma: {
      const double dg = (g * g - 1.0) * d;
      return {(2.0 * n + 1.0) / dg, e * (1.0 + n + g * g * n * n) / dg, 2.0 * g * (n * n * (g * g - 1.0)) / dg};
    }
    default:
      return {0.0, cplx(0.0, 1.0) * g * e, 0.0};
  }
}

/// Authoritative SLD of parameter j, from the Gaussian formula applied to the
/// two-spatial-mode covariance.
inline QuadraticObservable sld_spatial(int j, const SpatialParams& params) {
  detail::require_sld_domain(j, params);
  const auto state = two_spatial_covariance(params);
  return GaussianInformation(state, two_spatial_covariance_derivatives(params)).sld(static_cast<size_t>(j));
}

/// Comparison of the tabulated closed forms with the computed SLD.
struct SldDiscrepancy {
  int parameter = 0;
  PqrCoefficients computed;
  PqrCoefficients tabulated;          // (n - 1)^2 denominators
  PqrCoefficients tabulated_plus_one; // (n + 1)^2 denominators
  double deviation = 0.0;
  double deviation_plus_one = 0.0;
  [[nodiscard]] bool tabulated_matches(double tol = 1e-8) const { return deviation <= tol; }
};

inline SldDiscrepancy sld_discrepancy(int j, const SpatialParams& params) {
  SldDiscrepancy d;
  d.parameter = j;
  d.computed = PqrCoefficients::from(sld_spatial(j, params));
  d.tabulated = pqr_tabulated(j, params, false);
  d.tabulated_plus_one = pqr_tabulated(j, params, true);
  d.deviation = d.computed.distance(d.tabulated);
  d.deviation_plus_one = d.computed.distance(d.tabulated_plus_one);
  return d;
}

inline constexpr double kZeroPatternTol = 1e-10;

inline FisherMatrix qfi_spatial(const SpatialParams& params) {
  const auto state = two_spatial_covariance(params);
  auto iq = qfi_gaussian(state, two_spatial_covariance_derivatives(params));
  const double scale = std::max(1.0, iq.matrix().cwiseAbs().maxCoeff());
  const double off = std::max(std::abs(iq(0, 2)), std::abs(iq(1, 2)));
  if (off > kZeroPatternTol * scale) {
    std::ostringstream os;
    os << "qfi_spatial: phase block not decoupled, |I_13|, |I_23| up to " << off;
    throw NumericalError(os.str());
  }
  return iq;
}

/// Locally unbiased estimators X_i = sum_j [I_Q^{-1}]_ij L_j.
inline std::array<QuadraticObservable, 3> x_operators(const SpatialParams& params) {
  if (!(params.gamma_abs > 0.0 && params.gamma_abs < 1.0 && params.n_mean > 0.0)) {
    std::ostringstream os;
    os << "x_operators: I_Q is singular";
    if (params.gamma_abs == 0.0 || params.n_mean == 0.0) os << "; null direction along phi (no phase information)";
    if (params.gamma_abs >= 1.0) os << "; |gamma| = 1 is a pure-state pole";
    if (params.n_mean == 0.0) os << "; n = 0 is the vacuum";
    throw DomainError(os.str());
  }
  const auto state = two_spatial_covariance(params);
  const GaussianInformation info(state, two_spatial_covariance_derivatives(params));
  const RMatrix inv = info.qfi().matrix().inverse();
  std::array<QuadraticObservable, 3> out{QuadraticObservable::zero(2), QuadraticObservable::zero(2),
                                         QuadraticObservable::zero(2)};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[static_cast<size_t>(i)] = out[static_cast<size_t>(i)] + cplx(inv(i, j)) * info.sld(static_cast<size_t>(j));
  }
  return out;
}

enum class XMeasurement { x2, x3 };

struct XMeasurementFisher {
  FisherMatrix ic;
  double delta1 = 0.0;  // [I_C]_12
  double delta2 = 0.0;  // [I_C]_22
};

/// Counting after a beam splitter with phase phi (X2) or phi - pi/2 (X3).
inline XMeasurementFisher measurement_fisher_x(XMeasurement which, const SpatialParams& params) {
  const double psi = which == XMeasurement::x2 ? params.phi : params.phi - kPi / 2.0;
  auto ic = count_fisher(CountingScheme::beam_splitter(psi), params);
  if (which == XMeasurement::x2) {
    const double scale = std::max(1.0, ic.matrix().cwiseAbs().maxCoeff());
    const double phase_row = ic.matrix().row(2).cwiseAbs().maxCoeff();
    if (phase_row > kZeroPatternTol * scale) {
      std::ostringstream os;
      os << "measurement_fisher_x: X2 counts carry phase information " << phase_row;
      throw NumericalError(os.str());
    }
    RMatrix m = ic.matrix();
    m.row(2).setZero();
    m.col(2).setZero();
    ic = FisherMatrix(m, FisherKind::classical);
  }
  return {ic, ic(0, 1), ic(1, 1)};
}

struct WeightedSchemeResult {
  double p_star = 0.0;
  double cost_star = 0.0;
  FisherMatrix ic_mixture;
};

/// Idealized X2/X3 Fisher matrices. X2 captures the (n, |gamma|) block of I_Q
/// exactly. X3 captures the phase entry and, in the frame where I_Q is
/// diagonal (n, then |gamma| orthogonalized against n), only the n direction:
/// that is the delta = 0 limit with the residual |gamma| information removed.
inline std::pair<FisherMatrix, FisherMatrix> idealized_x_fisher(const FisherMatrix& iq) {
  const RMatrix& q = iq.matrix();
  RMatrix ic2 = q;
  ic2.row(2).setZero();
  ic2.col(2).setZero();
  RMatrix ic3 = RMatrix::Zero(3, 3);
  ic3(0, 0) = q(0, 0);
  ic3(0, 1) = ic3(1, 0) = q(0, 1);
  ic3(1, 1) = q(0, 1) * q(0, 1) / q(0, 0);
  ic3(2, 2) = q(2, 2);
  return {FisherMatrix(ic2, FisherKind::classical), FisherMatrix(ic3, FisherKind::classical)};
}

inline WeightedSchemeResult weighted_scheme_from(const FisherMatrix& iq, const FisherMatrix& ic2,
                                                 const FisherMatrix& ic3) {
  auto mixture = [&](double p) { return RMatrix(p * ic2.matrix() + (1.0 - p) * ic3.matrix()); };
  auto f = [&](double p) { return trace_with_inverse(iq.matrix(), mixture(p)).value; };
  const auto best = golden_section(f, 0.0, 1.0, 1e-8);
  return {best.x, best.value, FisherMatrix(mixture(best.x), FisherKind::classical)};
}

/// min_p tr(I_Q (p I_C(X2) + (1-p) I_C(X3))^{-1}).
inline WeightedSchemeResult weighted_scheme(const SpatialParams& params, bool use_delta_zero) {
  const auto iq = qfi_spatial(params);
  if (use_delta_zero) {
    const auto [ic2, ic3] = idealized_x_fisher(iq);
    return weighted_scheme_from(iq, ic2, ic3);
  }
  const auto x2 = measurement_fisher_x(XMeasurement::x2, params);
  const auto x3 = measurement_fisher_x(XMeasurement::x3, params);
  return weighted_scheme_from(iq, x2.ic, x3.ic);
}

}  // namespace thermoptic
