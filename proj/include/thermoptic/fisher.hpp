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
#include <limits>
#include <optional>
#include <sstream>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "thermoptic/common.hpp"
#include "thermoptic/gaussian_state.hpp"
#include "thermoptic/quadratic_observable.hpp"

namespace thermoptic {

enum class FisherKind { quantum, classical };

inline constexpr double kFisherSymmetryTol = 1e-10;
/// Rank threshold relative to the largest eigenvalue of the equilibrated matrix.
inline constexpr double kRankThreshold = 1e-12;
/// Outcomes below this probability are skipped in classical Fisher sums.
inline constexpr double kProbabilityFloor = 1e-30;

/// Symmetric positive semi-definite information matrix.
class FisherMatrix {
 public:
  FisherMatrix(RMatrix m, FisherKind kind) : m_(std::move(m)), kind_(kind) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw DomainError("FisherMatrix: must be square and non-empty");
    if (!m_.allFinite()) throw NumericalError("FisherMatrix: non-finite entries");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kFisherSymmetryTol * scale) {
      std::ostringstream os;
      os << "FisherMatrix: not symmetric, residual " << asym;
      throw NumericalError(os.str());
    }
    m_ = 0.5 * (m_ + m_.transpose()).eval();
    const double min_eig = Eigen::SelfAdjointEigenSolver<RMatrix>(equilibrated(m_).first, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    if (min_eig < -kFisherSymmetryTol * std::max(1.0, static_cast<double>(m_.rows()))) {
      std::ostringstream os;
      os << "FisherMatrix: not positive semi-definite, min eigenvalue " << min_eig;
      throw NumericalError(os.str());
    }
  }

  [[nodiscard]] const RMatrix& matrix() const { return m_; }
  [[nodiscard]] FisherKind kind() const { return kind_; }
  [[nodiscard]] Eigen::Index dim() const { return m_.rows(); }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// D^{-1/2} M D^{-1/2} with D = diag(M) (zero diagonals left unscaled), and
  /// the scale vector D^{-1/2}. Parameters with wildly different units (kelvin
  /// against s^2) make raw eigenvalue ratios meaningless; the equilibrated
  /// matrix is invariant under rescaling each parameter.
  static std::pair<RMatrix, RVector> equilibrated(const RMatrix& m) {
    RVector s(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) s(i) = m(i, i) > 0.0 ? 1.0 / std::sqrt(m(i, i)) : 1.0;
    return {s.asDiagonal() * m * s.asDiagonal(), s};
  }

 private:
  RMatrix m_;
  FisherKind kind_;
};

using ParamDerivatives = std::vector<CMatrix>;

namespace detail {

/// Row-major pair flattening (a, b) -> 2n a + b.
inline CVector flatten(const CMatrix& m) {
  CVector v(m.size());
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    for (Eigen::Index b = 0; b < m.cols(); ++b) v(a * m.cols() + b) = m(a, b);
  }
  return v;
}

inline CMatrix unflatten(const CVector& v, Eigen::Index dim) {
  CMatrix m(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) m(a, b) = v(a * dim + b);
  }
  return m;
}

/// Sigma (x) Sigma + (1/4) Omega (x) Omega, rows/columns in row-major pair order.
inline CMatrix m_tensor(const GaussianState& state) {
  const CMatrix omega = omega_matrix(state.n_modes()).cast<cplx>();
  return CMatrix(Eigen::kroneckerProduct(state.sigma(), state.sigma())) +
         0.25 * CMatrix(Eigen::kroneckerProduct(omega, omega));
}

inline void require_mixed(const GaussianState& state, const char* where) {
  const auto nu = physicality_check(state);
  for (size_t k = 0; k < nu.size(); ++k) {
    if (nu[k] - 0.5 <= 1e-12) {
      std::ostringstream os;
      os << where << ": M tensor is singular, symplectic eigenvalue #" << k << " = " << nu[k]
         << " (pure mode); the Gaussian QFI formula needs every eigenvalue > 1/2";
      throw NumericalError(os.str());
    }
  }
}

inline void check_derivative(const GaussianState& state, const CMatrix& d) {
  if (d.rows() != state.dim() || d.cols() != state.dim()) {
    throw DomainError("Gaussian Fisher engine: derivative shape does not match sigma");
  }
}

}  // namespace detail

/// Solutions y_i of M y_i = vec(d_i Sigma), one per parameter.
class GaussianInformation {
 public:
  GaussianInformation(const GaussianState& state, const ParamDerivatives& derivs) : state_(state) {
    detail::require_mixed(state, "qfi_gaussian");
    Eigen::PartialPivLU<CMatrix> lu(detail::m_tensor(state));
    for (const auto& d : derivs) {
      detail::check_derivative(state, d);
      rhs_.push_back(detail::flatten(d));
      sol_.push_back(lu.solve(rhs_.back()));
    }
  }

  [[nodiscard]] FisherMatrix qfi() const {
    const auto d = static_cast<Eigen::Index>(rhs_.size());
    RMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        m(i, j) = 0.5 * (rhs_[static_cast<size_t>(i)].transpose() * sol_[static_cast<size_t>(j)])(0).real();
      }
    }
    return FisherMatrix(m, FisherKind::quantum);
  }

  /// L_i = (1/2) y_i^{ab} (a^a a^b - Sigma^{ab}).
  [[nodiscard]] QuadraticObservable sld(size_t i) const {
    const CMatrix c = 0.5 * detail::unflatten(sol_.at(i), state_.dim());
    const cplx c0 = -(c.array() * state_.sigma().array()).sum();
    return QuadraticObservable(state_.n_modes(), c0, c);
  }

 private:
  GaussianState state_;
  std::vector<CVector> rhs_;
  std::vector<CVector> sol_;
};

inline FisherMatrix qfi_gaussian(const GaussianState& state, const ParamDerivatives& derivs) {
  return GaussianInformation(state, derivs).qfi();
}

inline QuadraticObservable sld_gaussian(const GaussianState& state, const CMatrix& deriv) {
  return GaussianInformation(state, {deriv}).sld(0);
}

/// Classical Fisher information sum_x grad p grad p^T / p.
/// `grads` has one row per outcome and one column per parameter.
inline FisherMatrix classical_fisher(std::span<const double> probs, const RMatrix& grads) {
  if (static_cast<Eigen::Index>(probs.size()) != grads.rows()) {
    throw DataError("classical_fisher: gradient table rows do not match outcome count");
  }
  RMatrix out = RMatrix::Zero(grads.cols(), grads.cols());
  for (size_t x = 0; x < probs.size(); ++x) {
    const double p = probs[x];
    if (p < -1e-12) {
      std::ostringstream os;
      os << "classical_fisher: negative probability " << p << " at outcome " << x;
      throw DataError(os.str());
    }
    if (p < kProbabilityFloor) continue;
    const RVector g = grads.row(static_cast<Eigen::Index>(x)).transpose();
    out.noalias() += (g * g.transpose()) / p;
  }
  return FisherMatrix(out, FisherKind::classical);
}

/// tr(W M^{-1}) for symmetric PSD W, M, with +infinity when M is singular
/// along a direction where W has weight. Reports one such direction.
struct TraceInverse {
  double value = 0.0;
  std::optional<RVector> null_direction;
};

inline TraceInverse trace_with_inverse(const RMatrix& weight, const RMatrix& m) {
  const auto [me, s] = FisherMatrix::equilibrated(m);
  // Me = S M S, so tr(W M^{-1}) = tr(We Me^{-1}) with We = S W S.
  const RMatrix we = s.asDiagonal() * weight * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(me);
  const RVector& lam = es.eigenvalues();
  const double lmax = std::max(lam.cwiseAbs().maxCoeff(), 0.0);
  const double wscale = std::max(we.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  TraceInverse out;
  if (lmax == 0.0) {
    if (weight.cwiseAbs().maxCoeff() == 0.0) return out;
    out.value = std::numeric_limits<double>::infinity();
    out.null_direction = RVector::Unit(m.rows(), 0);
    return out;
  }
  bool singular = false;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) > kRankThreshold * lmax) continue;
    singular = true;
    const RVector v = es.eigenvectors().col(k);
    if (v.dot(we * v) > kRankThreshold * wscale) {
      out.value = std::numeric_limits<double>::infinity();
      out.null_direction = (s.asDiagonal() * v).normalized();
      return out;
    }
  }
  if (!singular) {
    out.value = (me.ldlt().solve(we)).trace();
    return out;
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) <= kRankThreshold * lmax) continue;
    const RVector v = es.eigenvectors().col(k);
    total += v.dot(we * v) / lam(k);
  }
  out.value = total;
  return out;
}

/// V = tr(I_Q I_C^{-1}); +infinity when the measurement is blind to an
/// informative direction.
inline double cost(const FisherMatrix& iq, const FisherMatrix& ic) {
  if (iq.dim() != ic.dim()) throw DomainError("cost: dimension mismatch");
  return trace_with_inverse(iq.matrix(), ic.matrix()).value;
}

inline TraceInverse crb_bound(const FisherMatrix& iq, const RMatrix& g) {
  if (g.rows() != iq.dim() || g.cols() != iq.dim()) throw DomainError("crb_bound: weight matrix has wrong shape");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
    throw DomainError("crb_bound: weight matrix must be symmetric");
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<RMatrix>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig < -1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
    throw DomainError("crb_bound: weight matrix must be positive semi-definite");
  }
  return trace_with_inverse(g, iq.matrix());
}

}  // namespace thermoptic
