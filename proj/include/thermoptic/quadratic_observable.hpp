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

#include <string>

#include "thermoptic/common.hpp"
#include "thermoptic/fock.hpp"
#include "thermoptic/gaussian_state.hpp"

namespace thermoptic {

/// Operator c0 + sum_{ab} c_{ab} a^a a^b over the ladder vector.
///
/// The coefficient matrix is stored symmetric: the antisymmetric part of any
/// input is a c-number (a^a a^b - a^b a^a = Omega^{ab}) and is folded into c0.
/// With this canonical form two observables are equal iff their (c0, c) agree,
/// which is what the coefficientwise checks below rely on.
class QuadraticObservable {
 public:
  QuadraticObservable(int n_modes, cplx c0, const CMatrix& c) : n_modes_(n_modes), c0_(c0) {
    if (n_modes <= 0) throw DomainError("QuadraticObservable: mode count must be positive");
    if (c.rows() != 2 * n_modes || c.cols() != 2 * n_modes) {
      throw DomainError("QuadraticObservable: coefficient matrix has wrong shape");
    }
    c_ = 0.5 * (c + c.transpose());
    const CMatrix anti = 0.5 * (c - c.transpose());
    const RMatrix omega = omega_matrix(n_modes);
    // sum_{ab} A_{ab} a^a a^b = (1/2) sum_{ab} A_{ab} Omega^{ab} for antisymmetric A.
    c0_ += 0.5 * (anti.array() * omega.cast<cplx>().array()).sum();
  }

  static QuadraticObservable zero(int n_modes) {
    return QuadraticObservable(n_modes, 0.0, CMatrix::Zero(2 * n_modes, 2 * n_modes));
  }
  static QuadraticObservable identity(int n_modes) {
    return QuadraticObservable(n_modes, 1.0, CMatrix::Zero(2 * n_modes, 2 * n_modes));
  }
  /// a_i^dag a_j.
  static QuadraticObservable hop(int n_modes, int i, int j) {
    CMatrix c = CMatrix::Zero(2 * n_modes, 2 * n_modes);
    c(2 * i + 1, 2 * j) = 1.0;
    return QuadraticObservable(n_modes, 0.0, c);
  }
  static QuadraticObservable number(int n_modes, int k) { return hop(n_modes, k, k); }
  static QuadraticObservable total_number(int n_modes) {
    auto out = zero(n_modes);
    for (int k = 0; k < n_modes; ++k) out = out + number(n_modes, k);
    return out;
  }

  [[nodiscard]] int n_modes() const { return n_modes_; }
  [[nodiscard]] cplx c0() const { return c0_; }
  [[nodiscard]] const CMatrix& coefficients() const { return c_; }

  /// Coefficient of a_i^dag a_j in normal-ordered form (hop terms are split
  /// symmetrically between c_{2i+1,2j} and c_{2j,2i+1}).
  [[nodiscard]] cplx hop_coefficient(int i, int j) const { return 2.0 * c_(2 * i + 1, 2 * j); }

  /// Scalar part after normal ordering.
  [[nodiscard]] cplx normal_ordered_constant() const {
    cplx out = c0_;
    for (int k = 0; k < n_modes_; ++k) out += c_(2 * k, 2 * k + 1);
    return out;
  }

  /// True when every coefficient pairs an annihilator with a creator.
  [[nodiscard]] bool number_conserving(double tol = 1e-12) const {
    for (Eigen::Index a = 0; a < c_.rows(); ++a) {
      for (Eigen::Index b = 0; b < c_.cols(); ++b) {
        if ((a % 2) == (b % 2) && std::abs(c_(a, b)) > tol) return false;
      }
    }
    return true;
  }

  /// Hermitian conjugate: (a^a)^dag = a^{pi(a)} where pi swaps 2k <-> 2k+1.
  [[nodiscard]] QuadraticObservable adjoint() const {
    const Eigen::Index d = c_.rows();
    CMatrix out(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) out(a ^ 1, b ^ 1) = std::conj(c_(b, a));
    }
    return QuadraticObservable(n_modes_, std::conj(c0_), out);
  }

  [[nodiscard]] double distance(const QuadraticObservable& other) const {
    check_modes(other, "distance");
    return std::max(std::abs(c0_ - other.c0_), (c_ - other.c_).cwiseAbs().maxCoeff());
  }

  [[nodiscard]] bool is_hermitian(double tol = 1e-10) const { return distance(adjoint()) <= tol; }

  [[nodiscard]] double max_abs_coefficient() const { return std::max(std::abs(c0_), c_.cwiseAbs().maxCoeff()); }

  friend QuadraticObservable operator+(const QuadraticObservable& a, const QuadraticObservable& b) {
    a.check_modes(b, "operator+");
    return QuadraticObservable(a.n_modes_, a.c0_ + b.c0_, a.c_ + b.c_);
  }
  friend QuadraticObservable operator-(const QuadraticObservable& a, const QuadraticObservable& b) {
    a.check_modes(b, "operator-");
    return QuadraticObservable(a.n_modes_, a.c0_ - b.c0_, a.c_ - b.c_);
  }
  friend QuadraticObservable operator*(cplx s, const QuadraticObservable& a) {
    return QuadraticObservable(a.n_modes_, s * a.c0_, s * a.c_);
  }

  void check_modes(const QuadraticObservable& other, const char* where) const {
    if (other.n_modes_ != n_modes_) {
      throw DomainError(std::string("QuadraticObservable::") + where + ": mode count mismatch");
    }
  }

 private:
  int n_modes_;
  cplx c0_;
  CMatrix c_;
};

/// [A, B] for symmetric coefficient matrices: a^T (2(A Omega B + (A Omega B)^T)) a.
/// Closed under the CCR with no scalar remainder.
inline QuadraticObservable qo_commutator(const QuadraticObservable& a, const QuadraticObservable& b) {
  a.check_modes(b, "commutator");
  const CMatrix omega = omega_matrix(a.n_modes()).cast<cplx>();
  const CMatrix m = a.coefficients() * omega * b.coefficients();
  return QuadraticObservable(a.n_modes(), 0.0, 2.0 * (m + m.transpose()));
}

/// Ordered two-point function G^{ab} = <a^a a^b> = Sigma^{ab} + Omega^{ab}/2.
inline CMatrix ordered_two_point(const GaussianState& state) {
  return state.sigma() + 0.5 * omega_matrix(state.n_modes()).cast<cplx>();
}

inline cplx qo_expectation(const QuadraticObservable& obs, const GaussianState& state) {
  if (obs.n_modes() != state.n_modes()) throw DomainError("qo_expectation: mode count mismatch");
  return obs.c0() + (obs.coefficients().array() * ordered_two_point(state).array()).sum();
}

/// <AB> - <A><B> on a zero-mean Gaussian state, by Wick's theorem:
/// 2 tr(G C_B G^T C_A).
inline cplx qo_covariance(const QuadraticObservable& a, const QuadraticObservable& b, const GaussianState& state) {
  if (a.n_modes() != state.n_modes() || b.n_modes() != state.n_modes()) {
    throw DomainError("qo_covariance: mode count mismatch");
  }
  const CMatrix g = ordered_two_point(state);
  return 2.0 * (g * b.coefficients() * g.transpose() * a.coefficients()).trace();
}

/// <AB> on a zero-mean Gaussian state.
inline cplx qo_product_expectation(const QuadraticObservable& a, const QuadraticObservable& b,
                                   const GaussianState& state) {
  return qo_covariance(a, b, state) + qo_expectation(a, state) * qo_expectation(b, state);
}

inline double qo_variance(const QuadraticObservable& obs, const GaussianState& state) {
  return qo_covariance(obs, obs, state).real();
}

/// Matrix of the observable in a truncated Fock basis. Terms that would leave
/// the truncated space (a a, a^dag a^dag near the cutoff) are dropped; the
/// intermediate state of each product is not truncated.
inline CMatrix qo_fock_matrix(const QuadraticObservable& obs, const FockBasis& basis) {
  if (obs.n_modes() != basis.n_modes()) throw DomainError("qo_fock_matrix: mode count mismatch");
  const Eigen::Index dim = basis.size();
  CMatrix out = obs.c0() * CMatrix::Identity(dim, dim);
  const CMatrix& c = obs.coefficients();
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (Eigen::Index a = 0; a < c.rows(); ++a) {
      for (Eigen::Index b = 0; b < c.cols(); ++b) {
        if (c(a, b) == cplx(0.0)) continue;
        auto occ = basis.state(col);
        double amp = apply_ladder(static_cast<int>(b), occ);
        if (amp == 0.0) continue;
        amp *= apply_ladder(static_cast<int>(a), occ);
        if (amp == 0.0) continue;
        const auto row = basis.index_of(occ);
        if (!row) continue;
        out(*row, col) += c(a, b) * amp;
      }
    }
  }
  return out;
}

inline CMatrix qo_fock_matrix(const QuadraticObservable& obs, FockCutoff cutoff) {
  return qo_fock_matrix(obs, FockBasis(obs.n_modes(), cutoff));
}

}  // namespace thermoptic
