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
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "thermoptic/common.hpp"
#include "thermoptic/params.hpp"

namespace thermoptic {

// Ladder ordering used everywhere in the library: (a_1, a_1^dag, a_2, a_2^dag, ...).
// Index 2k is the annihilator of mode k and 2k+1 its creator.

inline constexpr double kPhysicalityTol = 1e-12;

/// Commutator matrix Omega^{ab} = [a^a, a^b] for n modes: the direct sum of
/// n blocks [[0, 1], [-1, 0]].
class SymplecticForm {
 public:
  explicit SymplecticForm(int n_modes) : n_modes_(n_modes), omega_(RMatrix::Zero(2 * n_modes, 2 * n_modes)) {
    if (n_modes <= 0) throw DomainError("SymplecticForm: mode count must be positive");
    for (int k = 0; k < n_modes; ++k) {
      omega_(2 * k, 2 * k + 1) = 1.0;
      omega_(2 * k + 1, 2 * k) = -1.0;
    }
  }

  [[nodiscard]] int n_modes() const { return n_modes_; }
  [[nodiscard]] const RMatrix& matrix() const { return omega_; }

 private:
  int n_modes_;
  RMatrix omega_;
};

inline RMatrix omega_matrix(int n_modes) { return SymplecticForm(n_modes).matrix(); }

/// Zero-mean bosonic Gaussian state described by its symmetrized second
/// moments Sigma^{ab} = <{a^a, a^b}>/2 in ladder ordering.
class GaussianState {
 public:
  GaussianState(int n_modes, CMatrix sigma) : GaussianState(n_modes, std::move(sigma), CVector::Zero(2 * n_modes)) {}

  GaussianState(int n_modes, CMatrix sigma, CVector mu) : n_modes_(n_modes), sigma_(std::move(sigma)), mu_(std::move(mu)) {
    if (n_modes <= 0) throw DomainError("GaussianState: mode count must be positive");
    const int dim = 2 * n_modes;
    if (sigma_.rows() != dim || sigma_.cols() != dim) {
      throw DomainError("GaussianState: sigma must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (mu_.size() != dim) throw DomainError("GaussianState: mu has wrong length");
    if (mu_.cwiseAbs().maxCoeff() != 0.0) {
      throw DomainError("GaussianState: only zero-mean states are supported (mu must be identically zero)");
    }
    if (!sigma_.allFinite()) throw DomainError("GaussianState: sigma has non-finite entries");
    const double asym = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, sigma_.cwiseAbs().maxCoeff())) {
      std::ostringstream os;
      os << "GaussianState: sigma must be symmetric, residual " << asym;
      throw DomainError(os.str());
    }
  }

  [[nodiscard]] int n_modes() const { return n_modes_; }
  [[nodiscard]] int dim() const { return 2 * n_modes_; }
  [[nodiscard]] const CMatrix& sigma() const { return sigma_; }
  [[nodiscard]] const CVector& mu() const { return mu_; }

  /// <a_k^dag a_k> read off the (a_k, a_k^dag) entry.
  [[nodiscard]] double mode_occupation(int k) const { return sigma_(2 * k, 2 * k + 1).real() - 0.5; }

  [[nodiscard]] double total_photon_number() const {
    double total = 0.0;
    for (int k = 0; k < n_modes_; ++k) total += mode_occupation(k);
    return total;
  }

 private:
  int n_modes_;
  CMatrix sigma_;
  CVector mu_;
};

/// Passive two-mode transformation acting on annihilators, a_out = u a_in.
class TwoModeUnitary {
 public:
  explicit TwoModeUnitary(const Eigen::Matrix2cd& u) : u_(u) {
    const double residual = (u_ * u_.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-12)) {
      std::ostringstream os;
      os << "TwoModeUnitary: matrix is not unitary, residual " << residual;
      throw DomainError(os.str());
    }
  }

  [[nodiscard]] const Eigen::Matrix2cd& matrix() const { return u_; }
  [[nodiscard]] TwoModeUnitary operator*(const TwoModeUnitary& rhs) const { return TwoModeUnitary(u_ * rhs.u_); }
  [[nodiscard]] TwoModeUnitary adjoint() const { return TwoModeUnitary(u_.adjoint()); }

 private:
  Eigen::Matrix2cd u_;
};

/// Single spectral mode of thermal light: Sigma = (n + 1/2) sigma_x.
inline GaussianState thermal_spectral_covariance(double n_mean) {
  if (!std::isfinite(n_mean) || n_mean < 0.0) {
    throw DomainError("thermal_spectral_covariance: n_mean must be finite and >= 0, got " + std::to_string(n_mean));
  }
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 1) = s(1, 0) = n_mean + 0.5;
  return GaussianState(1, s);
}

/// Direct sum of independent modes.
inline GaussianState direct_sum(const std::vector<GaussianState>& parts) {
  if (parts.empty()) throw DomainError("direct_sum: no states given");
  int modes = 0;
  for (const auto& p : parts) modes += p.n_modes();
  CMatrix s = CMatrix::Zero(2 * modes, 2 * modes);
  int offset = 0;
  for (const auto& p : parts) {
    s.block(offset, offset, p.dim(), p.dim()) = p.sigma();
    offset += p.dim();
  }
  return GaussianState(modes, s);
}

/// Covariance of two spatial modes with equal occupation n and coherence
/// b = <a_2^dag a_1> = n |gamma| e^{-i phi}.
inline GaussianState two_spatial_covariance(const SpatialParams& p) {
  const double c = p.n_mean + 0.5;
  const cplx b = p.n_mean * p.gamma_abs * std::polar(1.0, -p.phi);
  CMatrix s = CMatrix::Zero(4, 4);
  s(0, 1) = s(1, 0) = c;
  s(2, 3) = s(3, 2) = c;
  s(0, 3) = s(3, 0) = b;
  s(1, 2) = s(2, 1) = std::conj(b);
  return GaussianState(2, s);
}

/// Derivatives of two_spatial_covariance with respect to (n, |gamma|, phi).
inline std::vector<CMatrix> two_spatial_covariance_derivatives(const SpatialParams& p) {
  const cplx e = std::polar(1.0, -p.phi);
  std::vector<CMatrix> out(3, CMatrix::Zero(4, 4));
  auto place = [](CMatrix& m, cplx dc, cplx db) {
    m(0, 1) = m(1, 0) = dc;
    m(2, 3) = m(3, 2) = dc;
    m(0, 3) = m(3, 0) = db;
    m(1, 2) = m(2, 1) = std::conj(db);
  };
  place(out[0], 1.0, p.gamma_abs * e);
  place(out[1], 0.0, p.n_mean * e);
  place(out[2], 0.0, cplx(0.0, -1.0) * p.n_mean * p.gamma_abs * e);
  return out;
}

/// The 2n x 2n matrix W acting on the ladder vector for a_out = u a_in,
/// a_out^dag = u^* a_in^dag.
inline CMatrix ladder_transform(const CMatrix& u) {
  const Eigen::Index n = u.rows();
  CMatrix w = CMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      w(2 * i, 2 * j) = u(i, j);
      w(2 * i + 1, 2 * j + 1) = std::conj(u(i, j));
    }
  }
  return w;
}

inline GaussianState apply_mode_unitary(const GaussianState& state, const CMatrix& u) {
  if (u.rows() != state.n_modes() || u.cols() != state.n_modes()) {
    throw DomainError("apply_mode_unitary: unitary dimension does not match the mode count");
  }
  const Eigen::Index n = u.rows();
  const double residual = (u * u.adjoint() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10)) {
    std::ostringstream os;
    os << "apply_mode_unitary: matrix is not unitary, residual " << residual;
    throw DomainError(os.str());
  }
  const CMatrix w = ladder_transform(u);
  CMatrix s = w * state.sigma() * w.transpose();
  s = 0.5 * (s + s.transpose()).eval();
  return GaussianState(state.n_modes(), s);
}

inline GaussianState apply_mode_unitary(const GaussianState& state, const TwoModeUnitary& u) {
  return apply_mode_unitary(state, CMatrix(u.matrix()));
}

/// Symplectic eigenvalues, ascending. In ladder ordering the spectrum of
/// Omega Sigma is {+nu_k, -nu_k}; the factor i of the quadrature convention
/// is already absorbed into Omega.
inline std::vector<double> physicality_check(const GaussianState& state) {
  const CMatrix m = omega_matrix(state.n_modes()).cast<cplx>() * state.sigma();
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  std::vector<double> mags;
  mags.reserve(static_cast<size_t>(state.dim()));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mags.begin(), mags.end());
  std::vector<double> out;
  for (size_t i = 0; i + 1 < mags.size(); i += 2) out.push_back(0.5 * (mags[i] + mags[i + 1]));
  return out;
}

inline bool is_physical(const GaussianState& state) {
  const auto nu = physicality_check(state);
  return std::all_of(nu.begin(), nu.end(), [](double v) { return v >= 0.5 - kPhysicalityTol; });
}

}  // namespace thermoptic
