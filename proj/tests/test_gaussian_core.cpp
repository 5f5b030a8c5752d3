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


#include <catch2/catch_amalgamated.hpp>

#include "thermoptic/thermoptic.hpp"

using namespace thermoptic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("symplectic form squares to minus identity", "[gaussian-core]") {
  for (int n : {1, 2, 4}) {
    const RMatrix w = omega_matrix(n);
    CHECK((w * w + RMatrix::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((w.transpose() + w).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(omega_matrix(1)(0, 1) == 1.0);
  CHECK(omega_matrix(1)(1, 0) == -1.0);
}

TEST_CASE("thermal spectral covariance", "[gaussian-core]") {
  const auto vac = thermal_spectral_covariance(0.0);
  CHECK(vac.sigma()(0, 1) == cplx(0.5));
  CHECK(vac.sigma()(0, 0) == cplx(0.0));
  CHECK(thermal_spectral_covariance(1.0).sigma()(1, 0) == cplx(1.5));

  // Independent route: eigenvalues of i Omega Sigma in the quadrature picture
  // are +-(n + 1/2); here |eig(Omega Sigma)|.
  const auto s = thermal_spectral_covariance(0.25);
  Eigen::ComplexEigenSolver<CMatrix> es(CMatrix(omega_matrix(1).cast<cplx>() * s.sigma()));
  CHECK_THAT(std::abs(es.eigenvalues()(0)), WithinAbs(0.75, 1e-14));
  CHECK_THAT(physicality_check(s)[0], WithinAbs(0.75, 1e-14));

  CHECK_THROWS_AS(thermal_spectral_covariance(-0.1), DomainError);
  CHECK_THROWS_AS(thermal_spectral_covariance(std::nan("")), DomainError);
  CHECK_THROWS_AS(thermal_spectral_covariance(INFINITY), DomainError);
}

TEST_CASE("gaussian state rejects bad input", "[gaussian-core]") {
  CMatrix s = thermal_spectral_covariance(0.1).sigma();
  CVector mu = CVector::Zero(2);
  mu(0) = 1e-3;
  CHECK_THROWS_AS(GaussianState(1, s, mu), DomainError);
  CMatrix asym = s;
  asym(0, 1) += 0.1;
  CHECK_THROWS_AS(GaussianState(1, asym), DomainError);
  CHECK_THROWS_AS(GaussianState(2, s), DomainError);
  CHECK_THROWS_AS(GaussianState(0, CMatrix()), DomainError);
}

TEST_CASE("two spatial covariance structure", "[gaussian-core]") {
  const SpatialParams p(0.01, 0.5, kPi / 3.0);
  const auto st = two_spatial_covariance(p);
  const CMatrix& s = st.sigma();
  CHECK(s(0, 1) == cplx(0.51));
  CHECK(s(2, 3) == cplx(0.51));
  // entry (a_i, a_j^dag) is the conjugate of (a_j, a_i^dag)
  CHECK(std::abs(s(0, 3) - std::conj(s(2, 1))) == 0.0);
  CHECK(std::abs(s(0, 3) - 0.005 * std::polar(1.0, -kPi / 3.0)) < 1e-17);

  SECTION("uncorrelated limit is a direct sum") {
    const auto a = two_spatial_covariance(SpatialParams(0.3, 0.0, 1.1));
    const auto b = direct_sum({thermal_spectral_covariance(0.3), thermal_spectral_covariance(0.3)});
    CHECK((a.sigma() - b.sigma()).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("n = 0 is the vacuum whatever the coherence") {
    const auto a = two_spatial_covariance(SpatialParams(0.0, 0.9, 2.0));
    const auto b = direct_sum({thermal_spectral_covariance(0.0), thermal_spectral_covariance(0.0)});
    CHECK((a.sigma() - b.sigma()).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("equals U(phi) applied to the diagonal thermal state") {
    const auto diag = direct_sum({thermal_spectral_covariance(0.005), thermal_spectral_covariance(0.015)});
    const auto rotated = apply_mode_unitary(diag, u_phase_bs(kPi / 3.0));
    CHECK((rotated.sigma() - s).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("symplectic eigenvalues are x_i + 1/2") {
    const auto nu = physicality_check(two_spatial_covariance(SpatialParams(0.01, 0.5, 0.0)));
    REQUIRE(nu.size() == 2);
    CHECK_THAT(nu[0], WithinAbs(0.505, 1e-12));
    CHECK_THAT(nu[1], WithinAbs(0.515, 1e-12));
  }
  SECTION("2 pi periodic in phi") {
    const auto a = two_spatial_covariance(SpatialParams(0.02, 0.7, 0.4));
    const auto b = two_spatial_covariance(SpatialParams(0.02, 0.7, 0.4 + kTwoPi));
    CHECK((a.sigma() - b.sigma()).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS_AS(SpatialParams(0.01, 1.2, 0.0), DomainError);
  CHECK_THROWS_AS(SpatialParams(0.01, -0.1, 0.0), DomainError);
  CHECK_THROWS_AS(SpatialParams(-0.01, 0.5, 0.0), DomainError);
}

TEST_CASE("phase is normalized into [0, 2 pi)", "[gaussian-core]") {
  CHECK_THAT(SpatialParams(0.1, 0.5, -kPi / 2.0).phi, WithinAbs(1.5 * kPi, 1e-15));
  CHECK(SpatialParams(0.1, 0.5, kTwoPi).phi == 0.0);
}

TEST_CASE("mode unitaries", "[gaussian-core]") {
  auto rng = make_rng(11, 0);
  const auto diag = direct_sum({thermal_spectral_covariance(0.2), thermal_spectral_covariance(0.05)});
  const CMatrix u1 = detail::random_unitary(rng, 2), u2 = detail::random_unitary(rng, 2);

  CHECK((apply_mode_unitary(diag, CMatrix::Identity(2, 2)).sigma() - diag.sigma()).cwiseAbs().maxCoeff() == 0.0);

  const auto seq = apply_mode_unitary(apply_mode_unitary(diag, u1), u2);
  const auto once = apply_mode_unitary(diag, CMatrix(u2 * u1));
  CHECK((seq.sigma() - once.sigma()).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THAT(seq.total_photon_number(), WithinAbs(0.25, 1e-14));
  CHECK(is_physical(seq));

  CMatrix bad = u1;
  bad(0, 0) *= 1.01;
  CHECK_THROWS_AS(apply_mode_unitary(diag, bad), DomainError);
  CHECK_THROWS_AS(apply_mode_unitary(diag, CMatrix::Identity(3, 3)), DomainError);

  Eigen::Matrix2cd nu;
  nu << 1.0, 0.1, 0.0, 1.0;
  CHECK_THROWS_AS(TwoModeUnitary(nu), DomainError);
}

TEST_CASE("physicality flags sub-vacuum covariances", "[gaussian-core]") {
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 1) = s(1, 0) = 0.4;
  CHECK_FALSE(is_physical(GaussianState(1, s)));
  CHECK(physicality_check(thermal_spectral_covariance(0.0))[0] == 0.5);
  CHECK_THAT(physicality_check(thermal_spectral_covariance(1.0))[0], WithinAbs(1.5, 1e-14));
}

TEST_CASE("fock basis enumeration", "[gaussian-core]") {
  const FockBasis b(2, FockCutoff(1));
  REQUIRE(b.size() == 3);
  CHECK(b.state(0) == FockBasis::Occupation{0, 0});
  CHECK(b.state(1) == FockBasis::Occupation{0, 1});
  CHECK(b.state(2) == FockBasis::Occupation{1, 0});
  CHECK(FockBasis(3, FockCutoff(4)).size() == 35);
  CHECK_FALSE(b.index_of({1, 1}).has_value());
  CHECK_THROWS_AS(FockCutoff(-1), DomainError);
}

TEST_CASE("passive lift is unitary on each photon-number sector", "[gaussian-core]") {
  auto rng = make_rng(3, 1);
  const FockBasis basis(2, FockCutoff(6));
  const CMatrix v = lift_passive_unitary(detail::random_unitary(rng, 2), basis);
  CHECK((v * v.adjoint() - CMatrix::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
      if (FockBasis::total(basis.state(i)) != FockBasis::total(basis.state(j))) CHECK(v(i, j) == cplx(0.0));
    }
  }
}
