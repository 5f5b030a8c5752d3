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

namespace {

QuadraticObservable random_observable(std::mt19937_64& rng, int modes) {
  const int d = 2 * modes;
  CMatrix c(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) c(i, j) = cplx(2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0);
  }
  return QuadraticObservable(modes, cplx(uniform01(rng), uniform01(rng)), c);
}

}  // namespace

TEST_CASE("commutator of disjoint number operators vanishes", "[quadratic-observables]") {
  const auto c = qo_commutator(QuadraticObservable::number(2, 0), QuadraticObservable::number(2, 1));
  CHECK(c.max_abs_coefficient() == 0.0);
}

TEST_CASE("ladder algebra reproduces [a^dag a, a^dag] = a^dag-like hopping", "[quadratic-observables]") {
  // [a1^dag a2, a2^dag a1] = n1 - n2
  const auto c = qo_commutator(QuadraticObservable::hop(2, 0, 1), QuadraticObservable::hop(2, 1, 0));
  const auto expect = QuadraticObservable::number(2, 0) - QuadraticObservable::number(2, 1);
  CHECK(c.distance(expect) < 1e-15);
}

TEST_CASE("commutator antisymmetry and Jacobi identity", "[quadratic-observables]") {
  auto rng = make_rng(5, 0);
  for (int k = 0; k < 20; ++k) {
    const auto a = random_observable(rng, 2), b = random_observable(rng, 2), c = random_observable(rng, 2);
    CHECK((qo_commutator(a, b) + qo_commutator(b, a)).max_abs_coefficient() < 1e-12);
    const auto jacobi = qo_commutator(a, qo_commutator(b, c)) + qo_commutator(b, qo_commutator(c, a)) +
                        qo_commutator(c, qo_commutator(a, b));
    CHECK(jacobi.max_abs_coefficient() < 1e-10);
  }
}

TEST_CASE("commutator agrees with the Fock realization", "[quadratic-observables]") {
  auto rng = make_rng(6, 0);
  const FockBasis basis(2, FockCutoff(6));
  // number-conserving pieces so that truncation is exact
  auto conserving = [&](const QuadraticObservable& o) {
    CMatrix c = o.coefficients();
    for (Eigen::Index i = 0; i < 4; ++i) {
      for (Eigen::Index j = 0; j < 4; ++j) {
        if (i % 2 == j % 2) c(i, j) = 0.0;
      }
    }
    return QuadraticObservable(2, o.c0(), c);
  };
  const auto a = conserving(random_observable(rng, 2)), b = conserving(random_observable(rng, 2));
  CHECK(a.number_conserving());
  const CMatrix fa = qo_fock_matrix(a, basis), fb = qo_fock_matrix(b, basis);
  CHECK((qo_fock_matrix(qo_commutator(a, b), basis) - (fa * fb - fb * fa)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mode-count mismatch is a domain error", "[quadratic-observables]") {
  CHECK_THROWS_AS(qo_commutator(QuadraticObservable::zero(1), QuadraticObservable::zero(2)), DomainError);
  CHECK_THROWS_AS(qo_expectation(QuadraticObservable::zero(1), two_spatial_covariance(SpatialParams(0.1, 0.2, 0.0))),
                  DomainError);
}

TEST_CASE("expectations", "[quadratic-observables]") {
  CHECK_THAT(qo_expectation(QuadraticObservable::number(1, 0), thermal_spectral_covariance(0.3)).real(),
             WithinAbs(0.3, 1e-15));
  CHECK(qo_expectation(QuadraticObservable::identity(2), two_spatial_covariance(SpatialParams(0.1, 0.3, 1.0))) ==
        cplx(1.0));

  SECTION("<a2^dag a1> = n |gamma| e^{-i phi}, fixed against the Fock oracle") {
    const SpatialParams p(0.01, 0.5, kPi / 3.0);
    const auto obs = QuadraticObservable::hop(2, 1, 0);
    const cplx wick = qo_expectation(obs, two_spatial_covariance(p));
    CHECK(std::abs(wick - 0.005 * std::polar(1.0, -kPi / 3.0)) < 1e-15);
    const FockBasis basis(2, tail_rule(p));
    const cplx fock = (spatial_density_matrix(p, basis) * qo_fock_matrix(obs, basis)).trace();
    CHECK(std::abs(wick - fock) < 1e-12);
  }
}

TEST_CASE("Wick expectations match Fock traces on random states", "[quadratic-observables]") {
  auto rng = make_rng(7, 0);
  for (int k = 0; k < 10; ++k) {
    const DiagThermalParams x{0.05 * uniform01(rng), 0.05 * uniform01(rng)};
    const CMatrix u = detail::random_unitary(rng, 2);
    const auto state = apply_mode_unitary(direct_sum({thermal_spectral_covariance(x.x1), thermal_spectral_covariance(x.x2)}), u);
    const FockBasis basis(2, tail_rule(x));
    const CMatrix v = lift_passive_unitary(u, basis);
    const CMatrix rho = v * thermal_density_matrix(x, basis) * v.adjoint();
    const auto a = random_observable(rng, 2), b = random_observable(rng, 2);
    const auto ha = a + a.adjoint(), hb = b + b.adjoint();
    CHECK(std::abs(qo_expectation(ha, state) - (rho * qo_fock_matrix(ha, basis)).trace()) < 1e-8);
    // products only for number-conserving factors, which the truncation keeps exact
    const cplx q(uniform01(rng), uniform01(rng));
    const auto na = q * QuadraticObservable::hop(2, 0, 1) + std::conj(q) * QuadraticObservable::hop(2, 1, 0);
    const auto nb = QuadraticObservable::total_number(2);
    const CMatrix fa = qo_fock_matrix(na, basis), fb = qo_fock_matrix(nb, basis);
    CHECK(std::abs(qo_product_expectation(na, nb, state) - (rho * fa * fb).trace()) < 1e-8);
  }
}

TEST_CASE("Fock matrices of simple observables", "[quadratic-observables]") {
  const FockBasis basis(2, FockCutoff(1));
  const CMatrix ntot = qo_fock_matrix(QuadraticObservable::total_number(2), FockCutoff(1));
  CMatrix expected = CMatrix::Zero(3, 3);
  expected(1, 1) = expected(2, 2) = 1.0;
  CHECK((ntot - expected).cwiseAbs().maxCoeff() < 1e-15);

  const CMatrix hop = qo_fock_matrix(QuadraticObservable::hop(2, 0, 1), basis);
  // a1^dag a2 |0,1> = |1,0>
  CHECK(hop(2, 1) == cplx(1.0));
  CHECK(hop.cwiseAbs().sum() == 1.0);

  SECTION("phase SLD is Hermitian and traceless on the one-photon sector") {
    const SpatialParams p(0.01, 0.5, 0.0);
    const auto l = sld_spatial(kParamPhi, p);
    CHECK(l.is_hermitian());
    const CMatrix f = qo_fock_matrix(l, FockCutoff(3));
    CHECK((f - f.adjoint()).norm() < 1e-10);
    const FockBasis b3(2, FockCutoff(3));
    cplx trace1 = 0.0;
    for (Eigen::Index i = 0; i < b3.size(); ++i) {
      if (FockBasis::total(b3.state(i)) == 1) trace1 += f(i, i);
    }
    CHECK(std::abs(trace1) < 1e-12);
  }
}

TEST_CASE("non-number-conserving terms are flagged", "[quadratic-observables]") {
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 0) = 1.0;  // a a
  const QuadraticObservable squeeze(1, 0.0, c);
  CHECK_FALSE(squeeze.number_conserving());
  CHECK(QuadraticObservable::number(1, 0).number_conserving());
}

TEST_CASE("antisymmetric input folds into the constant", "[quadratic-observables]") {
  // a a^dag = a^dag a + 1
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 1) = 1.0;
  const QuadraticObservable aad(1, 0.0, c);
  CHECK(aad.distance(QuadraticObservable::number(1, 0) + QuadraticObservable::identity(1)) < 1e-15);
}

TEST_CASE("SLD commutators and their expectations", "[quadratic-observables]") {
  const SpatialParams p(0.01, 0.5, kPi / 4.0);
  const auto state = two_spatial_covariance(p);
  const std::array<QuadraticObservable, 3> l{sld_spatial(0, p), sld_spatial(1, p), sld_spatial(2, p)};
  CHECK(qo_commutator(l[0], l[1]).max_abs_coefficient() < 1e-10);
  const FockBasis basis(2, tail_rule(p));
  const CMatrix rho = spatial_density_matrix(p, basis);
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      const auto c = qo_commutator(l[i], l[j]);
      CHECK(std::abs(qo_expectation(c, state)) < 1e-8);
      const CMatrix fi = qo_fock_matrix(l[i], basis), fj = qo_fock_matrix(l[j], basis);
      CHECK(std::abs((rho * (fi * fj - fj * fi)).trace()) < 1e-8);
    }
  }
}
