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

namespace {

// Spatial QFI at (0.01, 0.5, pi/4) from a NumPy Fock-space evaluation
// (N_max = 12, spectral formula, central differences).
constexpr double kGoldenI11 = 197.5344950091;
constexpr double kGoldenI12 = -9.803200722853e-03;
constexpr double kGoldenI22 = 2.646864201189e-02;
constexpr double kGoldenI33 = 4.962779155997e-03;

CMatrix dft4() {
  CMatrix u(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) u(i, j) = std::polar(0.5, kTwoPi * i * j / 4.0);
  }
  return u;
}

}  // namespace

TEST_CASE("single thermal mode QFI is 1/(n + n^2)", "[gaussian-fisher]") {
  for (double n : {0.01, 0.3, 1.0, 7.0}) {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 1) = d(1, 0) = 1.0;
    const auto iq = qfi_gaussian(thermal_spectral_covariance(n), {d});
    CHECK(iq.kind() == FisherKind::quantum);
    CHECK_THAT(iq(0, 0), WithinRel(1.0 / (n + n * n), 1e-12));
  }
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  CHECK_THAT(qfi_gaussian(thermal_spectral_covariance(1.0), {d})(0, 0), WithinAbs(0.5, 1e-14));
}

TEST_CASE("pure states are rejected with the offending eigenvalue", "[gaussian-fisher]") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  try {
    (void)qfi_gaussian(thermal_spectral_covariance(0.0), {d});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("symplectic eigenvalue"));
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("0.5"));
  }
  CHECK_THROWS_AS(qfi_gaussian(thermal_spectral_covariance(0.2), {CMatrix::Zero(4, 4)}), DomainError);
}

TEST_CASE("pair flattening is row-major", "[gaussian-fisher]") {
  CMatrix m(4, 4);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) m(a, b) = cplx(10 * a + b, a - b);
  }
  const CVector v = detail::flatten(m);
  CHECK(v(2 * 4 + 3) == m(2, 3));
  CHECK(v(3 * 4 + 1) == m(3, 1));
  CHECK((detail::unflatten(v, 4) - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("four-mode golden: mixed thermal occupations", "[gaussian-fisher]") {
  // Occupations n_k of a diagonal thermal state, scrambled by a 4x4 DFT. The
  // QFI for (n_1..n_4) is diag(1/(n_k + n_k^2)) whatever the passive unitary.
  const std::vector<double> n{0.02, 0.3, 1.5, 0.07};
  std::vector<GaussianState> modes;
  for (double v : n) modes.push_back(thermal_spectral_covariance(v));
  const CMatrix w = ladder_transform(dft4());
  const auto state = apply_mode_unitary(direct_sum(modes), dft4());
  ParamDerivatives d;
  for (int k = 0; k < 4; ++k) {
    CMatrix s = CMatrix::Zero(8, 8);
    s(2 * k, 2 * k + 1) = s(2 * k + 1, 2 * k) = 1.0;
    d.push_back(w * s * w.transpose());
  }
  const auto iq = qfi_gaussian(state, d);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double expect = i == j ? 1.0 / (n[i] + n[i] * n[i]) : 0.0;
      CHECK_THAT(iq(i, j), WithinAbs(expect, 1e-10 * std::max(1.0, expect)));
    }
  }
}

TEST_CASE("QFI is additive over independent modes", "[gaussian-fisher]") {
  const BlackbodyScene scene(1e4, 1e-32);
  const std::vector<double> nu{1e14, 5e14, 1.2e15};
  RMatrix sum = RMatrix::Zero(2, 2);
  for (double v : nu) sum += spectral_qfi(v, scene).matrix();
  const auto direct = qfi_gaussian(spectral_state(nu, scene), spectral_state_derivatives(nu, scene));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK_THAT(direct(i, j), WithinRel(sum(i, j), 1e-10));
  }
}

TEST_CASE("spatial QFI", "[gaussian-fisher]") {
  const auto iq = qfi_spatial(SpatialParams(0.01, 0.5, kPi / 4.0));
  CHECK_THAT(iq(0, 0), WithinRel(kGoldenI11, 1e-8));
  CHECK_THAT(iq(0, 1), WithinRel(kGoldenI12, 1e-6));
  CHECK_THAT(iq(1, 1), WithinRel(kGoldenI22, 1e-8));
  CHECK_THAT(iq(2, 2), WithinRel(kGoldenI33, 1e-8));
  CHECK(std::abs(iq(0, 2)) < 1e-10);
  CHECK(std::abs(iq(1, 2)) < 1e-10);

  CHECK(qfi_spatial(SpatialParams(0.01, 0.0, 1.0))(2, 2) == 0.0);

  SECTION("zero pattern at random parameters") {
    auto rng = make_rng(21, 0);
    for (int k = 0; k < 20; ++k) {
      const auto p = detail::random_spatial(rng);
      const auto m = qfi_spatial(p);
      CHECK(std::abs(m(0, 2)) < 1e-10 * m.matrix().cwiseAbs().maxCoeff());
      CHECK(std::abs(m(1, 2)) < 1e-10 * m.matrix().cwiseAbs().maxCoeff());
    }
  }
  SECTION("phase covariance") {
    const auto ref = qfi_spatial(SpatialParams(0.03, 0.6, 0.0)).matrix();
    for (double phi : {kPi / 3.0, kPi, 1.5 * kPi}) {
      CHECK((qfi_spatial(SpatialParams(0.03, 0.6, phi)).matrix() - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SECTION("agrees with the Fock eigendecomposition oracle") {
    const SpatialParams p(0.01, 0.5, kPi / 4.0);
    const FockBasis basis(2, tail_rule(p));
    const auto oracle = density_matrix_qfi(spatial_density_matrix(p, basis), detail::fock_density_derivatives(p, basis));
    CHECK(detail::normalized_difference(iq.matrix(), oracle.matrix()) < 1e-4);
  }
}

TEST_CASE("single-mode SLD coefficients", "[gaussian-fisher]") {
  const double n = 0.4;
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 1) = d(1, 0) = 1.0;
  const auto l = sld_gaussian(thermal_spectral_covariance(n), d);
  CHECK(l.is_hermitian());
  CHECK_THAT(l.hop_coefficient(0, 0).real(), WithinRel(1.0 / (n + n * n), 1e-12));
  CHECK_THAT(l.normal_ordered_constant().real(), WithinRel(-n / (n + n * n), 1e-12));
  CHECK(std::abs(qo_expectation(l, thermal_spectral_covariance(n))) < 1e-14);
}

TEST_CASE("SLD defining equation in the Fock basis", "[gaussian-fisher]") {
  const SpatialParams p(0.01, 0.5, kPi / 4.0);
  const FockBasis basis(2, tail_rule(p));
  const CMatrix rho = spatial_density_matrix(p, basis);
  const auto drho = detail::fock_density_derivatives(p, basis);
  for (int j = 0; j < 3; ++j) {
    const CMatrix l = qo_fock_matrix(sld_spatial(j, p), basis);
    CHECK((drho[static_cast<size_t>(j)] - 0.5 * (rho * l + l * rho)).norm() < 1e-6);
  }
}

TEST_CASE("classical Fisher information", "[gaussian-fisher]") {
  SECTION("Bernoulli") {
    for (double t : {0.5, 0.2, 0.9}) {
      const std::vector<double> probs{t, 1.0 - t};
      RMatrix g(2, 1);
      g << 1.0, -1.0;
      const auto ic = classical_fisher(probs, g);
      CHECK(ic.kind() == FisherKind::classical);
      CHECK_THAT(ic(0, 0), WithinRel(1.0 / (t * (1.0 - t)), 1e-14));
    }
    RMatrix g(2, 1);
    g << 1.0, -1.0;
    CHECK(classical_fisher(std::vector<double>{0.5, 0.5}, g)(0, 0) == 4.0);
  }
  SECTION("geometric counts on one thermal mode reach the QFI") {
    const double n = 0.05;
    const int nmax = 40;
    std::vector<double> probs;
    RMatrix g(nmax + 1, 1);
    for (int k = 0; k <= nmax; ++k) {
      probs.push_back(detail::geometric(n, k));
      g(k, 0) = detail::geometric_dx(n, k);
    }
    CHECK_THAT(classical_fisher(probs, g)(0, 0), WithinRel(1.0 / (n + n * n), 1e-12));
  }
  SECTION("negative probabilities and the floor") {
    RMatrix g(2, 1);
    g << 1.0, -1.0;
    CHECK_THROWS_AS(classical_fisher(std::vector<double>{1.0, -1e-6}, g), DataError);
    CHECK_NOTHROW(classical_fisher(std::vector<double>{1.0, -1e-13}, g));
    CHECK(classical_fisher(std::vector<double>{1.0, 1e-31}, g)(0, 0) == 1.0);
    CHECK_THROWS_AS(classical_fisher(std::vector<double>{1.0}, g), DataError);
  }
  SECTION("direct counting carries no phase information") {
    const auto ic = count_fisher(CountingScheme::direct(), SpatialParams(0.01, 0.5, kPi / 4.0));
    CHECK(ic.matrix().row(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ic.matrix().col(2).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("FisherMatrix validation", "[gaussian-fisher]") {
  RMatrix a(2, 2);
  a << 1.0, 0.5, 0.4, 1.0;
  CHECK_THROWS_AS(FisherMatrix(a, FisherKind::classical), NumericalError);
  RMatrix b(2, 2);
  b << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(FisherMatrix(b, FisherKind::classical), NumericalError);
  CHECK_THROWS_AS(FisherMatrix(RMatrix(2, 3), FisherKind::classical), DomainError);
}

TEST_CASE("cost functional", "[gaussian-fisher]") {
  const auto iq = qfi_spatial(SpatialParams(0.01, 0.5, kPi / 4.0));
  CHECK_THAT(cost(iq, iq), WithinAbs(3.0, 1e-12));

  const auto [ic2, ic3] = idealized_x_fisher(iq);
  CHECK(std::isinf(cost(iq, ic2)));
  const FisherMatrix half(0.5 * (ic2.matrix() + ic3.matrix()), FisherKind::classical);
  CHECK_THAT(cost(iq, half), WithinAbs(5.0, 1e-9));

  SECTION("reparameterization invariance") {
    auto rng = make_rng(31, 0);
    const auto ic = count_fisher(CountingScheme::fourier(), SpatialParams(0.01, 0.5, kPi / 4.0));
    for (int k = 0; k < 10; ++k) {
      RMatrix j(3, 3);
      for (Eigen::Index r = 0; r < 9; ++r) j(r / 3, r % 3) = 2.0 * uniform01(rng) - 1.0;
      j += 2.0 * RMatrix::Identity(3, 3);
      const FisherMatrix jq(j.transpose() * iq.matrix() * j, FisherKind::quantum);
      const FisherMatrix jc(j.transpose() * ic.matrix() * j, FisherKind::classical);
      CHECK_THAT(cost(jq, jc), WithinRel(cost(iq, ic), 1e-8));
    }
  }
}

TEST_CASE("Cramer-Rao bound", "[gaussian-fisher]") {
  RMatrix d = RMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  CHECK_THAT(crb_bound(FisherMatrix(d, FisherKind::quantum), RMatrix::Identity(2, 2)).value, WithinAbs(0.75, 1e-15));

  const BlackbodyScene scene(1e4, 1e-32);
  const auto single = crb_bound(spectral_qfi(5e14, scene), RMatrix::Identity(2, 2));
  CHECK(std::isinf(single.value));
  REQUIRE(single.null_direction.has_value());
  // the null direction is orthogonal to the gradient of <n>
  const auto mode = spectral_mode(5e14, scene);
  const RVector grad = (RVector(2) << mode.dn_dT, mode.dn_dkappa).finished();
  CHECK(std::abs(grad.normalized().dot(*single.null_direction)) < 1e-8);

  RMatrix neg = RMatrix::Identity(2, 2);
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(crb_bound(FisherMatrix(d, FisherKind::quantum), neg), DomainError);
  RMatrix asym = RMatrix::Identity(2, 2);
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(crb_bound(FisherMatrix(d, FisherKind::quantum), asym), DomainError);

  SECTION("two-frequency T variance equals the map entry") {
    const std::vector<double> nu{1.2e14, 1.1e15};
    const auto v = crb_bound(multimode_qfi(nu, scene), RMatrix(RVector::Unit(2, 0) * RVector::Unit(2, 0).transpose()));
    CHECK(std::isfinite(v.value));
    CHECK_THAT(v.value, WithinRel(variance_bound_cofactor(nu, scene, 0), 1e-8));
  }
}

TEST_CASE("classical information never exceeds the QFI", "[gaussian-fisher]") {
  auto rng = make_rng(41, 0);
  for (int k = 0; k < 10; ++k) {
    const auto p = detail::random_spatial(rng);
    const RMatrix iq = qfi_spatial(p).matrix();
    const double psi = kTwoPi * uniform01(rng);
    std::vector<RMatrix> ics{count_fisher(CountingScheme::direct(), p).matrix(),
                             count_fisher(CountingScheme::fourier(), p).matrix(),
                             count_fisher(CountingScheme::beam_splitter(psi), p).matrix(),
                             measurement_fisher_x(XMeasurement::x2, p).ic.matrix(),
                             measurement_fisher_x(XMeasurement::x3, p).ic.matrix(),
                             weighted_scheme(p, false).ic_mixture.matrix()};
    for (const auto& ic : ics) {
      const auto [ie, s] = FisherMatrix::equilibrated(iq);
      const RMatrix diff = s.asDiagonal() * (ic - iq) * s.asDiagonal();
      CHECK(Eigen::SelfAdjointEigenSolver<RMatrix>(diff, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff() <= 1e-8);
    }
  }
}
