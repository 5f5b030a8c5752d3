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

#include <atomic>

#include "thermoptic/thermoptic.hpp"

using namespace thermoptic;
using Catch::Matchers::WithinAbs;

TEST_CASE("Nelder-Mead on Rosenbrock", "[numerics]") {
  const Objective rosen = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  NelderMeadOptions opt;
  opt.max_evaluations = 20000;
  opt.size_tol = 1e-10;
  const auto r = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, opt);
  CHECK(r.converged);
  CHECK_THAT(r.x[0], WithinAbs(1.0, 1e-6));
  CHECK_THAT(r.x[1], WithinAbs(1.0, 1e-6));
  CHECK_THROWS_AS(nelder_mead(rosen, {}, {}), DomainError);

  SECTION("non-finite values are walked away from") {
    const Objective guarded = [](const std::vector<double>& x) {
      return x[0] < 0.0 ? std::numeric_limits<double>::quiet_NaN() : (x[0] - 2.0) * (x[0] - 2.0);
    };
    const auto g = nelder_mead(guarded, {0.5}, {1.0});
    CHECK_THAT(g.x[0], WithinAbs(2.0, 1e-4));
  }
}

TEST_CASE("golden section", "[numerics]") {
  const auto r = golden_section([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0);
  CHECK_THAT(r.x, WithinAbs(0.3, 1e-7));
  SECTION("symmetric objective with tied samples") {
    // minimum at the midpoint, sampled points straddle it symmetrically
    const auto t = golden_section([](double x) { return std::abs(x - 0.5); }, 0.0, 1.0, 1e-10, 32);
    CHECK_THAT(t.x, WithinAbs(0.5, 1e-8));
  }
  SECTION("minimum on the boundary") {
    const auto b = golden_section([](double x) { return x; }, 0.0, 1.0);
    CHECK(b.x < 1e-6);
  }
  CHECK_THROWS_AS(golden_section([](double x) { return x; }, 1.0, 0.0), DomainError);
}

TEST_CASE("seeded streams", "[numerics]") {
  auto a = make_rng(3, 4);
  auto b = make_rng(3, 4);
  auto c = make_rng(3, 5);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("parallel_for", "[numerics]") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), [&](size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](size_t i) {
                    if (i == 7) throw NumericalError("boom");
                  }),
                  NumericalError);
  CHECK(thread_count() >= 1);
}

TEST_CASE("self-check suite", "[numerics]") {
  const auto checks = run_verify(VerifySuite::core, {});
  REQUIRE_FALSE(checks.empty());
  CHECK(all_passed(checks));
  VerifyOptions strict;
  strict.tolerance_scale = 1e-30;
  CHECK_FALSE(all_passed(run_verify(VerifySuite::core, strict)));
}
