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
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include "thermoptic/common.hpp"

namespace thermoptic {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
  int max_evaluations = 10000;
  /// Converged when the simplex characteristic size drops below this.
  double size_tol = 1e-9;
  /// ... or when the best value stalls to this relative change over a window.
  double rel_ftol = 1e-10;
  int stall_window = 200;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

struct GslObjective {
  const Objective* f;
  int* count;
  std::vector<double> scratch;
};

inline double gsl_trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<GslObjective*>(params);
  for (size_t i = 0; i < v->size; ++i) ctx->scratch[i] = gsl_vector_get(v, i);
  ++*ctx->count;
  const double y = (*ctx->f)(ctx->scratch);
  return std::isfinite(y) ? y : std::numeric_limits<double>::max() / 4;
}

inline void quiet_gsl() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

}  // namespace detail

/// Nelder-Mead (GSL nmsimplex2). Non-finite objective values are treated as a
/// very large penalty so the simplex walks away from them.
inline NelderMeadResult nelder_mead(const Objective& f, const std::vector<double>& x0, const std::vector<double>& step,
                                    const NelderMeadOptions& opt = {}) {
  detail::quiet_gsl();
  if (x0.empty() || step.size() != x0.size()) throw DomainError("nelder_mead: bad starting point or step vector");
  const size_t n = x0.size();
  int count = 0;
  detail::GslObjective ctx{&f, &count, std::vector<double>(n)};
  gsl_multimin_function fn{&detail::gsl_trampoline, n, &ctx};

  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0[i]);
    gsl_vector_set(ss, i, step[i]);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);

  NelderMeadResult out;
  double last_best = s->fval;
  int last_improve = count;
  while (count < opt.max_evaluations) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.size_tol) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
    if (std::abs(s->fval - last_best) > opt.rel_ftol * std::max(1.0, std::abs(s->fval))) {
      last_best = s->fval;
      last_improve = count;
    } else if (count - last_improve > opt.stall_window) {
      out.converged = true;
      break;
    }
  }
  out.x.resize(n);
  for (size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(s->x, i);
  out.value = s->fval;
  out.evaluations = count;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return out;
}

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
};

/// Minimizes a unimodal function on (lo, hi) by golden-section search. The
/// bracket is located with a uniform scan of `scan` interior points first.
inline ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-8,
                                    int scan = 32) {
  detail::quiet_gsl();
  if (!(lo < hi) || scan < 3) throw DomainError("golden_section: empty interval");
  std::vector<double> xs(static_cast<size_t>(scan)), fs(static_cast<size_t>(scan));
  for (int i = 0; i < scan; ++i) {
    xs[static_cast<size_t>(i)] = lo + (hi - lo) * (i + 1.0) / (scan + 1.0);
    fs[static_cast<size_t>(i)] = f(xs[static_cast<size_t>(i)]);
  }
  const auto best = static_cast<size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  double a = best == 0 ? lo : xs[best - 1];
  double b = best + 1 == xs.size() ? hi : xs[best + 1];
  double m = xs[best];
  double fm = fs[best];
  double fa = best == 0 ? f(a) : fs[best - 1];
  double fb = best + 1 == xs.size() ? f(b) : fs[best + 1];
  // A tie with a neighbour (symmetric objectives) puts the minimum between
  // the two samples; shrink onto that pair.
  if (fb == fm) {
    a = m;
    fa = fm;
    m = 0.5 * (m + b);
    fm = f(m);
  } else if (fa == fm) {
    b = m;
    fb = fm;
    m = 0.5 * (a + m);
    fm = f(m);
  }
  if (!(fm < fa && fm < fb)) {
    // no interior bracket: monotone towards an end point, or flat
    if (fa < fm) return {a, fa};
    if (fb < fm) return {b, fb};
    return {m, fm};
  }

  gsl_function fn{[](double v, void* p) { return (*static_cast<const std::function<double(double)>*>(p))(v); },
                  const_cast<std::function<double(double)>*>(&f)};
  gsl_min_fminimizer* s = gsl_min_fminimizer_alloc(gsl_min_fminimizer_goldensection);
  gsl_min_fminimizer_set_with_values(s, &fn, m, fm, a, fa, b, fb);
  for (int it = 0; it < 500; ++it) {
    if (gsl_min_fminimizer_iterate(s) != GSL_SUCCESS) break;
    const double l = gsl_min_fminimizer_x_lower(s);
    const double u = gsl_min_fminimizer_x_upper(s);
    if (gsl_min_test_interval(l, u, tol, 0.0) == GSL_SUCCESS) break;
  }
  ScalarMinimum out{gsl_min_fminimizer_x_minimum(s), gsl_min_fminimizer_f_minimum(s)};
  gsl_min_fminimizer_free(s);
  return out;
}

}  // namespace thermoptic
