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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "thermoptic/fisher.hpp"
#include "thermoptic/parallel.hpp"
#include "thermoptic/photon_counting.hpp"
#include "thermoptic/rng.hpp"
#include "thermoptic/spatial.hpp"

namespace thermoptic {

/// Cost of photon counting after the Fourier transform U(0).
inline double ft_scheme_cost(const SpatialParams& params) {
  return cost(qfi_spatial(params), count_fisher(CountingScheme::fourier(), params));
}

struct RandomPhaseResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> trials;
};

namespace detail {

/// One trial: n_phases beam-splitter phases drawn uniformly on [0, 2 pi) from
/// stream (seed, trial), equal-weight mixture of their count Fisher matrices.
inline double random_phase_trial(const SpatialParams& params, const FisherMatrix& iq, FockCutoff cutoff, int n_phases,
                                 std::uint64_t seed, std::uint64_t trial) {
  auto rng = make_rng(seed, trial);
  RMatrix sum = RMatrix::Zero(3, 3);
  for (int r = 0; r < n_phases; ++r) {
    sum += count_fisher(CountingScheme::beam_splitter(kTwoPi * uniform01(rng)), params, cutoff).matrix();
  }
  return trace_with_inverse(iq.matrix(), sum / n_phases).value;
}

inline void summarize(RandomPhaseResult& r) {
  const auto n = static_cast<double>(r.trials.size());
  double s = 0.0;
  for (double v : r.trials) s += v;
  r.mean = s / n;
  double var = 0.0;
  for (double v : r.trials) var += (v - r.mean) * (v - r.mean);
  r.std_error = r.trials.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
}

}  // namespace detail

/// Trial mean of cost(I_Q, random-phase mixture). Deterministic in seed
/// regardless of thread count.
inline RandomPhaseResult random_phase_cost(const SpatialParams& params, int n_phases = 1000, int n_trials = 400,
                                           std::uint64_t seed = 0, bool parallel = true) {
  if (n_phases < 1 || n_trials < 1) throw DomainError("random_phase_cost: need at least one phase and one trial");
  const auto iq = qfi_spatial(params);
  const auto cutoff = tail_rule(params);
  RandomPhaseResult out;
  out.trials.assign(static_cast<size_t>(n_trials), 0.0);
  auto body = [&](size_t t) { out.trials[t] = detail::random_phase_trial(params, iq, cutoff, n_phases, seed, t); };
  if (parallel) {
    parallel_for(out.trials.size(), body);
  } else {
    for (size_t t = 0; t < out.trials.size(); ++t) body(t);
  }
  detail::summarize(out);
  return out;
}

enum class SchemeKind { ft, rp, weighted };

inline std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::ft: return "ft";
    case SchemeKind::rp: return "rp";
    case SchemeKind::weighted: return "weighted";
  }
  return "?";
}

struct RatioCell {
  double gamma_cos = 0.0;
  double gamma_sin = 0.0;
  /// V_op / V_scheme (ft, rp) or V_op itself (weighted); empty for cells on
  /// singular loci or outside the disk.
  std::optional<double> value;
  std::optional<double> std_error;  // rp only
};

struct RatioMapSpec {
  SchemeKind scheme = SchemeKind::ft;
  int grid = 41;
  double n_mean = 0.01;
  std::uint64_t seed = 0;
  int n_phases = 1000;
  int n_trials = 400;
  double max_gamma = 0.995;
};

struct SchemeRatioMap {
  RatioMapSpec spec;
  std::vector<RatioCell> cells;  // row-major, gamma_sin slowest
};

/// Ratio of the weighted-scheme cost to the scheme cost over a square grid on
/// [-1, 1]^2 in (|gamma| cos phi, |gamma| sin phi).
inline SchemeRatioMap ratio_map(const RatioMapSpec& spec) {
  if (spec.grid < 2) throw DomainError("ratio_map: grid must have at least two points per axis");
  if (!(spec.n_mean > 0.0)) throw DomainError("ratio_map: n_mean must be > 0");
  const auto n = static_cast<size_t>(spec.grid);
  SchemeRatioMap out{spec, std::vector<RatioCell>(n * n)};
  parallel_for(n * n, [&](size_t idx) {
    const size_t iy = idx / n, ix = idx % n;
    RatioCell& cell = out.cells[idx];
    cell.gamma_cos = -1.0 + 2.0 * static_cast<double>(ix) / (spec.grid - 1.0);
    cell.gamma_sin = -1.0 + 2.0 * static_cast<double>(iy) / (spec.grid - 1.0);
    const double g = std::hypot(cell.gamma_cos, cell.gamma_sin);
    if (g > spec.max_gamma || g == 0.0) return;
    const SpatialParams p(spec.n_mean, g, std::atan2(cell.gamma_sin, cell.gamma_cos));
    const double v_op = weighted_scheme(p, false).cost_star;
    switch (spec.scheme) {
      case SchemeKind::weighted: cell.value = v_op; break;
      case SchemeKind::ft: cell.value = v_op / ft_scheme_cost(p); break;
      case SchemeKind::rp: {
        // cells already run in parallel
        const auto rp = random_phase_cost(p, spec.n_phases, spec.n_trials, derive_seed(spec.seed, idx), false);
        cell.value = v_op / rp.mean;
        cell.std_error = v_op * rp.std_error / (rp.mean * rp.mean);
        break;
      }
    }
  });
  return out;
}

}  // namespace thermoptic
