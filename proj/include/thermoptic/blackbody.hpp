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
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "thermoptic/common.hpp"
#include "thermoptic/fisher.hpp"
#include "thermoptic/gaussian_state.hpp"
#include "thermoptic/optimize.hpp"
#include "thermoptic/parallel.hpp"
#include "thermoptic/quadratic_observable.hpp"

namespace thermoptic {

// Exact SI-2019 values.
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K
inline constexpr double kSpeedOfLight = 299792458.0;  // m / s

/// Source/detector arrangement. kappa = A_S A_rho / (2 pi c^2 R^2).
struct Geometry {
  double source_area = 0.0;    // m^2
  double detector_area = 0.0;  // m^2
  double distance = 0.0;       // m
  double observation_time = 0.0;  // s; spectral width is 1 / tau

  [[nodiscard]] double kappa() const {
    return source_area * detector_area / (2.0 * kPi * kSpeedOfLight * kSpeedOfLight * distance * distance);
  }
  [[nodiscard]] double spectral_width() const { return 1.0 / observation_time; }
};

/// Parameters are ordered (T, kappa) everywhere.
class BlackbodyScene {
 public:
  BlackbodyScene(double temperature, double kappa) : temperature_(temperature), kappa_(kappa) {
    if (!std::isfinite(temperature) || temperature <= 0.0) throw DomainError("BlackbodyScene: temperature must be > 0");
    if (!std::isfinite(kappa) || kappa <= 0.0) throw DomainError("BlackbodyScene: kappa must be > 0");
  }

  BlackbodyScene(double temperature, const Geometry& geom) : BlackbodyScene(temperature, checked_kappa(geom)) {
    geometry_ = geom;
  }

  /// Scene with both kappa and geometry given; they must agree.
  BlackbodyScene(double temperature, double kappa, const Geometry& geom) : BlackbodyScene(temperature, kappa) {
    const double derived = checked_kappa(geom);
    if (std::abs(derived - kappa) > 1e-10 * kappa) {
      std::ostringstream os;
      os << "BlackbodyScene: kappa " << kappa << " disagrees with geometry-derived " << derived;
      throw DomainError(os.str());
    }
    geometry_ = geom;
  }

  [[nodiscard]] double temperature() const { return temperature_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double beta() const { return 1.0 / (kBoltzmann * temperature_); }
  [[nodiscard]] const std::optional<Geometry>& geometry() const { return geometry_; }
  /// k_B T / h, the natural frequency unit of the scene.
  [[nodiscard]] double thermal_frequency() const { return kBoltzmann * temperature_ / kPlanck; }

  [[nodiscard]] BlackbodyScene with_temperature(double t) const { return BlackbodyScene(t, kappa_); }

 private:
  static double checked_kappa(const Geometry& g) {
    if (!(g.source_area > 0.0 && g.detector_area > 0.0 && g.distance > 0.0 && g.observation_time > 0.0)) {
      throw DomainError("Geometry: areas, distance and observation time must be > 0");
    }
    return g.kappa();
  }

  double temperature_;
  double kappa_;
  std::optional<Geometry> geometry_;
};

/// Strictly increasing list of positive frequencies (Hz).
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> nu) : nu_(std::move(nu)) {
    if (nu_.empty()) throw DomainError("FrequencyGrid: empty");
    for (size_t i = 0; i < nu_.size(); ++i) {
      if (!std::isfinite(nu_[i]) || nu_[i] <= 0.0) throw DomainError("FrequencyGrid: frequencies must be finite and > 0");
      if (i > 0 && !(nu_[i] > nu_[i - 1])) throw DomainError("FrequencyGrid: frequencies must be strictly increasing");
    }
  }
  [[nodiscard]] const std::vector<double>& values() const { return nu_; }
  [[nodiscard]] size_t size() const { return nu_.size(); }
  operator std::span<const double>() const { return nu_; }

 private:
  std::vector<double> nu_;
};

/// Photon statistics of one spectral mode with analytic parameter gradients.
struct SpectralMode {
  double n_th = 0.0;
  double n = 0.0;
  double dn_dT = 0.0;
  double dn_dkappa = 0.0;

  [[nodiscard]] double noise() const { return n + n * n; }
};

inline SpectralMode spectral_mode(double nu, const BlackbodyScene& scene) {
  if (!std::isfinite(nu) || nu <= 0.0) throw DomainError("blackbody: frequency must be finite and > 0");
  const double x = kPlanck * nu * scene.beta();
  SpectralMode m;
  // 1/(e^x - 1) and its x-derivative factor n_th (1 + n_th); past x = 700 only
  // the leading exponential survives.
  double n_th_1p;
  if (x > 700.0) {
    m.n_th = std::exp(-x);
    n_th_1p = m.n_th;
  } else {
    m.n_th = 1.0 / std::expm1(x);
    n_th_1p = m.n_th * (1.0 + m.n_th);
  }
  const double nu2 = nu * nu;
  m.n = nu2 * scene.kappa() * m.n_th;
  m.dn_dT = nu2 * scene.kappa() * n_th_1p * x / scene.temperature();
  m.dn_dkappa = nu2 * m.n_th;
  return m;
}

inline double mean_photon_number(double nu, const BlackbodyScene& scene) { return spectral_mode(nu, scene).n; }

/// Rank-one QFI of one spectral mode in (T, kappa).
inline FisherMatrix spectral_qfi(double nu, const BlackbodyScene& scene) {
  const auto m = spectral_mode(nu, scene);
  Eigen::Vector2d g(m.dn_dT, m.dn_dkappa);
  return FisherMatrix(g * g.transpose() / m.noise(), FisherKind::quantum);
}

inline FisherMatrix multimode_qfi(std::span<const double> nu, const BlackbodyScene& scene) {
  if (nu.empty()) throw DomainError("multimode_qfi: no frequencies");
  RMatrix sum = RMatrix::Zero(2, 2);
  for (double v : nu) sum += spectral_qfi(v, scene).matrix();
  return FisherMatrix(sum, FisherKind::quantum);
}

/// Covariance state of independent spectral modes and its (T, kappa) derivatives.
inline GaussianState spectral_state(std::span<const double> nu, const BlackbodyScene& scene) {
  std::vector<GaussianState> parts;
  for (double v : nu) parts.push_back(thermal_spectral_covariance(mean_photon_number(v, scene)));
  return direct_sum(parts);
}

inline ParamDerivatives spectral_state_derivatives(std::span<const double> nu, const BlackbodyScene& scene) {
  const auto m = static_cast<Eigen::Index>(nu.size());
  ParamDerivatives out(2, CMatrix::Zero(2 * m, 2 * m));
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto sm = spectral_mode(nu[static_cast<size_t>(k)], scene);
    out[0](2 * k, 2 * k + 1) = out[0](2 * k + 1, 2 * k) = sm.dn_dT;
    out[1](2 * k, 2 * k + 1) = out[1](2 * k + 1, 2 * k) = sm.dn_dkappa;
  }
  return out;
}

/// SLD for parameter i (0 = T, 1 = kappa) on the multimode state, built per
/// mode as d_i n (n_hat - n) / (n + n^2).
inline QuadraticObservable spectral_sld(std::span<const double> nu, const BlackbodyScene& scene, int i) {
  if (i < 0 || i > 1) throw DomainError("spectral_sld: parameter index must be 0 (T) or 1 (kappa)");
  const int m = static_cast<int>(nu.size());
  auto out = QuadraticObservable::zero(m);
  for (int k = 0; k < m; ++k) {
    const auto sm = spectral_mode(nu[static_cast<size_t>(k)], scene);
    const double d = i == 0 ? sm.dn_dT : sm.dn_dkappa;
    const double w = d / sm.noise();
    out = out + cplx(w) * (QuadraticObservable::number(m, k) - cplx(sm.n) * QuadraticObservable::identity(m));
  }
  return out;
}

/// [I_Q^{-1}]_ii written through per-mode cofactors: the numerator sums the
/// cofactors [C^(l)]_ii and the denominator is sum_{l,k} I^(l)_11 I^(k)_22 -
/// I^(l)_12 I^(k)_21. The denominator is evaluated in its antisymmetrized form
/// (1/2) sum (g_l1 g_k2 - g_k1 g_l2)^2 / (s_l s_k), which is the same sum but
/// vanishes exactly for repeated frequencies. Returns +inf when it is zero.
inline double variance_bound_cofactor(std::span<const double> nu, const BlackbodyScene& scene, int i) {
  if (i < 0 || i > 1) throw DomainError("variance_bound_cofactor: parameter index must be 0 or 1");
  if (nu.size() < 2) throw DomainError("variance_bound_cofactor: needs at least two frequencies");
  std::vector<SpectralMode> modes;
  modes.reserve(nu.size());
  for (double v : nu) modes.push_back(spectral_mode(v, scene));
  // Work in units where each gradient component is O(1): the ratio is
  // invariant under per-parameter rescaling only after undoing it, so keep
  // the raw values and guard against underflow with long double.
  long double num = 0.0L;
  long double den = 0.0L;
  for (size_t l = 0; l < modes.size(); ++l) {
    const long double gl1 = modes[l].dn_dT, gl2 = modes[l].dn_dkappa, sl = modes[l].noise();
    num += (i == 0 ? gl2 * gl2 : gl1 * gl1) / sl;  // [C^(l)]_ii = [I^(l)]_jj for 2x2
    for (size_t k = l + 1; k < modes.size(); ++k) {
      const long double gk1 = modes[k].dn_dT, gk2 = modes[k].dn_dkappa, sk = modes[k].noise();
      const long double a = gl1 * gk2 - gk1 * gl2;
      den += a * a / (sl * sk);
    }
  }
  if (den == 0.0L) return std::numeric_limits<double>::infinity();
  return static_cast<double>(num / den);
}

/// tr(G I_Q^{-1}) for the multimode model, via the 2x2 adjugate and the
/// antisymmetrized determinant above. Returns +inf for a singular I_Q unless
/// G is blind to the null direction (handled by crb_bound in that case).
inline double spectral_weighted_variance(std::span<const double> nu, const BlackbodyScene& scene, const RMatrix& g) {
  long double i11 = 0, i12 = 0, i22 = 0, det = 0;
  std::vector<SpectralMode> modes;
  modes.reserve(nu.size());
  for (double v : nu) modes.push_back(spectral_mode(v, scene));
  for (size_t l = 0; l < modes.size(); ++l) {
    const long double gl1 = modes[l].dn_dT, gl2 = modes[l].dn_dkappa, sl = modes[l].noise();
    i11 += gl1 * gl1 / sl;
    i12 += gl1 * gl2 / sl;
    i22 += gl2 * gl2 / sl;
    for (size_t k = l + 1; k < modes.size(); ++k) {
      const long double a = gl1 * modes[k].dn_dkappa - modes[k].dn_dT * gl2;
      det += a * a / (sl * modes[k].noise());
    }
  }
  if (det == 0.0L) return crb_bound(multimode_qfi(nu, scene), g).value;
  const long double tr = (g(0, 0) * i22 + g(1, 1) * i11 - 2.0L * g(0, 1) * i12) / det;
  return static_cast<double>(tr);
}

/// Natural log of the T-variance bound on an N x N linear grid, row-major with
/// nu1 along rows. Diagonal cells are +inf (repeated frequency).
struct VarianceMap {
  std::vector<double> nu;
  std::vector<double> ln_var;  // size nu.size()^2; index i * N + j -> (nu[i], nu[j])
  size_t min_i = 0, min_j = 0;
  double min_ln_var = std::numeric_limits<double>::infinity();
};

inline VarianceMap temperature_variance_map(const BlackbodyScene& scene, double nu_min, double nu_max, int n) {
  if (n < 2 || !(nu_min > 0.0) || !(nu_max > nu_min)) throw DomainError("temperature_variance_map: bad grid");
  VarianceMap out;
  out.nu.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.nu[static_cast<size_t>(i)] = nu_min + (nu_max - nu_min) * i / (n - 1.0);
  const auto nn = static_cast<size_t>(n);
  out.ln_var.assign(nn * nn, 0.0);
  parallel_for(nn, [&](size_t i) {
    for (size_t j = 0; j < nn; ++j) {
      const double pair[2] = {out.nu[i], out.nu[j]};
      out.ln_var[i * nn + j] = std::log(variance_bound_cofactor(pair, scene, 0));
    }
  });
  for (size_t i = 0; i < nn; ++i) {
    for (size_t j = 0; j < nn; ++j) {
      if (out.ln_var[i * nn + j] < out.min_ln_var) {
        out.min_ln_var = out.ln_var[i * nn + j];
        out.min_i = i;
        out.min_j = j;
      }
    }
  }
  return out;
}

struct FrequencySearchOptions {
  int scan = 64;
  double lo = 1e-3;  // in units of k_B T / h
  double hi = 10.0;
  int max_evaluations = 10000;
};

/// A quadrature rule over (T, kappa): weights sum to one.
struct PriorNode {
  double temperature;
  double kappa;
  double weight;
};

namespace detail {

inline constexpr double kSearchPenalty = 1e300;

inline std::vector<double> log_axis(double lo, double hi, int n) {
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1.0);
  return out;
}

/// ln tr(G I^{-1}) averaged over the prior, as a function of log-frequencies
/// measured in units of the reference thermal frequency.
struct DesignObjective {
  std::vector<PriorNode> prior;
  RMatrix g;
  double f_ref;
  mutable int evaluations = 0;

  double operator()(const std::vector<double>& log_nu) const {
    ++evaluations;
    std::vector<double> nu(log_nu.size());
    for (size_t k = 0; k < nu.size(); ++k) {
      if (!std::isfinite(log_nu[k]) || std::abs(log_nu[k]) > 50.0) return kSearchPenalty;
      nu[k] = f_ref * std::exp(log_nu[k]);
    }
    double total = 0.0;
    for (const auto& node : prior) {
      const double v = spectral_weighted_variance(nu, BlackbodyScene(node.temperature, node.kappa), g);
      if (!std::isfinite(v)) return kSearchPenalty;
      total += node.weight * v;
    }
    return total > 0.0 ? std::log(total) : kSearchPenalty;
  }
};

inline std::vector<double> refine(const DesignObjective& obj, std::vector<double> x0, int max_evaluations) {
  NelderMeadOptions opt;
  opt.max_evaluations = max_evaluations;
  opt.size_tol = 1e-10;
  opt.rel_ftol = 1e-12;
  const std::vector<double> step(x0.size(), 0.05);
  auto best = nelder_mead(obj, x0, step, opt);
  // A restart from the converged point shakes off premature simplex collapse.
  auto again = nelder_mead(obj, best.x, std::vector<double>(x0.size(), 0.01), opt);
  if (again.value <= best.value) best = again;
  if (!best.converged || best.value >= kSearchPenalty) {
    std::ostringstream os;
    os << "frequency search did not converge within " << max_evaluations << " evaluations; best ln objective "
       << best.value << " at log-frequencies";
    for (double v : best.x) os << ' ' << v;
    throw NumericalError(os.str());
  }
  return best.x;
}

inline void check_prior(const std::vector<PriorNode>& prior) {
  if (prior.empty()) throw DomainError("prior: no quadrature nodes");
  double w = 0.0;
  for (const auto& n : prior) {
    if (!(n.weight >= 0.0) || !(n.temperature > 0.0) || !(n.kappa > 0.0)) {
      throw DomainError("prior: weights must be >= 0 and T, kappa > 0");
    }
    w += n.weight;
  }
  if (std::abs(w - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "prior: weights sum to " << w << ", expected 1 within 1e-6";
    throw DomainError(os.str());
  }
}

inline std::vector<double> to_frequencies(const std::vector<double>& log_nu, double f_ref) {
  std::vector<double> nu;
  for (double v : log_nu) nu.push_back(f_ref * std::exp(v));
  std::sort(nu.begin(), nu.end());
  return nu;
}

}  // namespace detail

/// Prior-averaged objective sum_q w_q tr(G I_Q^{-1}(nu; T_q, kappa_q)).
inline double prior_objective(std::span<const double> nu, const std::vector<PriorNode>& prior, const RMatrix& g) {
  double total = 0.0;
  for (const auto& node : prior) {
    total += node.weight * spectral_weighted_variance(nu, BlackbodyScene(node.temperature, node.kappa), g);
  }
  return total;
}

/// Frequencies minimizing the prior-averaged weighted variance with M modes.
/// M = 2 starts from a log-spaced scan; larger M extend the (M-1)-mode optimum
/// by the best scanned extra frequency, so adding a mode never makes the
/// objective worse.
inline FrequencyGrid prior_averaged_design(const std::vector<PriorNode>& prior, const RMatrix& g, int m,
                                           const FrequencySearchOptions& opt = {}) {
  detail::check_prior(prior);
  if (m < 2) throw DomainError("prior_averaged_design: need at least two modes");
  if (g.rows() != 2 || g.cols() != 2) throw DomainError("prior_averaged_design: weight matrix must be 2x2");
  double t_ref = 0.0;
  for (const auto& n : prior) t_ref += n.weight * n.temperature;
  detail::DesignObjective obj{prior, g, kBoltzmann * t_ref / kPlanck};

  const auto axis = detail::log_axis(opt.lo, opt.hi, opt.scan);
  const size_t na = axis.size();
  std::vector<double> vals(na * na, detail::kSearchPenalty);
  parallel_for(na, [&](size_t i) {
    for (size_t j = i + 1; j < na; ++j) vals[i * na + j] = obj({axis[i], axis[j]});
  });
  const auto best = static_cast<size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  std::vector<double> x = detail::refine(obj, {axis[best / na], axis[best % na]}, opt.max_evaluations);

  for (int extra = 2; extra < m; ++extra) {
    double best_v = std::numeric_limits<double>::infinity();
    double best_a = axis.front();
    for (double a : axis) {
      auto trial = x;
      trial.push_back(a);
      const double v = obj(trial);
      if (v < best_v) {
        best_v = v;
        best_a = a;
      }
    }
    x.push_back(best_a);
    auto refined = detail::refine(obj, x, opt.max_evaluations);
    if (obj(refined) <= obj(x)) x = std::move(refined);
  }
  auto nu = detail::to_frequencies(x, obj.f_ref);
  // Coincident frequencies are a degenerate (never optimal) design; nudge apart
  // so the grid invariant holds.
  for (size_t k = 1; k < nu.size(); ++k) {
    if (!(nu[k] > nu[k - 1])) nu[k] = std::nextafter(nu[k - 1], std::numeric_limits<double>::infinity());
  }
  return FrequencyGrid(nu);
}

/// (nu1, nu2) minimizing the T-variance with kappa as nuisance.
inline std::pair<double, double> optimal_frequencies(const BlackbodyScene& scene, const FrequencySearchOptions& opt = {}) {
  RMatrix g = RMatrix::Zero(2, 2);
  g(0, 0) = 1.0;
  const auto grid = prior_averaged_design({{scene.temperature(), scene.kappa(), 1.0}}, g, 2, opt);
  return {grid.values()[0], grid.values()[1]};
}

inline constexpr double kSingleModeThreshold = 1e-3;  // nu^2 kappa << 1
inline constexpr double kMuchGreater = 1e3;           // reading of ">>"
inline constexpr double kAlphaCoherence = 1e-14;      // s
inline constexpr double kEpsilonFarField = 1e-3;      // 1/K

struct RegimeReport {
  bool single_mode_ok = false;
  bool farfield_ok = false;
  double nu2_kappa = 0.0;
  double cot_theta = 0.0;
  double coherence_ratio = 0.0;   // cot(theta) / (alpha nu)
  double temperature_ratio = 0.0; // cot(theta) / (epsilon T)
};

/// Advisory check of the modelling assumptions; never throws on bad regimes.
inline RegimeReport regime_check(const BlackbodyScene& scene, double nu, double angular_size) {
  RegimeReport r;
  r.nu2_kappa = nu * nu * scene.kappa();
  r.cot_theta = std::cos(angular_size) / std::sin(angular_size);
  r.coherence_ratio = r.cot_theta / (kAlphaCoherence * nu);
  r.temperature_ratio = r.cot_theta / (kEpsilonFarField * scene.temperature());
  r.single_mode_ok = r.nu2_kappa < kSingleModeThreshold;
  r.farfield_ok = r.coherence_ratio >= kMuchGreater && r.temperature_ratio >= kMuchGreater;
  return r;
}

}  // namespace thermoptic
