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
#include <string>

#include "thermoptic/common.hpp"

namespace thermoptic {

/// Two-spatial-mode parameters: mean photon number per mode, modulus and
/// phase of the complex degree of coherence gamma_12 = |gamma| exp(i phi).
struct SpatialParams {
  double n_mean = 0.0;
  double gamma_abs = 0.0;
  double phi = 0.0;

  SpatialParams() = default;
  SpatialParams(double n, double g, double ph) : n_mean(n), gamma_abs(g), phi(normalize_phase(ph)) {
    if (!std::isfinite(n) || n < 0.0) {
      throw DomainError("SpatialParams: n_mean must be finite and >= 0, got " + std::to_string(n));
    }
    if (!std::isfinite(g) || g < 0.0 || g > 1.0) {
      throw DomainError("SpatialParams: |gamma| must lie in [0, 1], got " + std::to_string(g));
    }
    if (!std::isfinite(ph)) throw DomainError("SpatialParams: phi must be finite");
  }

  static double normalize_phase(double ph) {
    double r = std::fmod(ph, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
  }

  /// Parameter vector in the fixed order (n_mean, |gamma|, phi).
  [[nodiscard]] double operator[](int i) const { return i == 0 ? n_mean : (i == 1 ? gamma_abs : phi); }

  /// Returns a copy with parameter `i` replaced. Used by finite-difference
  /// oracles, so the range checks are skipped for tiny overshoots of |gamma|.
  [[nodiscard]] SpatialParams with(int i, double value) const {
    SpatialParams out = *this;
    if (i == 0) out.n_mean = value;
    else if (i == 1) out.gamma_abs = value;
    else out.phi = value;
    return out;
  }
};

/// Parameters of the diagonal thermal state that a passive two-mode unitary
/// maps onto the two-spatial-mode state.
struct DiagThermalParams {
  double x1 = 0.0;
  double x2 = 0.0;

  static DiagThermalParams from(const SpatialParams& p) {
    return {p.n_mean * (1.0 - p.gamma_abs), p.n_mean * (1.0 + p.gamma_abs)};
  }
};

}  // namespace thermoptic
