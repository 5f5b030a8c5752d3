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
#include <map>
#include <optional>
#include <vector>

#include "thermoptic/common.hpp"

namespace thermoptic {

/// Truncation of the Fock space by total photon number.
struct FockCutoff {
  int max_total_photons = 0;

  explicit FockCutoff(int n_max = 0) : max_total_photons(n_max) {
    if (n_max < 0) throw DomainError("FockCutoff: N_max must be non-negative");
  }
};

/// Occupation-number basis {(n_1, ..., n_k) : sum n_i <= N_max} in
/// lexicographic order.
class FockBasis {
 public:
  using Occupation = std::vector<int>;

  FockBasis(int n_modes, FockCutoff cutoff) : n_modes_(n_modes), cutoff_(cutoff) {
    if (n_modes <= 0) throw DomainError("FockBasis: mode count must be positive");
    Occupation occ(static_cast<size_t>(n_modes), 0);
    enumerate(occ, 0, cutoff.max_total_photons);
    for (size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], static_cast<Eigen::Index>(i));
  }

  [[nodiscard]] int n_modes() const { return n_modes_; }
  [[nodiscard]] FockCutoff cutoff() const { return cutoff_; }
  [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(states_.size()); }
  [[nodiscard]] const Occupation& state(Eigen::Index i) const { return states_[static_cast<size_t>(i)]; }
  [[nodiscard]] const std::vector<Occupation>& states() const { return states_; }

  [[nodiscard]] std::optional<Eigen::Index> index_of(const Occupation& occ) const {
    auto it = index_.find(occ);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] static int total(const Occupation& occ) {
    int t = 0;
    for (int v : occ) t += v;
    return t;
  }

 private:
  void enumerate(Occupation& occ, int mode, int budget) {
    if (mode == n_modes_) {
      states_.push_back(occ);
      return;
    }
    for (int k = 0; k <= budget; ++k) {
      occ[static_cast<size_t>(mode)] = k;
      enumerate(occ, mode + 1, budget - k);
    }
    occ[static_cast<size_t>(mode)] = 0;
  }

  int n_modes_;
  FockCutoff cutoff_;
  std::vector<Occupation> states_;
  std::map<Occupation, Eigen::Index> index_;
};

/// Applies the ladder operator with ladder index `alpha` (even: annihilator of
/// mode alpha/2, odd: creator) to |occ>, in place. Returns the amplitude
/// (zero when annihilating the vacuum of that mode).
inline double apply_ladder(int alpha, FockBasis::Occupation& occ) {
  const auto mode = static_cast<size_t>(alpha / 2);
  if (alpha % 2 == 0) {
    if (occ[mode] == 0) return 0.0;
    const double amp = std::sqrt(static_cast<double>(occ[mode]));
    --occ[mode];
    return amp;
  }
  ++occ[mode];
  return std::sqrt(static_cast<double>(occ[mode]));
}

/// Fock-space representation of the passive transformation V with
/// V a_j^dag V^dag = sum_i u_ij a_i^dag and V|0> = |0>. The result is
/// block-diagonal in total photon number and unitary on every sector.
inline CMatrix lift_passive_unitary(const CMatrix& u, const FockBasis& basis) {
  const int n = basis.n_modes();
  if (u.rows() != n || u.cols() != n) throw DomainError("lift_passive_unitary: dimension mismatch");
  const Eigen::Index dim = basis.size();
  CMatrix v = CMatrix::Zero(dim, dim);

  for (Eigen::Index col = 0; col < dim; ++col) {
    const auto& in = basis.state(col);
    // Expand prod_j (sum_i u_ij a_i^dag)^{n_j} |0> as a polynomial in creators,
    // keyed by the unnormalized monomial exponents.
    std::map<FockBasis::Occupation, cplx> poly;
    poly.emplace(FockBasis::Occupation(static_cast<size_t>(n), 0), cplx(1.0));
    double norm = 1.0;
    for (int j = 0; j < n; ++j) {
      for (int rep = 0; rep < in[static_cast<size_t>(j)]; ++rep) {
        std::map<FockBasis::Occupation, cplx> next;
        for (const auto& [mono, coeff] : poly) {
          for (int i = 0; i < n; ++i) {
            if (u(i, j) == cplx(0.0)) continue;
            auto m = mono;
            ++m[static_cast<size_t>(i)];
            next[m] += coeff * u(i, j);
          }
        }
        poly.swap(next);
      }
      norm *= std::tgamma(in[static_cast<size_t>(j)] + 1.0);
    }
    for (const auto& [mono, coeff] : poly) {
      const auto row = basis.index_of(mono);
      if (!row) continue;
      double fact = 1.0;
      for (int m : mono) fact *= std::tgamma(m + 1.0);
      v(*row, col) = coeff * std::sqrt(fact / norm);
    }
  }
  return v;
}

}  // namespace thermoptic
