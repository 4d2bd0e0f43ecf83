//
// Copyright 2026 The mialab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mialab/error.hpp"

namespace mialab {

enum class Hypothesis { kOut, kIn };

enum class Disclosure { kCv, kTlc, kDs };

inline const char* to_string(Disclosure d) {
  switch (d) {
    case Disclosure::kCv: return "CV";
    case Disclosure::kTlc: return "TLC";
    case Disclosure::kDs: return "DS";
  }
  return "?";
}

// Observation channel released by the model. For DS, `q` is the confidence
// threshold and `temperature` the randomization scale of the element-wise
// threshold; temperature 0 encodes the deterministic limit.
struct DisclosureMode {
  Disclosure tag = Disclosure::kCv;
  double q = 0.0;
  double temperature = 0.0;

  static DisclosureMode cv() { return {Disclosure::kCv, 0.0, 0.0}; }
  static DisclosureMode tlc() { return {Disclosure::kTlc, 0.0, 0.0}; }
  static DisclosureMode ds(double q, double temperature) {
    return {Disclosure::kDs, q, temperature};
  }
};

inline void validate_mode(const DisclosureMode& mode) {
  if (mode.tag == Disclosure::kDs) {
    if (!(mode.q >= 0.0 && mode.q <= 1.0)) {
      throw ValidationError("mode: DS threshold q must lie in [0,1]");
    }
    if (!(mode.temperature >= 0.0) || !std::isfinite(mode.temperature)) {
      throw ValidationError("mode: DS temperature must be finite and >= 0");
    }
  }
}

// Attack trade-off curve: FNR beta as a function of TNR alpha, stored on an
// ascending alpha grid. `clamped_components` counts boundary observations
// that hit the log floor during simulation.
struct TradeoffCurve {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::uint64_t n_samples = 0;
  DisclosureMode mode;
  std::uint64_t seed = 0;
  std::uint64_t clamped_components = 0;
};

// Uniform grid of n interior points i/(n+1), i = 1..n.
inline std::vector<double> interior_alpha_grid(int n) {
  if (n < 1) throw ValidationError("alpha grid: need at least one point");
  std::vector<double> grid(n);
  const double step = 1.0 / static_cast<double>(n + 1);
  for (int i = 0; i < n; ++i) grid[i] = step * static_cast<double>(i + 1);
  return grid;
}

inline void validate_curve(const TradeoffCurve& c) {
  if (c.alpha.size() != c.beta.size() || c.alpha.empty()) {
    throw ValidationError("curve: alpha/beta must be non-empty and equally sized");
  }
  for (std::size_t i = 1; i < c.alpha.size(); ++i) {
    if (!(c.alpha[i] > c.alpha[i - 1])) {
      throw ValidationError("curve: alpha grid must be strictly increasing");
    }
  }
}

// Average advantage E_alpha[alpha - beta_alpha]: trapezoidal integral of the
// advantage over the stored grid.
inline double avg_advantage(const TradeoffCurve& c) {
  validate_curve(c);
  double acc = 0.0;
  for (std::size_t i = 1; i < c.alpha.size(); ++i) {
    const double a0 = c.alpha[i - 1] - c.beta[i - 1];
    const double a1 = c.alpha[i] - c.beta[i];
    acc += 0.5 * (a0 + a1) * (c.alpha[i] - c.alpha[i - 1]);
  }
  return acc;
}

// Advantage alpha - beta_alpha at one TNR level, linearly interpolating the
// stored grid; asking outside the stored span is an error.
inline double advantage_at(const TradeoffCurve& c, double alpha) {
  validate_curve(c);
  if (alpha < c.alpha.front() || alpha > c.alpha.back()) {
    throw ValidationError("advantage_at: alpha outside the stored grid span");
  }
  auto it = std::lower_bound(c.alpha.begin(), c.alpha.end(), alpha);
  const std::size_t hi = static_cast<std::size_t>(it - c.alpha.begin());
  if (c.alpha[hi] == alpha) return alpha - c.beta[hi];
  const std::size_t lo = hi - 1;
  const double t = (alpha - c.alpha[lo]) / (c.alpha[hi] - c.alpha[lo]);
  const double beta = c.beta[lo] + t * (c.beta[hi] - c.beta[lo]);
  return alpha - beta;
}

}  // namespace mialab
