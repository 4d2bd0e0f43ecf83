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

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mialab/error.hpp"

namespace mialab {

// The three knobs of the output model, plus the class count.
//   delta  - relative calibration error; positive means overconfidence.
//   eps_a  - aleatoric uncertainty, 1 - p*_0 in [0, 1 - 1/k].
//   eps_e  - epistemic uncertainty, reciprocal of the Dirichlet mass.
struct UncertaintyProfile {
  int k = 2;
  double delta = 0.0;
  double eps_a = 0.5;
  double eps_e = 0.25;
};

// Dirichlet parameter vectors of the out/in output distributions.
// Index 0 is the true label; both vectors share the same length.
struct DirichletPair {
  std::vector<double> gamma_out;
  std::vector<double> gamma_in;

  int k() const { return static_cast<int>(gamma_out.size()); }
  double sum_out() const {
    return std::accumulate(gamma_out.begin(), gamma_out.end(), 0.0);
  }
  double sum_in() const {
    return std::accumulate(gamma_in.begin(), gamma_in.end(), 0.0);
  }
};

// Ground-truth probability of the true label under the data distribution.
struct GroundTruthConfidence {
  double p_star_0 = 0.5;
};

struct MomentPair {
  std::vector<double> out;
  std::vector<double> in;
};

// Lower clamp for the aleatoric knob: eps_a = 0 would zero out the
// non-true-label Dirichlet components.
inline constexpr double kMinEpsA = 1e-9;

// Checks every profile invariant; throws ValidationError quoting the violated
// inequality. Underconfident models (delta < 0) are accepted as long as all
// induced Dirichlet components stay positive, which holds for delta > -1.
inline void validate_profile(const UncertaintyProfile& p) {
  if (p.k < 2) {
    throw ValidationError("profile: class count must satisfy K >= 2");
  }
  if (!std::isfinite(p.delta) || !std::isfinite(p.eps_a) || !std::isfinite(p.eps_e)) {
    throw ValidationError("profile: parameters must be finite");
  }
  if (!(p.eps_e > 0.0)) {
    throw ValidationError("profile: violated ϵe > 0");
  }
  if (p.eps_a < kMinEpsA) {
    throw ValidationError("profile: violated ϵa >= 1e-9 (ϵa = 0 would zero the non-true-label mass)");
  }
  const double eps_a_max = 1.0 - 1.0 / static_cast<double>(p.k);
  if (p.eps_a > eps_a_max) {
    throw ValidationError("profile: violated ϵa <= 1 - 1/K");
  }
  if (!(p.delta > -1.0)) {
    throw ValidationError("profile: violated Δ > -1");
  }
  if (p.delta > 0.0 && !(p.eps_a > p.delta / (1.0 + p.delta))) {
    throw ValidationError("profile: violated Δ/(1+Δ) < ϵa < 1");
  }
}

inline bool profile_is_valid(const UncertaintyProfile& p) {
  try {
    validate_profile(p);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

// Structural checks on a parameter pair. Equal sums are only required where a
// caller relies on the shared-mass assumption (see infer_profile).
inline void validate_pair(const DirichletPair& pair, bool require_equal_sums = false) {
  if (pair.gamma_out.size() < 2 || pair.gamma_out.size() != pair.gamma_in.size()) {
    throw ValidationError("pair: parameter vectors must have equal length >= 2");
  }
  for (double g : pair.gamma_out) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ValidationError("pair: gamma_out components must be positive and finite");
    }
  }
  for (double g : pair.gamma_in) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ValidationError("pair: gamma_in components must be positive and finite");
    }
  }
  if (require_equal_sums) {
    const double so = pair.sum_out();
    const double si = pair.sum_in();
    if (std::abs(so - si) > 1e-9 * std::max(so, si)) {
      throw ValidationError("pair: out/in parameter sums differ beyond 1e-9 relative");
    }
  }
}

// Maps (K, delta, eps_a, eps_e) to the out/in Dirichlet parameters:
//   gamma_out = [ (1-ea)/ee, ea/((K-1)ee) x (K-1) ]
//   gamma_in  = [ (1+d)(1-ea)/ee, (ea d + ea - d)/((K-1)ee) x (K-1) ]
// Both vectors sum to 1/ee.
inline DirichletPair profile_to_pair(const UncertaintyProfile& p) {
  validate_profile(p);
  const double inv_ee = 1.0 / p.eps_e;
  const double rest = static_cast<double>(p.k - 1);
  DirichletPair pair;
  pair.gamma_out.assign(p.k, p.eps_a * inv_ee / rest);
  pair.gamma_out[0] = (1.0 - p.eps_a) * inv_ee;
  pair.gamma_in.assign(p.k, (p.eps_a * p.delta + p.eps_a - p.delta) * inv_ee / rest);
  pair.gamma_in[0] = (1.0 + p.delta) * (1.0 - p.eps_a) * inv_ee;
  return pair;
}

// Component means gamma_k / sum(gamma) under each hypothesis.
inline MomentPair pair_means(const DirichletPair& pair) {
  validate_pair(pair);
  MomentPair m;
  const double so = pair.sum_out();
  const double si = pair.sum_in();
  m.out.reserve(pair.gamma_out.size());
  m.in.reserve(pair.gamma_in.size());
  for (double g : pair.gamma_out) m.out.push_back(g / so);
  for (double g : pair.gamma_in) m.in.push_back(g / si);
  return m;
}

// Component variances gamma_k (S - gamma_k) / (S^2 (S+1)) with S = sum(gamma).
inline MomentPair pair_variances(const DirichletPair& pair) {
  validate_pair(pair);
  MomentPair v;
  const double so = pair.sum_out();
  const double si = pair.sum_in();
  v.out.reserve(pair.gamma_out.size());
  v.in.reserve(pair.gamma_in.size());
  for (double g : pair.gamma_out) v.out.push_back(g * (so - g) / (so * so * (so + 1.0)));
  for (double g : pair.gamma_in) v.in.push_back(g * (si - g) / (si * si * (si + 1.0)));
  return v;
}

// Recovers the knobs from a parameter pair and an externally supplied
// ground-truth confidence:
//   eps_e = 1/sum(gamma_out), eps_a = 1 - p*_0,
//   delta = (E_in[p_0] - p*_0) / p*_0.
// The result is not re-validated: fitted pairs may land outside the strict
// profile domain, and the caller decides what to do with them.
inline UncertaintyProfile infer_profile(const DirichletPair& pair,
                                        GroundTruthConfidence ground_truth) {
  validate_pair(pair, /*require_equal_sums=*/true);
  const double k = static_cast<double>(pair.k());
  const double p_star_0 = ground_truth.p_star_0;
  if (!(p_star_0 >= 1.0 / k && p_star_0 <= 1.0)) {
    throw ValidationError("infer_profile: p_star_0 must lie in [1/K, 1]");
  }
  UncertaintyProfile p;
  p.k = pair.k();
  p.eps_e = 1.0 / pair.sum_out();
  p.eps_a = 1.0 - p_star_0;
  const double in_mean_0 = pair.gamma_in[0] / pair.sum_in();
  p.delta = (in_mean_0 - p_star_0) / p_star_0;
  return p;
}

inline UncertaintyProfile infer_profile(const DirichletPair& pair, double p_star_0) {
  return infer_profile(pair, GroundTruthConfidence{p_star_0});
}

}  // namespace mialab
