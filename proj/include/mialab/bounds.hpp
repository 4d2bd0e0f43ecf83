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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mialab/error.hpp"
#include "mialab/numerics.hpp"
#include "mialab/tradeoff.hpp"
#include "mialab/uncertainty.hpp"

namespace mialab {

// KL divergences between the out/in observation distributions, in nats.
struct DivergencePair {
  double d_out_in = 0.0;
  double d_in_out = 0.0;
};

// Advantage upper bound for one disclosure mode. `exact` and `approx` are
// clipped to [0,1] (an advantage is a probability difference); the raw
// unclipped values are kept for diagnostics.
struct AdvantageBounds {
  double exact = 0.0;
  double approx = 0.0;
  double raw_exact = 0.0;
  double raw_approx = 0.0;
  Disclosure mode = Disclosure::kCv;
};

// KL divergence between Dirichlet densities:
//   D(p||q) = ln B(gq)/B(gp) + sum_k (gp_k - gq_k) (psi(gp_k) - psi(sum gp)).
inline double dirichlet_kl(std::span<const double> gamma_p, std::span<const double> gamma_q) {
  if (gamma_p.size() != gamma_q.size() || gamma_p.size() < 2) {
    throw ValidationError("dirichlet_kl: vectors must have equal length >= 2");
  }
  bool equal = true;
  double sum_p = 0.0;
  for (std::size_t k = 0; k < gamma_p.size(); ++k) {
    detail::require_positive_finite(gamma_p[k], "dirichlet_kl");
    detail::require_positive_finite(gamma_q[k], "dirichlet_kl");
    sum_p += gamma_p[k];
    equal = equal && gamma_p[k] == gamma_q[k];
  }
  if (equal) return 0.0;
  const double psi_sum = digamma(sum_p);
  double acc = log_multivariate_beta(gamma_q) - log_multivariate_beta(gamma_p);
  for (std::size_t k = 0; k < gamma_p.size(); ++k) {
    acc += (gamma_p[k] - gamma_q[k]) * (digamma(gamma_p[k]) - psi_sum);
  }
  return acc < 0.0 ? 0.0 : acc;
}

inline DivergencePair pair_divergences(const DirichletPair& pair) {
  return {dirichlet_kl(pair.gamma_out, pair.gamma_in),
          dirichlet_kl(pair.gamma_in, pair.gamma_out)};
}

// Pinsker-style advantage bound sqrt(D(out||in) + D(in||out)).
inline double pinsker_advantage_ub(const DivergencePair& div) {
  if (std::isinf(div.d_out_in) || std::isinf(div.d_in_out)) {
    return std::numeric_limits<double>::infinity();
  }
  if (div.d_out_in < 0.0 || div.d_in_out < 0.0) {
    throw ValidationError("pinsker_advantage_ub: divergences must be nonnegative");
  }
  return std::sqrt(div.d_out_in + div.d_in_out);
}

namespace detail {

// Smallest beta <= alpha with binary_kl(alpha, beta) <= d, up to 1e-10. The
// feasible end of the bracket is returned so the constraint always holds at
// the result (the KL is extremely steep near beta = 0, where a midpoint
// could land on the infeasible side).
inline double beta_floor_from_d_alpha_beta(double alpha, double d) {
  if (!std::isfinite(d)) return 0.0;
  if (d <= 0.0) return alpha;
  double lo = 0.0;      // binary_kl(alpha, 0) = +inf > d
  double hi = alpha;    // binary_kl(alpha, alpha) = 0 <= d
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (binary_kl(alpha, mid) > d) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// Smallest beta <= alpha with binary_kl(beta, alpha) <= d, up to 1e-10.
inline double beta_floor_from_d_beta_alpha(double alpha, double d) {
  if (!std::isfinite(d)) return 0.0;
  if (d <= 0.0) return alpha;
  if (binary_kl(0.0, alpha) <= d) return 0.0;  // constraint admits beta = 0
  double lo = 0.0;
  double hi = alpha;
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (binary_kl(mid, alpha) > d) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace detail

// Trade-off lower bound from the binary-KL outer region: for each alpha the
// smallest beta satisfying both d(alpha||beta) <= D(out||in) and
// d(beta||alpha) <= D(in||out), found by bisection. Zero divergences give the
// diagonal (uninformed attacker).
inline TradeoffCurve beta_lb_curve(const DivergencePair& div, std::span<const double> alphas) {
  if (alphas.empty()) throw ValidationError("beta_lb_curve: empty alpha grid");
  TradeoffCurve curve;
  curve.alpha.reserve(alphas.size());
  curve.beta.reserve(alphas.size());
  double prev = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw ValidationError("beta_lb_curve: alpha grid must lie strictly inside (0,1)");
    }
    if (a <= prev && !curve.alpha.empty()) {
      throw ValidationError("beta_lb_curve: alpha grid must be ascending");
    }
    prev = a;
    const double b1 = detail::beta_floor_from_d_alpha_beta(a, div.d_out_in);
    const double b2 = detail::beta_floor_from_d_beta_alpha(a, div.d_in_out);
    double b = std::max(b1, b2);
    b = std::clamp(b, 0.0, a);
    curve.alpha.push_back(a);
    curve.beta.push_back(b);
  }
  return curve;
}

namespace detail {

struct ProfileGamma {
  double out0, outk, in0, ink;  // outk/ink are the shared non-true-label values
};

inline ProfileGamma profile_gamma_tlc_aggregated(const UncertaintyProfile& p) {
  // Aggregated Beta marginal: non-true-label mass summed into one component.
  const double inv_ee = 1.0 / p.eps_e;
  return {(1.0 - p.eps_a) * inv_ee, p.eps_a * inv_ee,
          (1.0 + p.delta) * (1.0 - p.eps_a) * inv_ee,
          (p.eps_a * (1.0 + p.delta) - p.delta) * inv_ee};
}

// Shared form of the Prop. 1 / Prop. 2 digamma expression. `rest` is K-1 for
// the full confidence vector and 1 for the aggregated true-label marginal.
inline double advantage_ub_digamma(const UncertaintyProfile& p, double rest) {
  const double inv_ee = 1.0 / p.eps_e;
  const double in0 = (1.0 + p.delta) * (1.0 - p.eps_a) * inv_ee;
  const double out0 = (1.0 - p.eps_a) * inv_ee;
  const double outk = p.eps_a * inv_ee / rest;
  const double ink = (p.eps_a * (1.0 + p.delta) - p.delta) * inv_ee / rest;
  const double bracket = digamma(in0) - digamma(out0) + digamma(outk) - digamma(ink);
  const double value = p.delta * (1.0 - p.eps_a) * inv_ee * bracket;
  return std::sqrt(std::max(value, 0.0));
}

// Three-term closed form obtained from psi(x) ~ ln x - 1/(2x).
inline double advantage_ub_approx(const UncertaintyProfile& p, double rest) {
  if (p.delta == 0.0) return 0.0;
  const double d = p.delta;
  const double ea = p.eps_a;
  const double denom = (1.0 + d) * ea - d;
  const double t1 = d * (1.0 - ea) / p.eps_e * std::log((1.0 + d) * ea / denom);
  const double t2 = d * d * (1.0 - ea) * (1.0 - ea) * rest / (2.0 * ea * denom);
  const double t3 = d * d / (2.0 * (1.0 + d));
  return std::sqrt(std::max(t1 + t2 + t3, 0.0));
}

inline double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace detail

// Advantage upper bound under confidence-vector disclosure. The exact value
// is evaluated through the symmetrized Dirichlet KL and cross-checked against
// the printed digamma expression; a disagreement beyond 1e-9 relative means a
// transcription bug and aborts the computation.
inline AdvantageBounds cv_advantage_ub(const UncertaintyProfile& p) {
  validate_profile(p);
  const DirichletPair pair = profile_to_pair(p);
  const double via_kl = pinsker_advantage_ub(pair_divergences(pair));
  const double via_digamma = detail::advantage_ub_digamma(p, static_cast<double>(p.k - 1));
  if (std::abs(via_kl - via_digamma) > 1e-9 * std::max({via_kl, via_digamma, 1e-30})) {
    throw ComputationError("cv_advantage_ub: KL route and digamma route disagree");
  }
  AdvantageBounds b;
  b.mode = Disclosure::kCv;
  b.raw_exact = via_kl;
  b.raw_approx = detail::advantage_ub_approx(p, static_cast<double>(p.k - 1));
  b.exact = detail::clip01(b.raw_exact);
  b.approx = detail::clip01(b.raw_approx);
  return b;
}

// Advantage upper bound under true-label-confidence disclosure: the marginal
// of the true label is Beta(gamma_0, sum of the rest), so the bound is the
// K = 2 form of the CV expression with aggregated non-true-label mass.
inline AdvantageBounds tlc_advantage_ub(const UncertaintyProfile& p) {
  validate_profile(p);
  const auto g = detail::profile_gamma_tlc_aggregated(p);
  const std::array<double, 2> gout{g.out0, g.outk};
  const std::array<double, 2> gin{g.in0, g.ink};
  const double via_kl = pinsker_advantage_ub(
      {dirichlet_kl(gout, gin), dirichlet_kl(gin, gout)});
  const double via_digamma = detail::advantage_ub_digamma(p, 1.0);
  if (std::abs(via_kl - via_digamma) > 1e-9 * std::max({via_kl, via_digamma, 1e-30})) {
    throw ComputationError("tlc_advantage_ub: KL route and digamma route disagree");
  }
  AdvantageBounds b;
  b.mode = Disclosure::kTlc;
  b.raw_exact = via_kl;
  b.raw_approx = detail::advantage_ub_approx(p, 1.0);
  b.exact = detail::clip01(b.raw_exact);
  b.approx = detail::clip01(b.raw_approx);
  return b;
}

inline constexpr int kMaxEnumerationClasses = 16;

// Total variation distance between two product-Bernoulli distributions with
// success probabilities u and v, by exact enumeration of all 2^K outcomes.
inline double tv_product_bernoulli(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.empty()) {
    throw ValidationError("tv_product_bernoulli: vectors must be non-empty and equally sized");
  }
  if (u.size() > kMaxEnumerationClasses) {
    throw ValidationError(
        "tv_product_bernoulli: K > 16 not enumerable; use the Monte Carlo path");
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!(u[k] >= 0.0 && u[k] <= 1.0) || !(v[k] >= 0.0 && v[k] <= 1.0)) {
      throw ValidationError("tv_product_bernoulli: probabilities must lie in [0,1]");
    }
  }
  const std::size_t n = u.size();
  const std::size_t total = std::size_t{1} << n;
  double acc = 0.0;
  for (std::size_t bits = 0; bits < total; ++bits) {
    double pu = 1.0;
    double pv = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (bits & (std::size_t{1} << k)) {
        pu *= u[k];
        pv *= v[k];
      } else {
        pu *= 1.0 - u[k];
        pv *= 1.0 - v[k];
      }
    }
    acc += std::abs(pu - pv);
  }
  return 0.5 * acc;
}

namespace detail {

// The delta-factor maximization runs over the floored simplex
// { p : p_k >= kSimplexFloor }. Keeping candidates away from the boundary
// avoids the degenerate coin flips at p_k = q that the randomized threshold
// produces for components sitting exactly on the threshold; the reported
// value is the best found over this domain, not a certified global optimum.
inline constexpr double kSimplexFloor = 0.005;

inline double tv_two_coord(double u0, double u1, double v0, double v1) {
  // Product-Bernoulli TV when all other coordinates coincide.
  double acc = std::abs((1.0 - u0) * (1.0 - u1) - (1.0 - v0) * (1.0 - v1));
  acc += std::abs((1.0 - u0) * u1 - (1.0 - v0) * v1);
  acc += std::abs(u0 * (1.0 - u1) - v0 * (1.0 - v1));
  acc += std::abs(u0 * u1 - v0 * v1);
  return 0.5 * acc;
}

inline double tv_of_vectors(std::span<const double> p, std::span<const double> pp,
                            double q, double temperature) {
  // Coordinates with identical success probabilities factor out of the
  // product-Bernoulli TV (sum_{b_k} w_{b_k} |x - y| = |x - y|), so only the
  // differing coordinates need enumerating.
  std::array<double, kMaxEnumerationClasses> u;
  std::array<double, kMaxEnumerationClasses> v;
  std::size_t d = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double uk = sigmoid_t(p[k] - q, temperature);
    const double vk = sigmoid_t(pp[k] - q, temperature);
    if (uk != vk) {
      u[d] = uk;
      v[d] = vk;
      ++d;
    }
  }
  if (d == 0) return 0.0;
  const std::size_t total = std::size_t{1} << d;
  double acc = 0.0;
  for (std::size_t bits = 0; bits < total; ++bits) {
    double pu = 1.0;
    double pv = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (bits & (std::size_t{1} << k)) {
        pu *= u[k];
        pv *= v[k];
      } else {
        pu *= 1.0 - u[k];
        pv *= 1.0 - v[k];
      }
    }
    acc += std::abs(pu - pv);
  }
  return 0.5 * acc;
}

// Coordinate-wise refinement: golden-section search on the mass split between
// one coordinate pair of one argument, holding everything else fixed.
// `steps` counts interval shrinks; the pair is left at the best probe.
inline void golden_refine(std::vector<double>& p, const std::vector<double>& other,
                          std::size_t i, std::size_t j, double q, double temperature,
                          int steps) {
  const double mass = p[i] + p[j];
  const double lo = kSimplexFloor;
  const double hi = mass - kSimplexFloor;
  if (!(hi > lo)) return;
  auto eval = [&](double s) {
    p[i] = s;
    p[j] = mass - s;
    return tv_of_vectors(p, other, q, temperature);
  };
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  for (int it = 0; it < steps; ++it) {
    if (f1 < f2) {  // maximize
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = eval(x1);
    }
  }
  const double best = (f1 > f2) ? x1 : x2;
  p[i] = best;
  p[j] = mass - best;
}

}  // namespace detail

// Proportionality factor of the decision-set bound:
//   delta_{T,q} = sqrt( max_{p,p'} TV(channel(p), channel(p')) ),
// where the channel emits independent bits Bern(sigmoid_T(p_k - q)).
//
// The maximization is over the floored simplex (see kSimplexFloor) and
// proceeds by structured candidates - floored one-hot vectors, the uniform
// vector, and two-point mixtures on a 201-point grid per coordinate pair -
// followed by 200 coordinate-wise golden-section refinement steps. For K = 2
// an exhaustive grid of step 1e-3 is added as a safety net. The result is a
// lower estimate of the true supremum for K > 2.
inline double delta_factor(double temperature, double q, int k) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("delta_factor: temperature must be finite and >= 0");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ValidationError("delta_factor: q must lie in [0,1]");
  }
  if (k < 2 || k > kMaxEnumerationClasses) {
    throw ValidationError("delta_factor: class count must lie in [2,16]");
  }
  const double m = detail::kSimplexFloor;
  const double top = 1.0 - (k - 1) * m;  // largest admissible coordinate

  if (temperature == 0.0) {
    // Hard-threshold limit over the floored simplex: some coordinate can sit
    // on each side of q iff m < q <= top, and then two one-hot-like vectors
    // produce disjoint outcomes (TV = 1).
    return (q > m && q <= top) ? 1.0 : 0.0;
  }

  const std::size_t n = static_cast<std::size_t>(k);
  double best_tv = 0.0;
  std::vector<double> best_p, best_pp;
  auto consider = [&](const std::vector<double>& p, const std::vector<double>& pp, double tv) {
    if (tv > best_tv) {
      best_tv = tv;
      best_p = p;
      best_pp = pp;
    }
  };

  // Structured candidates evaluated in full: floored one-hots and uniform.
  std::vector<std::vector<double>> small;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(n, m);
    p[i] = top;
    small.push_back(std::move(p));
  }
  small.emplace_back(n, 1.0 / static_cast<double>(k));
  for (const auto& p : small) {
    for (const auto& pp : small) {
      consider(p, pp, detail::tv_of_vectors(p, pp, q, temperature));
    }
  }

  // Two-point mixtures: both arguments supported on the same coordinate pair,
  // all other coordinates pinned at the floor. Shared coordinates cancel in
  // the TV, so each evaluation reduces to the 4-outcome two-coordinate case.
  const double pair_mass = 1.0 - (k - 2) * m;
  constexpr int kMixGrid = 201;
  std::vector<double> grid(kMixGrid);
  for (int g = 0; g < kMixGrid; ++g) {
    grid[g] = m + (pair_mass - 2.0 * m) * static_cast<double>(g) / (kMixGrid - 1);
  }
  std::vector<double> su(kMixGrid);
  for (int g = 0; g < kMixGrid; ++g) {
    su[g] = sigmoid_t(grid[g] - q, temperature);
  }
  double best_mix_tv = 0.0;
  double best_s = grid[0], best_ss = grid[0];
  for (int a = 0; a < kMixGrid; ++a) {
    const double ua0 = su[a];
    const double ua1 = sigmoid_t(pair_mass - grid[a] - q, temperature);
    for (int b = 0; b < kMixGrid; ++b) {
      const double tv = detail::tv_two_coord(
          ua0, ua1, su[b], sigmoid_t(pair_mass - grid[b] - q, temperature));
      if (tv > best_mix_tv) {
        best_mix_tv = tv;
        best_s = grid[a];
        best_ss = grid[b];
      }
    }
  }
  if (k == 2) {
    // Exhaustive safety net at step 1e-3 across the whole floored interval.
    const int steps = static_cast<int>((1.0 - 2.0 * m) / 1e-3);
    std::vector<double> sfine(steps + 1);
    std::vector<double> ufine(steps + 1);
    std::vector<double> ufine1(steps + 1);
    for (int g = 0; g <= steps; ++g) {
      sfine[g] = m + 1e-3 * g;
      ufine[g] = sigmoid_t(sfine[g] - q, temperature);
      ufine1[g] = sigmoid_t(1.0 - sfine[g] - q, temperature);
    }
    for (int a = 0; a <= steps; ++a) {
      for (int b = 0; b <= steps; ++b) {
        const double tv = detail::tv_two_coord(ufine[a], ufine1[a], ufine[b], ufine1[b]);
        if (tv > best_mix_tv) {
          best_mix_tv = tv;
          best_s = sfine[a];
          best_ss = sfine[b];
        }
      }
    }
  }
  if (best_mix_tv > best_tv) {
    std::vector<double> p(n, m), pp(n, m);
    p[0] = best_s;
    p[1] = pair_mass - best_s;
    pp[0] = best_ss;
    pp[1] = pair_mass - best_ss;
    best_tv = best_mix_tv;
    best_p = std::move(p);
    best_pp = std::move(pp);
  }

  // Local refinement of the best pair found: 200 golden-section steps per
  // simplex argument, spread over searches that cycle the coordinate pairs.
  if (!best_p.empty()) {
    std::vector<std::pair<std::size_t, std::size_t>> coord_pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) coord_pairs.emplace_back(i, j);
    }
    constexpr int kStepsPerSearch = 20;
    constexpr int kTotalSteps = 200;
    for (int done = 0; done < kTotalSteps; done += kStepsPerSearch) {
      const auto [i, j] = coord_pairs[(done / kStepsPerSearch) % coord_pairs.size()];
      detail::golden_refine(best_p, best_pp, i, j, q, temperature, kStepsPerSearch);
      detail::golden_refine(best_pp, best_p, i, j, q, temperature, kStepsPerSearch);
      best_tv = std::max(best_tv, detail::tv_of_vectors(best_p, best_pp, q, temperature));
    }
  }
  return std::sqrt(std::clamp(best_tv, 0.0, 1.0));
}

// Decision-set advantage bound: delta_{T,q} times the CV bound.
inline AdvantageBounds ds_advantage_ub(const UncertaintyProfile& p, double temperature, double q) {
  AdvantageBounds cv = cv_advantage_ub(p);
  const double factor = delta_factor(temperature, q, p.k);
  AdvantageBounds b;
  b.mode = Disclosure::kDs;
  b.raw_exact = factor * cv.raw_exact;
  b.raw_approx = factor * cv.raw_approx;
  b.exact = detail::clip01(b.raw_exact);
  b.approx = detail::clip01(b.raw_approx);
  return b;
}

// Convenience dispatch used by the CLI and sweeps.
inline AdvantageBounds advantage_ub(const UncertaintyProfile& p, const DisclosureMode& mode) {
  validate_mode(mode);
  switch (mode.tag) {
    case Disclosure::kCv: return cv_advantage_ub(p);
    case Disclosure::kTlc: return tlc_advantage_ub(p);
    case Disclosure::kDs: return ds_advantage_ub(p, mode.temperature, mode.q);
  }
  throw ValidationError("advantage_ub: unknown disclosure mode");
}

}  // namespace mialab
