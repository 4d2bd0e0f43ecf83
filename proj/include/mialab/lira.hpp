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
#include <numeric>
#include <span>
#include <vector>

#include "mialab/error.hpp"
#include "mialab/numerics.hpp"
#include "mialab/parallel.hpp"
#include "mialab/rng.hpp"
#include "mialab/tradeoff.hpp"
#include "mialab/uncertainty.hpp"

namespace mialab {

// Joint PMFs of the decision-set bit vector under both hypotheses; outcome
// index bit k carries the inclusion bit of label k.
struct DsPmfPair {
  int k = 0;
  std::vector<double> pmf_out;
  std::vector<double> pmf_in;
};

namespace detail {

// Precomputed coefficients of the Dirichlet log-likelihood ratio
// ln f_out(p) - ln f_in(p) = constant + sum_k coeff_k ln p_k.
struct LlrCoefficients {
  double constant = 0.0;
  std::vector<double> coeff;

  explicit LlrCoefficients(const DirichletPair& pair) {
    constant = log_multivariate_beta(pair.gamma_in) -
               log_multivariate_beta(pair.gamma_out);
    coeff.resize(pair.gamma_out.size());
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      coeff[k] = pair.gamma_out[k] - pair.gamma_in[k];
    }
  }

  // Evaluates the LLR; `clamped` counts components that hit the log floor.
  double operator()(std::span<const double> p, std::uint64_t* clamped = nullptr) const {
    double acc = constant;
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      double x = p[k];
      if (x < kLogFloor) {
        x = kLogFloor;
        if (clamped) ++*clamped;
      }
      acc += coeff[k] * std::log(x);
    }
    return acc;
  }
};

inline DirichletPair aggregate_tlc_pair(const DirichletPair& pair) {
  validate_pair(pair);
  const double so = pair.sum_out();
  const double si = pair.sum_in();
  DirichletPair two;
  two.gamma_out = {pair.gamma_out[0], so - pair.gamma_out[0]};
  two.gamma_in = {pair.gamma_in[0], si - pair.gamma_in[0]};
  return two;
}

}  // namespace detail

// LLR of a full confidence vector under the out/in Dirichlet models.
// Components below the log floor are clamped before the logarithm.
inline double llr_cv(std::span<const double> p, const DirichletPair& pair) {
  validate_pair(pair);
  if (p.size() != pair.gamma_out.size()) {
    throw ValidationError("llr_cv: observation length does not match the pair");
  }
  return detail::LlrCoefficients(pair)(p);
}

// LLR of the true-label confidence alone: the marginal of component 0 is
// Beta(gamma_0, sum of the rest), so this is the two-component CV ratio
// evaluated at (p0, 1-p0).
inline double llr_tlc(double p0, const DirichletPair& pair) {
  const DirichletPair two = detail::aggregate_tlc_pair(pair);
  const double q0 = std::clamp(p0, 0.0, 1.0);
  const std::array<double, 2> obs{q0, 1.0 - q0};
  return detail::LlrCoefficients(two)(obs);
}

// Estimates the decision-set outcome PMFs under both hypotheses by averaging
// the conditional outcome probabilities of the randomized threshold channel
// over Dirichlet draws (not by counting sampled outcomes). Deterministic for
// a given stream and independent of the thread count.
inline DsPmfPair ds_pmfs(const DirichletPair& pair, const DisclosureMode& mode,
                         std::uint64_t n_mc, RngStream rng, int threads = 1) {
  validate_pair(pair);
  validate_mode(mode);
  if (mode.tag != Disclosure::kDs) {
    throw ValidationError("ds_pmfs: mode must be DS");
  }
  const int k = pair.k();
  if (k > 16) {
    throw ValidationError("ds_pmfs: K > 16 outcomes are not enumerable");
  }
  if (n_mc < 10000) {
    throw ValidationError("ds_pmfs: need at least 1e4 Monte Carlo draws");
  }
  const std::size_t n_outcomes = std::size_t{1} << k;
  constexpr std::uint64_t kBlock = 16384;
  const std::uint64_t n_blocks = (n_mc + kBlock - 1) / kBlock;

  DsPmfPair result;
  result.k = k;
  result.pmf_out.assign(n_outcomes, 0.0);
  result.pmf_in.assign(n_outcomes, 0.0);

  for (int h = 0; h < 2; ++h) {
    const std::vector<double>& gamma = (h == 0) ? pair.gamma_out : pair.gamma_in;
    std::vector<double>& pmf = (h == 0) ? result.pmf_out : result.pmf_in;
    std::vector<std::vector<double>> partial(n_blocks);
    parallel_for(n_blocks, threads, [&](std::uint64_t b) {
      RngStream sub = rng.derive(static_cast<std::uint64_t>(h) * n_blocks + b);
      const std::uint64_t lo = b * kBlock;
      const std::uint64_t hi = std::min(n_mc, lo + kBlock);
      std::vector<double> acc(n_outcomes, 0.0);
      std::vector<double> p(k);
      std::vector<double> outcome(n_outcomes);
      for (std::uint64_t i = lo; i < hi; ++i) {
        sample_dirichlet(gamma, sub, p);
        // Tensor expansion of prod_k Bern(sigmoid_T(p_k - q)) over all 2^K
        // bit patterns; bit k of the outcome index is the label-k bit.
        outcome[0] = 1.0;
        std::size_t len = 1;
        for (int kk = 0; kk < k; ++kk) {
          const double s = sigmoid_t(p[kk] - mode.q, mode.temperature);
          for (std::size_t j = len; j-- > 0;) {
            const double base = outcome[j];
            outcome[j + len] = base * s;
            outcome[j] = base * (1.0 - s);
          }
          len <<= 1;
        }
        for (std::size_t j = 0; j < n_outcomes; ++j) acc[j] += outcome[j];
      }
      partial[b] = std::move(acc);
    });
    // Merge in block order so the sum is schedule-independent.
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
      for (std::size_t j = 0; j < n_outcomes; ++j) pmf[j] += partial[b][j];
    }
    const double inv = 1.0 / static_cast<double>(n_mc);
    for (std::size_t j = 0; j < n_outcomes; ++j) pmf[j] *= inv;
  }
  return result;
}

namespace detail {

// Empirical randomized likelihood-ratio test: for each target TNR alpha,
// pick the threshold straddling the (1-alpha) quantile of the out-hypothesis
// LLRs and randomize on ties so alpha is met exactly, then report the
// in-hypothesis acceptance mass. Both arrays must be sorted ascending.
inline double beta_at_alpha_empirical(const std::vector<double>& llr_out_sorted,
                                      const std::vector<double>& llr_in_sorted,
                                      double alpha) {
  const std::size_t n = llr_out_sorted.size();
  const std::size_t m = llr_in_sorted.size();
  const double target = alpha * static_cast<double>(n);
  std::size_t idx = static_cast<std::size_t>((1.0 - alpha) * static_cast<double>(n));
  if (idx >= n) idx = n - 1;
  const double tau = llr_out_sorted[idx];
  const auto out_range = std::equal_range(llr_out_sorted.begin(), llr_out_sorted.end(), tau);
  const double out_gt = static_cast<double>(llr_out_sorted.end() - out_range.second);
  const double out_eq = static_cast<double>(out_range.second - out_range.first);
  double theta = out_eq > 0.0 ? (target - out_gt) / out_eq : 0.0;
  theta = std::clamp(theta, 0.0, 1.0);
  const auto in_range = std::equal_range(llr_in_sorted.begin(), llr_in_sorted.end(), tau);
  const double in_gt = static_cast<double>(llr_in_sorted.end() - in_range.second);
  const double in_eq = static_cast<double>(in_range.second - in_range.first);
  return (in_gt + theta * in_eq) / static_cast<double>(m);
}

// Exact randomized ROC of the discrete decision-set channel: outcomes sorted
// by LLR, fractional inclusion of the boundary outcome.
inline double beta_at_alpha_discrete(const std::vector<double>& out_sorted,
                                     const std::vector<double>& in_sorted,
                                     double alpha) {
  // out_sorted/in_sorted carry outcome masses ordered by decreasing LLR.
  double co = 0.0, ci = 0.0;
  for (std::size_t j = 0; j < out_sorted.size(); ++j) {
    if (co + out_sorted[j] >= alpha) {
      const double f = out_sorted[j] > 0.0 ? (alpha - co) / out_sorted[j] : 0.0;
      return ci + f * in_sorted[j];
    }
    co += out_sorted[j];
    ci += in_sorted[j];
  }
  return 1.0;
}

}  // namespace detail

// Monte Carlo realization of the likelihood-ratio attack trade-off.
//
// CV/TLC: n_samples observations are drawn under each hypothesis in fixed
// blocks (block ownership of derived rng streams makes the result
// independent of the thread count); the empirical randomized LRT is then
// evaluated on the requested alpha grid. DS: the exact randomized ROC of the
// discrete channel is computed from ds_pmfs with n_mc = max(1e4,
// n_samples/10) draws.
inline TradeoffCurve simulate_tradeoff(const DirichletPair& pair, const DisclosureMode& mode,
                                       std::uint64_t n_samples, std::span<const double> alphas,
                                       RngStream rng, int threads = 1) {
  validate_pair(pair);
  validate_mode(mode);
  if (alphas.size() < 512) {
    throw ValidationError("simulate_tradeoff: alpha grid needs at least 512 points");
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) {
      throw ValidationError("simulate_tradeoff: alpha grid must lie inside (0,1)");
    }
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw ValidationError("simulate_tradeoff: alpha grid must be ascending");
    }
  }

  TradeoffCurve curve;
  curve.mode = mode;
  curve.seed = rng.seed();
  curve.alpha.assign(alphas.begin(), alphas.end());
  curve.beta.resize(alphas.size());

  if (mode.tag == Disclosure::kDs) {
    const std::uint64_t n_mc = std::max<std::uint64_t>(10000, n_samples / 10);
    const DsPmfPair pmfs = ds_pmfs(pair, mode, n_mc, rng, threads);
    curve.n_samples = n_mc;
    // Order outcomes by decreasing LLR; zero/zero outcomes never occur and
    // are dropped. Ties are broken by outcome index for determinism.
    const std::size_t n_outcomes = pmfs.pmf_out.size();
    std::vector<std::size_t> order;
    order.reserve(n_outcomes);
    for (std::size_t j = 0; j < n_outcomes; ++j) {
      if (pmfs.pmf_out[j] > 0.0 || pmfs.pmf_in[j] > 0.0) order.push_back(j);
    }
    auto llr_of = [&](std::size_t j) {
      if (pmfs.pmf_in[j] == 0.0) return std::numeric_limits<double>::infinity();
      if (pmfs.pmf_out[j] == 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(pmfs.pmf_out[j] / pmfs.pmf_in[j]);
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double la = llr_of(a);
      const double lb = llr_of(b);
      if (la != lb) return la > lb;
      return a < b;
    });
    std::vector<double> out_sorted(order.size());
    std::vector<double> in_sorted(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
      out_sorted[j] = pmfs.pmf_out[order[j]];
      in_sorted[j] = pmfs.pmf_in[order[j]];
    }
    // Normalize away Monte Carlo rounding so the ROC ends exactly at (1,1).
    const double so = std::accumulate(out_sorted.begin(), out_sorted.end(), 0.0);
    const double si = std::accumulate(in_sorted.begin(), in_sorted.end(), 0.0);
    for (double& x : out_sorted) x /= so;
    for (double& x : in_sorted) x /= si;
    for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
      curve.beta[i] = detail::beta_at_alpha_discrete(out_sorted, in_sorted, curve.alpha[i]);
    }
    return curve;
  }

  // CV / TLC Monte Carlo path.
  if (n_samples < 100000) {
    throw ValidationError("simulate_tradeoff: CV/TLC need n_samples >= 1e5");
  }
  const DirichletPair sim_pair =
      (mode.tag == Disclosure::kTlc) ? detail::aggregate_tlc_pair(pair) : pair;
  const detail::LlrCoefficients llr(sim_pair);
  const int k = sim_pair.k();

  constexpr std::uint64_t kBlock = 16384;
  const std::uint64_t n_blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<double> llr_out(n_samples);
  std::vector<double> llr_in(n_samples);
  std::vector<std::uint64_t> clamp_counts(2 * n_blocks, 0);
  parallel_for(2 * n_blocks, threads, [&](std::uint64_t task) {
    const bool in_hypothesis = task >= n_blocks;
    const std::uint64_t b = in_hypothesis ? task - n_blocks : task;
    RngStream sub = rng.derive(task);
    const std::vector<double>& gamma =
        in_hypothesis ? sim_pair.gamma_in : sim_pair.gamma_out;
    std::vector<double>& dest = in_hypothesis ? llr_in : llr_out;
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(n_samples, lo + kBlock);
    std::vector<double> p(k);
    std::uint64_t clamped = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      sample_dirichlet(gamma, sub, p);
      dest[i] = llr(p, &clamped);
    }
    clamp_counts[task] = clamped;
  });
  curve.n_samples = n_samples;
  for (std::uint64_t c : clamp_counts) curve.clamped_components += c;

  std::sort(llr_out.begin(), llr_out.end());
  std::sort(llr_in.begin(), llr_in.end());
  for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
    curve.beta[i] = detail::beta_at_alpha_empirical(llr_out, llr_in, curve.alpha[i]);
  }
  return curve;
}

// Expected decision-set size E[sum_k sigmoid_T(p_k - q)] under one
// hypothesis, by Monte Carlo over Dirichlet draws.
inline double expected_set_size(const DirichletPair& pair, double q, double temperature,
                                Hypothesis hypothesis, std::uint64_t n_mc, RngStream rng) {
  validate_pair(pair);
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ValidationError("expected_set_size: q must lie in [0,1]");
  }
  if (!(temperature >= 0.0)) {
    throw ValidationError("expected_set_size: temperature must be >= 0");
  }
  if (n_mc < 10000) {
    throw ValidationError("expected_set_size: need at least 1e4 draws");
  }
  const std::vector<double>& gamma =
      (hypothesis == Hypothesis::kOut) ? pair.gamma_out : pair.gamma_in;
  std::vector<double> p(pair.k());
  double acc = 0.0;
  for (std::uint64_t i = 0; i < n_mc; ++i) {
    sample_dirichlet(gamma, rng, p);
    for (double x : p) acc += sigmoid_t(x - q, temperature);
  }
  return acc / static_cast<double>(n_mc);
}

}  // namespace mialab
