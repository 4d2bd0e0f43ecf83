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
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "mialab/error.hpp"

namespace mialab {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008;

// Floor applied to probabilities before taking logs. Saturated softmax
// outputs and extreme Dirichlet draws can underflow to exact zero in double
// precision; clamping keeps log-likelihood ratios finite, and callers count
// how often the floor was hit.
inline constexpr double kLogFloor = 1e-300;

namespace detail {

inline void require_positive_finite(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw ValidationError(std::string(fn) + ": argument must be positive and finite");
  }
}

}  // namespace detail

// Natural log of the Gamma function for x > 0, via the Lanczos approximation
// (g = 7, 9 coefficients). Arguments below 1/2 are lifted with the recurrence
// ln G(x) = ln G(x+1) - ln x, which keeps the approximation in its sweet spot.
inline double log_gamma(double x) {
  detail::require_positive_finite(x, "log_gamma");
  if (x < 0.5) {
    return log_gamma(x + 1.0) - std::log(x);
  }
  static constexpr double kCoef[9] = {
      0.99999999999980993,    676.5203681218851,    -1259.1392167224028,
      771.32342877765313,     -176.61502916214059,  12.507343278686905,
      -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};
  const double z = x - 1.0;
  double series = kCoef[0];
  for (int i = 1; i < 9; ++i) {
    series += kCoef[i] / (z + static_cast<double>(i));
  }
  const double t = z + 7.5;  // z + g + 1/2
  constexpr double kHalfLogTwoPi = 0.91893853320467274178032973640562;
  return kHalfLogTwoPi + (z + 0.5) * std::log(t) - t + std::log(series);
}

// Digamma psi(x) = d/dx ln G(x) for x > 0. Upward recurrence
// psi(x) = psi(x+1) - 1/x until x >= 6, then the asymptotic series with
// eight Bernoulli terms; the truncation error at x = 6 is below 1e-13.
inline double digamma(double x) {
  detail::require_positive_finite(x, "digamma");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double z = inv * inv;
  // B_{2n}/(2n) for n = 1..8
  const double tail =
      z * (1.0 / 12.0 -
           z * (1.0 / 120.0 -
                z * (1.0 / 252.0 -
                     z * (1.0 / 240.0 -
                          z * (1.0 / 132.0 -
                               z * (691.0 / 32760.0 -
                                    z * (1.0 / 12.0 - z * (3617.0 / 8160.0))))))));
  return acc + std::log(x) - 0.5 * inv - tail;
}

// Trigamma psi'(x) for x > 0; same recurrence-plus-asymptotic scheme.
// Only accuracy ~1e-12 is needed (Newton steps in digamma_inverse).
inline double trigamma(double x) {
  detail::require_positive_finite(x, "trigamma");
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double z = inv * inv;
  // psi'(x) ~ 1/x + 1/(2x^2) + sum B_{2n} x^{-2n-1}
  const double series =
      z * inv * (1.0 / 6.0 -
                 z * (1.0 / 30.0 -
                      z * (1.0 / 42.0 -
                           z * (1.0 / 30.0 -
                                z * (5.0 / 66.0 -
                                     z * (691.0 / 2730.0 - z * (7.0 / 6.0)))))));
  return acc + inv + 0.5 * z + series;
}

// Inverse of the digamma function: returns x > 0 with |psi(x) - y| <= 1e-10.
// Initialization follows the usual two-branch guess (exp(y)+1/2 for the
// log-like regime, -1/(y+EulerGamma) near the pole), refined by Newton.
inline double digamma_inverse(double y) {
  if (!std::isfinite(y)) {
    throw ValidationError("digamma_inverse: argument must be finite");
  }
  double x = (y >= -2.22) ? std::exp(std::min(y, 690.0)) + 0.5 : -1.0 / (y + kEulerGamma);
  if (!(x > 0.0)) x = 1e-300;
  for (int iter = 0; iter < 100; ++iter) {
    const double f = digamma(x) - y;
    if (std::abs(f) <= 1e-12) break;
    double next = x - f / trigamma(x);
    if (!(next > 0.0)) next = x * 0.5;  // keep the iterate in the domain
    if (next == x) break;
    x = next;
  }
  return x;
}

// ln B(gamma) = sum_k ln G(gamma_k) - ln G(sum_k gamma_k).
inline double log_multivariate_beta(std::span<const double> gamma) {
  if (gamma.size() < 2) {
    throw ValidationError("log_multivariate_beta: need at least two components");
  }
  double sum = 0.0;
  double acc = 0.0;
  for (double g : gamma) {
    detail::require_positive_finite(g, "log_multivariate_beta");
    sum += g;
    acc += log_gamma(g);
  }
  return acc - log_gamma(sum);
}

// Binary KL divergence d(a||b) in nats, with the 0 ln 0 = 0 convention.
// Returns +inf when b is degenerate and disagrees with a.
inline double binary_kl(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0)) {
    throw ValidationError("binary_kl: arguments must lie in [0,1]");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double result = 0.0;
  if (a > 0.0) {
    if (b == 0.0) return kInf;
    result += a * std::log(a / b);
  }
  if (a < 1.0) {
    if (b == 1.0) return kInf;
    result += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  }
  return result < 0.0 ? 0.0 : result;  // guard rounding for a ~ b
}

// Sigmoid with temperature, 1/(1 + exp(-x/T)); temperature 0 is the hard
// threshold indicator, with value 1/2 exactly at the step (the randomized
// threshold channel flips a fair coin for components sitting on the
// threshold, and the deterministic limit keeps that convention).
inline double sigmoid_t(double x, double temperature) {
  if (temperature == 0.0) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return 0.0;
    return 0.5;
  }
  const double z = x / temperature;
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Bisection root finder for a monotone function bracketing zero on [lo, hi].
// Stops when the bracket width drops below tol; at most 200 halvings.
template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) {
    throw ValidationError("bisect: tolerance must be positive");
  }
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw ComputationError("bisect: interval endpoints do not bracket a root");
  }
  for (int iter = 0; iter < 200 && (hi - lo) > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mialab
