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
#include "mialab/bounds.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "mialab/rng.hpp"

namespace mialab {
namespace {

UncertaintyProfile headline_profile() { return {10, 0.2, 0.5, 0.25}; }

TEST(DirichletKl, IdenticalVectorsGiveZero) {
  const std::vector<double> g{0.7, 1.3, 2.0};
  EXPECT_DOUBLE_EQ(dirichlet_kl(g, g), 0.0);
}

TEST(DirichletKl, HandComputedTwoComponentCase) {
  // ln B(1,1)/B(2,1) + (2-1)(psi(2) - psi(3)) = ln 2 - 1/2.
  const std::vector<double> p{2.0, 1.0};
  const std::vector<double> q{1.0, 1.0};
  EXPECT_NEAR(dirichlet_kl(p, q), 0.19314718055994530942, 1e-13);
}

TEST(DirichletKl, MatchesMonteCarloExpectedLogRatio) {
  const DirichletPair pair = profile_to_pair(headline_profile());
  const double kl = dirichlet_kl(pair.gamma_out, pair.gamma_in);

  // Independent sampling oracle: E_out[ln f_out - ln f_in].
  RngStream rng(2024, 0);
  const int n = 1000000;
  const double c0 = log_multivariate_beta(pair.gamma_in) -
                    log_multivariate_beta(pair.gamma_out);
  std::vector<double> coeff(pair.gamma_out.size());
  for (std::size_t k = 0; k < coeff.size(); ++k) {
    coeff[k] = pair.gamma_out[k] - pair.gamma_in[k];
  }
  std::vector<double> p(pair.gamma_out.size());
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    sample_dirichlet(pair.gamma_out, rng, p);
    double llr = c0;
    for (std::size_t k = 0; k < coeff.size(); ++k) llr += coeff[k] * std::log(p[k]);
    sum += llr;
    sum2 += llr * llr;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, kl, 3.0 * se);
}

TEST(DirichletKl, RejectsBadInput) {
  const std::vector<double> p{1.0, 2.0};
  const std::vector<double> q{1.0, 2.0, 3.0};
  EXPECT_THROW(dirichlet_kl(p, q), ValidationError);
  const std::vector<double> z{1.0, 0.0};
  EXPECT_THROW(dirichlet_kl(p, z), ValidationError);
}

TEST(PinskerAdvantage, HandCases) {
  EXPECT_DOUBLE_EQ(pinsker_advantage_ub({0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(pinsker_advantage_ub({0.5, 0.5}), 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(std::isinf(pinsker_advantage_ub({inf, 0.1})));
}

TEST(PinskerAdvantage, ComposesWithDirichletKl) {
  const std::vector<double> p{2.0, 1.0};
  const std::vector<double> q{1.0, 1.0};
  const DivergencePair div{dirichlet_kl(p, q), dirichlet_kl(q, p)};
  EXPECT_NEAR(pinsker_advantage_ub(div), std::sqrt(div.d_out_in + div.d_in_out), 1e-15);
}

TEST(BetaLbCurve, ZeroDivergencesGiveDiagonal) {
  const std::vector<double> alphas = interior_alpha_grid(99);
  const TradeoffCurve curve = beta_lb_curve({0.0, 0.0}, alphas);
  for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
    EXPECT_NEAR(curve.beta[i], curve.alpha[i], 1e-10);
  }
}

TEST(BetaLbCurve, FeasibleAndBelowDiagonal) {
  const DivergencePair div{0.5, 0.5};
  const std::vector<double> alphas = interior_alpha_grid(199);
  const TradeoffCurve curve = beta_lb_curve(div, alphas);
  double prev = -1.0;
  for (std::size_t i = 0; i < curve.alpha.size(); ++i) {
    const double a = curve.alpha[i];
    const double b = curve.beta[i];
    EXPECT_LE(b, a);
    EXPECT_GE(b, 0.0);
    EXPECT_LE(binary_kl(a, std::max(b, 1e-15)), div.d_out_in + 1e-8);
    EXPECT_LE(binary_kl(b, a), div.d_in_out + 1e-8);
    EXPECT_GE(b, prev - 1e-9);  // nondecreasing in alpha, up to solver resolution
    prev = b;
  }
  // At alpha = 0.9 the bound must be strictly informative.
  EXPECT_LT(curve.beta[179], 0.9 - 1e-3);
}

TEST(BetaLbCurve, RejectsEndpointAlphas) {
  const std::vector<double> zero{0.0};
  const std::vector<double> one{1.0};
  EXPECT_THROW(beta_lb_curve({0.1, 0.1}, zero), ValidationError);
  EXPECT_THROW(beta_lb_curve({0.1, 0.1}, one), ValidationError);
}

TEST(CvAdvantage, ZeroDeltaGivesZero) {
  const AdvantageBounds b = cv_advantage_ub({10, 0.0, 0.5, 0.25});
  EXPECT_DOUBLE_EQ(b.exact, 0.0);
  EXPECT_DOUBLE_EQ(b.approx, 0.0);
}

TEST(CvAdvantage, HeadlineProfileMatchesHandEvaluation) {
  const AdvantageBounds b = cv_advantage_ub(headline_profile());
  // approx = sqrt(0.4 ln 1.5 + 0.225 + 0.04/2.4)
  EXPECT_NEAR(b.approx, 0.63549406756470388, 1e-12);
  EXPECT_NEAR(b.approx, 0.6355, 1e-4);
  EXPECT_NEAR(b.exact, 0.75138713969864989, 1e-12);
}

TEST(CvAdvantage, DigammaRouteAgreesWithKlRoute) {
  const DirichletPair pair = profile_to_pair(headline_profile());
  const double via_kl = pinsker_advantage_ub(pair_divergences(pair));
  const AdvantageBounds b = cv_advantage_ub(headline_profile());
  EXPECT_NEAR(b.raw_exact, via_kl, 1e-9 * via_kl);
}

TEST(TlcAdvantage, HeadlineProfileMatchesHandEvaluation) {
  const AdvantageBounds b = tlc_advantage_ub(headline_profile());
  // approx = sqrt(0.4 ln 1.5 + 0.025 + 0.04/2.4)
  EXPECT_NEAR(b.approx, 0.45150050931303767, 1e-12);
  EXPECT_NEAR(b.approx, 0.4515, 1e-4);
  EXPECT_NEAR(b.exact, 0.45906588500001692, 1e-12);
}

TEST(TlcAdvantage, EqualsCvBoundOfBinaryProfile) {
  // Same knobs at K = 2 (eps_a = 0.5 sits exactly on the K = 2 limit).
  const AdvantageBounds tlc = tlc_advantage_ub(headline_profile());
  const AdvantageBounds cv2 = cv_advantage_ub({2, 0.2, 0.5, 0.25});
  EXPECT_NEAR(tlc.exact, cv2.exact, 1e-12);
  EXPECT_NEAR(tlc.approx, cv2.approx, 1e-12);
}

TEST(TlcAdvantage, NeverExceedsCvBound) {
  for (double delta : {0.05, 0.2, 0.5}) {
    for (double eps_a : {0.4, 0.6, 0.8}) {
      for (double eps_e : {0.05, 0.25, 1.0}) {
        const UncertaintyProfile p{10, delta, eps_a, eps_e};
        if (!profile_is_valid(p)) continue;
        EXPECT_LE(tlc_advantage_ub(p).raw_exact,
                  cv_advantage_ub(p).raw_exact + 1e-12);
      }
    }
  }
}

TEST(AdvantageBoundsShape, ApproxMonotoneInDelta) {
  const double eps_a = 0.5, eps_e = 0.25;
  const double dmax = eps_a / (1.0 - eps_a) - 1e-6;
  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    const double delta = dmax * i / 20.0;
    const AdvantageBounds b = cv_advantage_ub({10, delta, eps_a, eps_e});
    EXPECT_GE(b.raw_approx, prev - 1e-12) << "delta = " << delta;
    prev = b.raw_approx;
  }
}

TEST(AdvantageBoundsShape, ApproxMonotoneInUncertainties) {
  double prev = 2.0;
  for (int i = 0; i < 20; ++i) {
    const double eps_a = 0.35 + (0.85 - 0.35) * i / 19.0;
    const AdvantageBounds b = cv_advantage_ub({10, 0.2, eps_a, 0.25});
    EXPECT_LE(b.raw_approx, prev + 1e-12) << "eps_a = " << eps_a;
    prev = b.raw_approx;
  }
  prev = 2.0;
  for (int i = 0; i < 20; ++i) {
    const double eps_e = 0.05 + i * 0.1;
    const AdvantageBounds b = cv_advantage_ub({10, 0.2, 0.5, eps_e});
    EXPECT_LE(b.raw_approx, prev + 1e-12) << "eps_e = " << eps_e;
    prev = b.raw_approx;
  }
}

TEST(AdvantageBoundsShape, CvTlcGapGrowsWithClassCount) {
  double prev = -1.0;
  for (int k : {2, 4, 8, 16}) {
    const UncertaintyProfile p{k, 0.2, 0.45, 0.25};
    const double gap = cv_advantage_ub(p).raw_approx - tlc_advantage_ub(p).raw_approx;
    EXPECT_GE(gap, prev - 1e-12) << "K = " << k;
    prev = gap;
  }
}

TEST(AdvantageBoundsShape, ApproxCloseToExactInAsymptoticRegime) {
  // All four digamma arguments >= 50 once eps_e is small enough.
  for (double delta : {0.05, 0.15, 0.3}) {
    for (double eps_a : {0.4, 0.5, 0.6}) {
      const double denom = (eps_a * (1.0 + delta) - delta) / 9.0;
      const double eps_e = denom / 60.0;  // smallest argument ~ 60
      const UncertaintyProfile p{10, delta, eps_a, eps_e};
      if (!profile_is_valid(p)) continue;
      const AdvantageBounds b = cv_advantage_ub(p);
      EXPECT_LE(std::abs(b.raw_exact - b.raw_approx), 0.05 * b.raw_exact);
    }
  }
}

TEST(TvProductBernoulli, HandCases) {
  const std::vector<double> u{0.6, 0.4};
  const std::vector<double> v{0.4, 0.6};
  EXPECT_NEAR(tv_product_bernoulli(u, v), 0.2, 1e-14);
  EXPECT_DOUBLE_EQ(tv_product_bernoulli(u, u), 0.0);
  const std::vector<double> e1{1.0, 0.0};
  const std::vector<double> e2{0.0, 1.0};
  EXPECT_DOUBLE_EQ(tv_product_bernoulli(e1, e2), 1.0);
}

TEST(TvProductBernoulli, RejectsOversizedInput) {
  const std::vector<double> u(17, 0.5);
  EXPECT_THROW(tv_product_bernoulli(u, u), ValidationError);
}

TEST(DeltaFactor, SmallTemperatureLimits) {
  EXPECT_GE(delta_factor(1e-4, 0.5, 2), 0.999);
  EXPECT_LE(delta_factor(1e-4, 0.0, 2), 1e-3);
  EXPECT_LE(delta_factor(1e-4, 1.0, 2), 1e-3);
}

TEST(DeltaFactor, LargeTemperatureKillsTheChannel) {
  EXPECT_LE(delta_factor(1e6, 0.5, 2), 1e-3);
  EXPECT_LE(delta_factor(1e6, 0.2, 2), 1e-3);
  EXPECT_LE(delta_factor(1e6, 0.9, 2), 1e-3);
}

TEST(DeltaFactor, DeterministicLimit) {
  EXPECT_DOUBLE_EQ(delta_factor(0.0, 0.2, 2), 1.0);
  EXPECT_DOUBLE_EQ(delta_factor(0.0, 0.0, 2), 0.0);
  EXPECT_DOUBLE_EQ(delta_factor(0.0, 1.0, 2), 0.0);
  EXPECT_DOUBLE_EQ(delta_factor(0.0, 0.2, 10), 1.0);
}

TEST(DeltaFactor, SymmetricUnderThresholdMirror) {
  for (double t : {0.02, 0.1, 0.5}) {
    for (double q : {0.1, 0.3, 0.45}) {
      EXPECT_NEAR(delta_factor(t, q, 2), delta_factor(t, 1.0 - q, 2), 2e-3)
          << "T = " << t << ", q = " << q;
    }
  }
}

TEST(DeltaFactor, MonotoneInTemperatureAtCenteredThreshold) {
  double prev = 2.0;
  for (double t : {1e-4, 0.02, 0.05, 0.1, 0.2}) {
    const double d = delta_factor(t, 0.5, 2);
    EXPECT_LE(d, prev + 1e-9) << "T = " << t;
    prev = d;
  }
}

TEST(DeltaFactor, RejectsBadArguments) {
  EXPECT_THROW(delta_factor(-1.0, 0.5, 2), ValidationError);
  EXPECT_THROW(delta_factor(0.1, 1.5, 2), ValidationError);
  EXPECT_THROW(delta_factor(0.1, 0.5, 1), ValidationError);
  EXPECT_THROW(delta_factor(0.1, 0.5, 17), ValidationError);
}

TEST(DsAdvantage, ZeroDeltaGivesZero) {
  const AdvantageBounds b = ds_advantage_ub({10, 0.0, 0.5, 0.25}, 0.05, 0.2);
  EXPECT_DOUBLE_EQ(b.exact, 0.0);
}

TEST(DsAdvantage, HugeTemperatureGivesVanishingBound) {
  const AdvantageBounds ds = ds_advantage_ub(headline_profile(), 1e6, 0.2);
  const AdvantageBounds cv = cv_advantage_ub(headline_profile());
  EXPECT_LE(ds.raw_exact, 1e-3 * cv.raw_exact);
}

TEST(DsAdvantage, IsDeltaTimesCvBound) {
  const double t = 0.05, q = 0.2;
  const AdvantageBounds ds = ds_advantage_ub(headline_profile(), t, q);
  const AdvantageBounds cv = cv_advantage_ub(headline_profile());
  const double factor = delta_factor(t, q, 10);
  EXPECT_NEAR(ds.raw_exact, factor * cv.raw_exact, 1e-12);
  EXPECT_NEAR(ds.raw_approx, factor * cv.raw_approx, 1e-12);
}

TEST(DsAdvantage, NeverExceedsCvBound) {
  for (double t : {0.0, 0.01, 0.1, 1.0}) {
    for (double q : {0.1, 0.4, 0.7}) {
      const AdvantageBounds ds = ds_advantage_ub(headline_profile(), t, q);
      const AdvantageBounds cv = cv_advantage_ub(headline_profile());
      EXPECT_LE(ds.raw_exact, cv.raw_exact + 1e-12);
    }
  }
}

}  // namespace
}  // namespace mialab
