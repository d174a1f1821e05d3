#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "balnet/quadrature.hpp"
#include "oracles.hpp"

using namespace balnet;

namespace {

// E[X^k] for X ~ N(m, V) by the binomial expansion over central moments.
double gaussian_raw_moment(int k, double m, double v) {
  double total = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j % 2 == 0) {
      double central = 1.0;
      for (int r = j - 1; r > 0; r -= 2) central *= r;
      total += binom * std::pow(m, k - j) * central * std::pow(v, j / 2);
    }
    binom = binom * (k - j) / (j + 1);
  }
  return total;
}

}  // namespace

TEST(GaussHermite, WeightsSumToSqrtPi) {
  for (int p : {1, 2, 5, 40, 100, 256, 400}) {
    const GaussHermiteRule<double> rule(p);
    EXPECT_NEAR(rule.weights().sum(), std::sqrt(std::numbers::pi), 1e-13) << "order " << p;
  }
}

TEST(GaussHermite, NodesAreSymmetric) {
  const GaussHermiteRule<double> rule(41);
  for (int i = 0; i < rule.order(); ++i) {
    EXPECT_EQ(rule.nodes()(i), -rule.nodes()(rule.order() - 1 - i));
    EXPECT_EQ(rule.weights()(i), rule.weights()(rule.order() - 1 - i));
  }
  EXPECT_EQ(rule.nodes()(20), 0.0);
}

TEST(GaussHermite, ExactForPolynomialsUpToDegree2pMinus1) {
  const int p = 12;
  const GaussHermiteRule<double> rule(p);
  const GaussianLaw<double> law{0.3, 1.7};
  for (int k = 0; k <= 2 * p - 1; ++k) {
    const double exact = gaussian_raw_moment(k, law.mean, law.variance);
    const double q = expect(rule, law, [k](double y) { return std::pow(y, k); });
    EXPECT_NEAR(q, exact, 1e-12 * std::max(1.0, std::abs(exact))) << "degree " << k;
  }
}

TEST(GaussHermite, MatchesTrapezoidOracleOnTanhIntegrands) {
  const auto& rule = default_rule();
  for (double m : {-0.7, 0.2, 1.0}) {
    for (double v : {0.05, 0.5, 1.0, 2.0}) {
      const GaussianLaw<double> law{m, v};
      const auto tanh_fn = [](double y) { return std::tanh(y); };
      const auto sech2 = [](double y) { const double t = std::tanh(y); return 1.0 - t * t; };
      const double ref_t = oracle::trapezoid_expectation(m, v, tanh_fn);
      const double ref_s = oracle::trapezoid_expectation(m, v, sech2);
      EXPECT_NEAR(expect(rule, law, tanh_fn), ref_t, 1e-10 * std::abs(ref_t)) << m << " " << v;
      EXPECT_NEAR(expect(rule, law, sech2), ref_s, 1e-10 * std::abs(ref_s)) << m << " " << v;
    }
  }
}

TEST(GaussHermite, TanhExpectationMatchesHighPrecisionValue) {
  // E[tanh(y)], y ~ N(1, 2), from 30-digit adaptive quadrature.
  const double expected = 0.45212439044997486948;
  EXPECT_NEAR(expect(default_rule(), GaussianLaw<double>{1.0, 2.0}, [](double y) { return std::tanh(y); }), expected,
              1e-12);
}

TEST(GaussHermite, RefinementChangesLittleForModerateVariance) {
  const GaussHermiteRule<double> fine(512);
  for (double v : {0.1, 1.0, 2.0}) {
    const GaussianLaw<double> law{0.4, v};
    const auto g = [](double y) { return std::tanh(0.5 * y - 0.1); };
    EXPECT_LT(std::abs(expect(default_rule(), law, g) - expect(fine, law, g)), 1e-12);
  }
}

TEST(GaussHermite, MomentWeightsMatchFiniteDifferences) {
  const auto& rule = default_rule();
  const auto g = [](double y) { return std::tanh(1.3 * y); };
  const double m = 0.35, v = 0.8, h = 1e-5;
  const auto e = [&](double mm, double vv) { return expect(rule, GaussianLaw<double>{mm, vv}, g); };
  const double dm = (e(m + h, v) - e(m - h, v)) / (2 * h);
  const double dv = (e(m, v + h) - e(m, v - h)) / (2 * h);
  const GaussianLaw<double> law{m, v};
  EXPECT_NEAR(expect_moment_weighted(rule, law, g, MomentWeight::ShiftOverV), dm, 1e-8);
  EXPECT_NEAR(expect_moment_weighted(rule, law, g, MomentWeight::VarianceScore), dv, 1e-8);
  // Gaussian integration by parts: ∂_m E[g] = E[g'].
  const auto gp = [](double y) { const double t = std::tanh(1.3 * y); return 1.3 * (1.0 - t * t); };
  EXPECT_NEAR(expect_moment_weighted(rule, law, g, MomentWeight::ShiftOverV), expect(rule, law, gp), 1e-12);
}

TEST(GaussHermite, RejectsNonPositiveVariance) {
  const auto g = [](double y) { return y; };
  EXPECT_THROW(expect(default_rule(), GaussianLaw<double>{0.0, 0.0}, g), NonPositiveVariance);
  EXPECT_THROW(expect(default_rule(), GaussianLaw<double>{0.0, -1.0}, g), NonPositiveVariance);
  EXPECT_THROW(density(GaussianLaw<double>{0.0, 0.0}, 0.0), NonPositiveVariance);
}

TEST(GaussHermite, LongDoubleRuleAgreesWithDouble) {
  const GaussHermiteRule<long double> rule_ld(64);
  const GaussHermiteRule<double> rule_d(64);
  const long double e_ld = expect(rule_ld, GaussianLaw<long double>{0.5L, 0.7L}, [](long double y) { return std::tanh(y); });
  const double e_d = expect(rule_d, GaussianLaw<double>{0.5, 0.7}, [](double y) { return std::tanh(y); });
  EXPECT_NEAR(static_cast<double>(e_ld), e_d, 1e-14);
}
