#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"
#include "wvcal/density.hpp"
#include "wvcal/error.hpp"
#include "wvcal/synth.hpp"

namespace wvcal {
namespace {

TEST(Logit, ClosedForms) {
  EXPECT_EQ(logit(0.5), 0.0);
  EXPECT_NEAR(logit(0.75), std::log(3.0), 1e-15);
  // Direct evaluation at the clamp boundary: ln(999999).
  EXPECT_NEAR(logit(0.999999), static_cast<double>(std::log(999999.0L)), 1e-9);
  EXPECT_NEAR(logit(0.999999), 13.8155, 1e-4);
}

TEST(Logit, DomainError) {
  for (double p : {0.0, 1.0, -0.1, 1.5}) {
    try {
      logit(p);
      FAIL() << p;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::domain);
    }
  }
}

TEST(Sigmoid, ClosedFormsAndInverse) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
  EXPECT_NEAR(sigmoid(-std::log(3.0)), 0.25, 1e-15);
  for (double p = kScoreEpsilon; p < 1.0; p += 0.0137) {
    EXPECT_NEAR(sigmoid(logit(p)), p, 1e-12);
  }
  EXPECT_NEAR(sigmoid(logit(1.0 - kScoreEpsilon)), 1.0 - kScoreEpsilon, 1e-12);
}

TEST(SilvermanBandwidth, ClosedFormAtThirtyTwoSamples) {
  // 16 points at -a and 16 at +a with a = sqrt(31/32): sample sd = 1 and
  // IQR = 2a > 1.34, so h = 0.9 * 32^(-1/5) = 0.45.
  const double a = std::sqrt(31.0 / 32.0);
  std::vector<double> xs(32);
  for (int i = 0; i < 32; ++i) xs[i] = i < 16 ? -a : a;
  EXPECT_NEAR(silverman_bandwidth(xs), 0.45, 1e-12);
}

TEST(SilvermanBandwidth, Fallbacks) {
  std::vector<double> one{0.3};
  EXPECT_EQ(silverman_bandwidth(one), 1.0);
  std::vector<double> same(10, 2.5);
  EXPECT_EQ(silverman_bandwidth(same), 1.0);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{}), Error);
}

TEST(SilvermanBandwidth, UsesIqrWhenSmaller) {
  // Heavy tails: sd large, IQR small.
  std::vector<double> xs{-100, 0, 0.1, 0.2, 0.3, 0.4, 0.5, 100};
  const double h = silverman_bandwidth(xs);
  // type-7 quartiles: h=1.75 -> 0.075, h=5.25 -> 0.425
  EXPECT_NEAR(h, 0.9 * (0.35 / 1.34) * std::pow(8.0, -0.2), 1e-12);
}

TEST(FitKde, CentersAreLogits) {
  auto m = fit_kde(std::vector<double>{0.5}, 1.0);
  EXPECT_EQ(m.centers(), std::vector<double>{0.0});
  EXPECT_EQ(m.bandwidth(), 1.0);

  auto m2 = fit_kde(std::vector<double>{0.2, 0.8});
  ASSERT_EQ(m2.centers().size(), 2u);
  EXPECT_NEAR(m2.centers()[0], -1.3863, 1e-4);
  EXPECT_NEAR(m2.centers()[1], 1.3863, 1e-4);
  EXPECT_NEAR(m2.centers()[0], -m2.centers()[1], 1e-12);

  EXPECT_THROW(fit_kde(std::vector<double>{}), Error);
  EXPECT_THROW(KdeModel({0.0}, 0.0), Error);
  EXPECT_THROW(KdeModel({}, 1.0), Error);
}

TEST(FitKde, DeterministicFromSeededDraws) {
  auto draw = [] {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(0.3, 1.2);
    std::vector<double> ps;
    for (int i = 0; i < 1000; ++i) ps.push_back(sigmoid(normal(rng)));
    return fit_kde(ps);
  };
  EXPECT_EQ(draw(), draw());
}

TEST(LogDensity, SingleCenterAtDistanceZero) {
  KdeModel m({0.0}, 1.0);
  // Gaussian kernel at its center: 1/sqrt(2 pi).
  EXPECT_NEAR(log_density(m, 0.5), -0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(log_density(m, 0.5), -0.9189, 1e-4);
}

TEST(LogDensity, SymmetricModelIsSymmetric) {
  KdeModel m({-1.0, 1.0}, 1.0);
  for (double p : {0.1, 0.3, 0.45, 0.77}) {
    EXPECT_NEAR(log_density(m, p), log_density(m, 1.0 - p), 1e-12);
  }
}

TEST(LogDensity, FiniteEverywhereWithFloor) {
  KdeModel m({-13.0}, 0.01);
  const double far = log_density(m, 1.0 - kScoreEpsilon);
  EXPECT_TRUE(std::isfinite(far));
  EXPECT_NEAR(far, std::log(1e-300), 1e-9);
  EXPECT_TRUE(std::isfinite(log_density(m, kScoreEpsilon)));
}

TEST(LogDensity, MatchesDirectSummation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<double> centers;
  for (int i = 0; i < 50; ++i) centers.push_back(normal(rng));
  KdeModel m(centers, 0.7);
  for (double p : {0.05, 0.3, 0.5, 0.9}) {
    double direct = 0.0;
    for (double c : centers) {
      const double z = (logit(p) - c) / 0.7;
      direct += std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    }
    direct /= 50 * 0.7;
    EXPECT_NEAR(log_density(m, p), std::log(direct), 1e-12);
  }
}

TEST(LogDensity, IntegratesToOneOnLogitAxis) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.5, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> ps;
    for (int i = 0; i < 200; ++i) ps.push_back(clamp_score(sigmoid(normal(rng))));
    const auto m = fit_kde(ps);
    const auto [lo, hi] = std::minmax_element(m.centers().begin(), m.centers().end());
    const double h = m.bandwidth();
    const double integral = testing::trapezoid(
        [&](double x) { return std::exp(m.log_density_logit(x)); }, *lo - 8 * h, *hi + 8 * h, 10000);
    EXPECT_NEAR(integral, 1.0, 1e-3);
  }
}

TEST(LogDensity, ContinuousOnFineGrid) {
  // |d/dx log f| <= max |x - c| / h^2 for a Gaussian mixture.
  KdeModel m({-2.0, -0.5, 0.0, 1.7}, 0.4);
  const double step = 1e-3;
  double prev = m.log_density_logit(-6.0);
  for (double x = -6.0 + step; x <= 6.0; x += step) {
    const double cur = m.log_density_logit(x);
    const double bound = (std::abs(x) + 2.0 + step) / (0.4 * 0.4) * step;
    EXPECT_LE(std::abs(cur - prev), bound + 1e-12) << x;
    prev = cur;
  }
}

TEST(LogDensityRatio, IdentityAndMirror) {
  KdeModel a({-1.0, 0.3, 2.0}, 0.5);
  KdeModel mirrored({1.0, -0.3, -2.0}, 0.5);
  for (double p : {0.1, 0.4, 0.5, 0.8}) {
    EXPECT_EQ(log_density_ratio(a, a, p), 0.0);
    EXPECT_NEAR(log_density_ratio(a, mirrored, p), -log_density_ratio(a, mirrored, 1.0 - p), 1e-10);
  }
}

TEST(LogDensityRatio, RecoversBetaRatioFromSyntheticDraws) {
  // Beta(2,1) vs Beta(1,2) has density ratio p/(1-p); the logit-axis KDE
  // ratio should match it because the change-of-variable Jacobian cancels.
  std::mt19937_64 rng(2024);
  std::gamma_distribution<double> g1(1.0), g2(2.0);
  std::vector<double> correct, incorrect;
  for (int i = 0; i < 10000; ++i) {
    const double x2 = g2(rng), x1 = g1(rng);
    correct.push_back(clamp_score(x2 / (x2 + x1)));
    const double y1 = g1(rng), y2 = g2(rng);
    incorrect.push_back(clamp_score(y1 / (y1 + y2)));
  }
  const auto f1 = fit_kde(correct), f0 = fit_kde(incorrect);
  EXPECT_NEAR(log_density_ratio(f1, f0, 0.75), std::log(3.0), 0.15);
  EXPECT_NEAR(log_density_ratio(f1, f0, 0.5), 0.0, 0.15);
}

}  // namespace
}  // namespace wvcal
