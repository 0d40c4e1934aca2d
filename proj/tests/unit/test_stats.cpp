#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "loctime/error.hpp"
#include "loctime/stats.hpp"

using namespace loctime;

TEST(KsStatistic, PointMassMatchesConstantSample) {
  const std::vector<double> s(50, 2.5);
  const auto point_mass = [](double x) { return x >= 2.5 ? 1.0 : 0.0; };
  EXPECT_EQ(ks_statistic(s, point_mass), 0.0);
}

TEST(KsStatistic, SinglePointAgainstHalfNormal) {
  const std::vector<double> s{0.0};
  EXPECT_DOUBLE_EQ(ks_statistic(s, levy_reference_cdf(1.0)), 1.0);
}

TEST(KsStatistic, EmptySample) {
  try {
    ks_statistic(std::vector<double>{}, levy_reference_cdf(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySample);
  }
  EXPECT_THROW(ks_two_sample(std::vector<double>{}, std::vector<double>{1.0}), Error);
}

TEST(KsStatistic, HandComputedUniform) {
  const std::vector<double> s{0.1, 0.4, 0.7};
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  // gaps: |1/3-0.1|, |0.1-0|, |2/3-0.4|, |0.4-1/3|, |1-0.7|, |0.7-2/3|
  EXPECT_NEAR(ks_statistic(s, uniform), 0.3, 1e-15);
}

TEST(KsStatistic, SampleFromReferenceIsClose) {
  // |Z|/σ drawn by an independent generator
  for (const double sigma2 : {0.5, 1.0, 4.0}) {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> s(100000);
    for (auto& v : s) v = std::abs(z(gen)) / std::sqrt(sigma2);
    std::sort(s.begin(), s.end());
    EXPECT_LT(ks_statistic(s, levy_reference_cdf(sigma2)), 1.95 / std::sqrt(1e5));
    // the wrong variance is detected
    EXPECT_GT(ks_statistic(s, levy_reference_cdf(1.21 * sigma2)), 0.02);
  }
}

TEST(KsTwoSample, Basics) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> b{3.0, 4.0, 5.0, 6.0};
  EXPECT_DOUBLE_EQ(ks_two_sample(a, b), 0.5);
  EXPECT_DOUBLE_EQ(ks_two_sample(a, a), 0.0);
  const std::vector<double> c{10.0};
  EXPECT_DOUBLE_EQ(ks_two_sample(a, c), 1.0);
}

TEST(LevyReference, Values) {
  const auto f1 = levy_reference_cdf(1.0);
  EXPECT_NEAR(f1(1.0), 0.682689492137086, 1e-12);
  EXPECT_EQ(f1(0.0), 0.0);
  EXPECT_EQ(f1(-1.0), 0.0);
  EXPECT_NEAR(f1(40.0), 1.0, 1e-15);
  const auto f4 = levy_reference_cdf(4.0);
  for (const double l : {0.1, 0.5, 1.3}) EXPECT_NEAR(f4(l), f1(2.0 * l), 1e-15);
  double prev = 0.0;
  for (double l = 0.0; l < 5.0; l += 0.01) {
    EXPECT_GE(f1(l), prev);
    prev = f1(l);
  }
  try {
    levy_reference_cdf(0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::VarianceZero);
  }
}

TEST(FitSlope, ExactLine) {
  const std::vector<double> x{0.0, 1.0, 2.0};
  const std::vector<double> y{1.0, 2.5, 4.0};
  EXPECT_DOUBLE_EQ(fit_slope(x, y), 1.5);
  EXPECT_THROW(fit_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
}
