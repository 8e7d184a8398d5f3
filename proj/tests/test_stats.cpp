#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tor/errors.hpp"
#include "tor/random.hpp"
#include "tor/stats.hpp"

TEST(RunningStats, MatchesTwoPass) {
  std::vector<double> x{1.5, 2.0, -3.0, 7.25, 0.5};
  auto e = tor::summarize(x);
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  EXPECT_NEAR(e.estimate, m, 1e-14);
  EXPECT_NEAR(e.std_error, std::sqrt(ss / (x.size() - 1) / x.size()), 1e-14);
}

TEST(RunningStats, ConstantInputHasZeroError) {
  std::vector<double> x(10, 0.3);
  auto e = tor::summarize(x);
  EXPECT_EQ(e.estimate, 0.3);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(FitLogLog, ExactPowerLaw) {
  std::vector<tor::FitPoint> pts;
  for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.push_back({x, 3.0 * std::pow(x, -0.7), 0.01});
  auto f = tor::fit_loglog(pts);
  EXPECT_NEAR(f.slope, -0.7, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
}

TEST(FitLogLog, InverseSqrtHasTinyError) {
  std::vector<tor::FitPoint> pts;
  for (int k = 6; k <= 13; ++k) {
    const double t = std::ldexp(1.0, k);
    pts.push_back({t, 1.0 / std::sqrt(t), 1e-3 / std::sqrt(t)});
  }
  auto f = tor::fit_loglog(pts);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_LT(f.slope_stderr, 1e-12);
}

TEST(FitLogLog, ConstantHasZeroSlope) {
  std::vector<tor::FitPoint> pts;
  for (double x : {1.0, 10.0, 100.0, 1000.0}) pts.push_back({x, 2.5, 0.1});
  EXPECT_NEAR(tor::fit_loglog(pts).slope, 0.0, 1e-14);
}

TEST(FitLogLog, JitteredPowerLaw) {
  // oracle: spread of the slope over repeated seeds
  std::vector<double> slopes;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    tor::Rng r(seed);
    std::vector<tor::FitPoint> pts;
    for (int k = 0; k < 8; ++k) {
      const double x = std::ldexp(1.0, k);
      pts.push_back({x, std::pow(x, -0.5) * (1.0 + 0.01 * r.normal()), 0.01 * std::pow(x, -0.5)});
    }
    slopes.push_back(tor::fit_loglog(pts).slope);
  }
  for (double s : slopes) EXPECT_NEAR(s, -0.5, 0.02);
}

TEST(FitLogLog, RejectsNonPositive) {
  std::vector<tor::FitPoint> pts{{1, 1, 0.1}, {2, 0, 0.1}, {4, 1, 0.1}, {8, 1, 0.1}};
  EXPECT_THROW(tor::fit_loglog(pts), tor::DomainError);
}

TEST(FitLinear, Line) {
  std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  auto f = tor::fit_linear(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}
