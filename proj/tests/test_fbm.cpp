#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tor/errors.hpp"
#include "tor/fbm.hpp"
#include "tor/stats.hpp"

TEST(FbmCovariance, Values) {
  for (double H : {0.2, 0.5, 0.8}) EXPECT_DOUBLE_EQ(tor::fbm_covariance(H, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(tor::fbm_covariance(0.5, 1.0, 2.0), 1.0);
  EXPECT_NEAR(tor::fbm_covariance(0.75, 1.0, 2.0), (1.0 + std::pow(2.0, 1.5) - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(tor::fbm_covariance(0.75, 1.0, 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(tor::fbm_covariance(0.3, 2.0, 5.0), tor::fbm_covariance(0.3, 5.0, 2.0));
  EXPECT_NEAR(tor::fbm_covariance(0.3, 3.0, 3.0), std::pow(3.0, 0.6), 1e-14);
  EXPECT_THROW(tor::fbm_covariance(1.0, 1.0, 1.0), tor::DomainError);
  EXPECT_THROW(tor::fbm_covariance(0.0, 1.0, 1.0), tor::DomainError);
}

TEST(FbmGram, ReconstructsCovariance) {
  for (double H : {0.3, 0.5, 0.75}) {
    std::vector<double> t;
    for (int i = 1; i <= 512; ++i) t.push_back(i / 64.0);
    auto L = tor::fbm_gram_factor(H, t);
    const Eigen::MatrixXd G = (*L) * L->transpose();
    double err = 0.0;
    for (int i = 0; i < 512; ++i)
      for (int j = 0; j < 512; ++j) err = std::max(err, std::abs(G(i, j) - tor::fbm_covariance(H, t[i], t[j])));
    EXPECT_LT(err, 1e-8) << "H=" << H;
  }
}

TEST(FbmGram, NearlyCoincidentTimesFactor) {
  std::vector<double> t{1.0, 1.0 + 1e-11, 1.0 + 2e-11, 2.0};
  EXPECT_NO_THROW(tor::fbm_gram_factor(0.75, t));
}

TEST(SampleAtTimes, ZeroTime) {
  tor::Rng rng(1);
  std::vector<double> t{0.0};
  auto p = tor::sample_at_times(0.7, t, 3, rng);
  ASSERT_EQ(p.size(), 1u);
  for (double v : p.at(0)) EXPECT_EQ(v, 0.0);
}

TEST(SampleAtTimes, DuplicateTimesShareValues) {
  tor::Rng rng(1);
  std::vector<double> t{0.5, 0.5, 1.0, 1.0 + 1e-13, 2.0};
  auto p = tor::sample_at_times(0.3, t, 2, rng);
  for (int c = 0; c < 2; ++c) {
    EXPECT_EQ(p.at(0)[c], p.at(1)[c]);
    EXPECT_EQ(p.at(2)[c], p.at(3)[c]);
  }
}

TEST(SampleAtTimes, RejectsUnsortedAndTooMany) {
  tor::Rng rng(1);
  std::vector<double> bad{1.0, 0.5};
  EXPECT_THROW(tor::sample_at_times(0.5, bad, 1, rng), tor::ArgumentError);
  std::vector<double> many(20);
  for (int i = 0; i < 20; ++i) many[i] = i + 1.0;
  EXPECT_THROW(tor::sample_at_times(0.7, many, 1, rng, 10), tor::ArgumentError);
}

TEST(SampleAtTimes, BrownianIncrementsUncorrelated) {
  tor::Rng rng(2);
  std::vector<double> t{0.0, 1.0, 2.5};
  const int N = 100000;
  double s = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    auto p = tor::sample_at_times(0.5, t, 1, rng);
    const double a = p.at(1)[0] - p.at(0)[0], b = p.at(2)[0] - p.at(1)[0];
    s += a * b;
    s1 += a * a;
    s2 += b * b;
  }
  EXPECT_LT(std::abs(s / std::sqrt(s1 * s2)), 4.0 / std::sqrt(N));
}

TEST(SampleAtTimes, CovarianceH075) {
  tor::Rng rng(3);
  std::vector<double> t{0.0, 1.0, 2.0};
  tor::RunningStats prod;
  for (int i = 0; i < 100000; ++i) {
    auto p = tor::sample_at_times(0.75, t, 1, rng);
    prod.add(p.at(1)[0] * p.at(2)[0]);
  }
  EXPECT_NEAR(prod.mean(), tor::fbm_covariance(0.75, 1.0, 2.0), 3.0 * prod.std_error());
}

TEST(SampleAtTimes, CoordinatesIndependent) {
  tor::Rng rng(4);
  std::vector<double> t{0.3, 1.7};
  const int N = 50000;
  double c = 0.0, a2 = 0.0, b2 = 0.0;
  for (int i = 0; i < N; ++i) {
    auto p = tor::sample_at_times(0.3, t, 2, rng);
    c += p.at(1)[0] * p.at(1)[1];
    a2 += p.at(1)[0] * p.at(1)[0];
    b2 += p.at(1)[1] * p.at(1)[1];
  }
  EXPECT_LT(std::abs(c / std::sqrt(a2 * b2)), 4.0 / std::sqrt(N));
}

TEST(SampleAtTimes, SelfSimilarity) {
  const double H = 0.7, a = 4.0;
  tor::Rng r1(5), r2(6);
  std::vector<double> x, y;
  std::vector<double> t1{0.5, 1.0}, t2{0.5 * a, 1.0 * a};
  for (int i = 0; i < 5000; ++i) {
    x.push_back(tor::sample_at_times(H, t1, 1, r1).at(1)[0]);
    y.push_back(std::pow(a, -H) * tor::sample_at_times(H, t2, 1, r2).at(1)[0]);
  }
  EXPECT_TRUE(oracle::ks_pass_01(x, y)) << oracle::ks_statistic(x, y);
}

TEST(SampleAtTimes, StationaryIncrements) {
  const double H = 0.3, h = 0.25;
  tor::Rng r1(7), r2(8);
  std::vector<double> x, y;
  std::vector<double> ta{0.5, 0.5 + h}, tb{3.0, 3.0 + h};
  for (int i = 0; i < 5000; ++i) {
    auto p = tor::sample_at_times(H, ta, 1, r1);
    auto q = tor::sample_at_times(H, tb, 1, r2);
    x.push_back(p.at(1)[0] - p.at(0)[0]);
    y.push_back(q.at(1)[0] - q.at(0)[0]);
  }
  EXPECT_TRUE(oracle::ks_pass_01(x, y)) << oracle::ks_statistic(x, y);
}

TEST(SampleUniformGrid, EndpointVariance) {
  for (double H : {0.5, 0.3, 0.8}) {
    tor::Rng rng(9);
    tor::RunningStats s;
    const double T = 2.0;
    for (int i = 0; i < 4000; ++i) {
      auto p = tor::sample_uniform_grid(H, 1024, T, 1, rng);
      ASSERT_EQ(p.size(), 1025u);
      ASSERT_EQ(p.at(0)[0], 0.0);
      const double x = p.at(1024)[0];
      s.add(x * x);
    }
    EXPECT_NEAR(s.mean(), std::pow(T, 2.0 * H), 3.0 * s.std_error()) << "H=" << H;
  }
}

TEST(SampleUniformGrid, IncrementCovariance) {
  // lag-1 covariance of unit-step fGn: (2^{2H} - 2) / 2
  const double H = 0.8;
  tor::Rng rng(10);
  tor::RunningStats s;
  for (int i = 0; i < 2000; ++i) {
    auto p = tor::sample_uniform_grid(H, 256, 256.0, 1, rng);
    for (int k = 1; k + 1 <= 256; k += 8) {
      const double a = p.at(k)[0] - p.at(k - 1)[0], b = p.at(k + 1)[0] - p.at(k)[0];
      s.add(a * b);
    }
  }
  EXPECT_NEAR(s.mean(), (std::pow(2.0, 2.0 * H) - 2.0) / 2.0, 4.0 * s.std_error());
}

TEST(SampleUniformGrid, MatchesCholeskyMarginalKs) {
  const double H = 0.3;
  tor::Rng r1(11), r2(12);
  std::vector<double> x, y, t;
  for (int k = 0; k <= 64; ++k) t.push_back(k / 64.0);
  for (int i = 0; i < 20000; ++i) {
    x.push_back(tor::sample_uniform_grid(H, 64, 1.0, 1, r1).at(64)[0]);
    y.push_back(tor::sample_at_times(H, t, 1, r2).at(64)[0]);
  }
  EXPECT_TRUE(oracle::ks_pass_01(x, y)) << oracle::ks_statistic(x, y);
  // one-sample against N(0, 1) at T = 1
  auto one = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double d = 0.0;
    const double n = v.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double F = 0.5 * std::erfc(-v[i] / std::sqrt(2.0));
      d = std::max({d, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
    }
    return d * std::sqrt(n);
  };
  EXPECT_LT(one(x), 1.628);
  EXPECT_LT(one(y), 1.628);
}

TEST(FbmCache, ClearIsSafe) {
  std::vector<double> t{1.0, 2.0};
  auto a = tor::fbm_gram_factor(0.4, t);
  tor::clear_fbm_cache();
  auto b = tor::fbm_gram_factor(0.4, t);
  EXPECT_EQ((*a - *b).norm(), 0.0);
}
