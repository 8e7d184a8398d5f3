#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "tor/errors.hpp"
#include "tor/subordinator.hpp"

using tor::BernsteinFunction;

namespace {

std::vector<tor::SubordinatorPath> paths(const BernsteinFunction& b, std::vector<double> times, int n,
                                         std::uint64_t seed) {
  tor::Rng rng(seed);
  std::vector<tor::SubordinatorPath> out;
  for (int i = 0; i < n; ++i) out.push_back(tor::sample_path(b, times, rng));
  return out;
}

// Fixed Talbot inversion of F(s) = exp(-sqrt(s)) at x > 0.
double talbot_inverse(double x, int M = 18) {
  using C = std::complex<double>;
  auto F = [](C s) { return std::exp(-std::sqrt(s)); };
  const double r = 2.0 * M / (5.0 * x);
  double sum = 0.5 * std::exp(r * x) * F(C(r, 0.0)).real();
  for (int k = 1; k < M; ++k) {
    const double th = k * std::numbers::pi / M, cot = std::cos(th) / std::sin(th);
    const C s = r * th * C(cot, 1.0);
    const C sigma(1.0, th + (th * cot - 1.0) * cot);
    sum += (std::exp(x * s) * F(s) * sigma).real();
  }
  return r / M * sum;
}

// E exp(-lambda S_1^delta) for the 1/2-stable law by quadrature against a density.
template <class Density>
double stable_half_moment(double lambda, double delta, Density f) {
  const double lo = std::log(1e-4), hi = std::log(1e10);
  const int n = 20000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = std::exp(lo + i * h);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s += w * std::exp(-lambda * std::pow(x, delta)) * f(x) * x;
  }
  return s * h;
}

}  // namespace

TEST(StableIncrement, LaplaceAtOne) {
  tor::Rng rng(1);
  for (double dt : {1.0, 4.0}) {
    tor::RunningStats s;
    for (int i = 0; i < 100000; ++i) s.add(std::exp(-tor::sample_stable_increment(0.5, dt, rng)));
    EXPECT_NEAR(s.mean(), std::exp(-dt), 3.0 * s.std_error()) << "dt=" << dt;
  }
}

TEST(StableIncrement, ScalingLawKs) {
  tor::Rng a(2), b(3);
  for (double alpha : {0.5, 0.7}) {
    std::vector<double> x2, x1;
    for (int i = 0; i < 20000; ++i) {
      x2.push_back(tor::sample_stable_increment(alpha, 2.0, a));
      x1.push_back(std::pow(2.0, 1.0 / alpha) * tor::sample_stable_increment(alpha, 1.0, b));
    }
    EXPECT_TRUE(oracle::ks_pass_01(x2, x1)) << alpha << " " << oracle::ks_statistic(x2, x1);
  }
}

TEST(StableIncrement, MatchesHalfStableDensity) {
  // 1/2-stable with B(l) = sqrt(l) has the Levy density x^{-3/2} e^{-1/(4x)} / (2 sqrt(pi))
  // CDF erfc(1 / (2 sqrt(x))); one-sample KS
  tor::Rng rng(4);
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(tor::sample_stable_increment(0.5, 1.0, rng));
  std::sort(xs.begin(), xs.end());
  const double n = xs.size();
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = std::erfc(0.5 / std::sqrt(xs[i]));
    d = std::max({d, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
  }
  EXPECT_LT(d * std::sqrt(n), 1.628);
}

TEST(StableIncrement, RejectsBadIndex) {
  tor::Rng rng(1);
  EXPECT_THROW(tor::sample_stable_increment(1.0, 1.0, rng), tor::DomainError);
  EXPECT_THROW(tor::sample_stable_increment(0.0, 1.0, rng), tor::DomainError);
}

TEST(SamplePath, IdentityIsDeterministic) {
  tor::Rng rng(1);
  std::vector<double> t{0, 1, 2};
  auto p = tor::sample_path(BernsteinFunction::identity(), t, rng);
  EXPECT_EQ(p.values, (std::vector<double>{0, 1, 2}));
}

TEST(SamplePath, NondecreasingAndStartsAtZero) {
  std::vector<double> t;
  for (int i = 0; i <= 64; ++i) t.push_back(i * 0.125);
  for (const auto& b : {BernsteinFunction::stable(0.5), BernsteinFunction::tempered_stable(0.5),
                        BernsteinFunction::drift_plus_stable(0.3, 0.6), BernsteinFunction::stable(0.9)}) {
    for (const auto& p : paths(b, t, 200, 9)) {
      ASSERT_EQ(p.values.size(), t.size());
      EXPECT_EQ(p.values.front(), 0.0);
      for (std::size_t i = 1; i < t.size(); ++i) ASSERT_LE(p.values[i - 1], p.values[i]) << b.name();
    }
  }
}

TEST(SamplePath, RejectsUnsortedOrNegative) {
  tor::Rng rng(1);
  std::vector<double> bad{0, 2, 1}, neg{-1, 0};
  EXPECT_THROW(tor::sample_path(BernsteinFunction::stable(0.5), bad, rng), tor::ArgumentError);
  EXPECT_THROW(tor::sample_path(BernsteinFunction::stable(0.5), neg, rng), tor::ArgumentError);
}

TEST(SamplePath, LaplaceIdentityAllKinds) {
  struct Case {
    BernsteinFunction b;
    double t, lambda;
  };
  std::vector<Case> cases{{BernsteinFunction::stable(0.5), 1.0, 2.0},
                          {BernsteinFunction::tempered_stable(0.5), 1.0, 3.0},
                          {BernsteinFunction::tempered_stable(0.5), 2.5, 1.0},
                          {BernsteinFunction::tempered_stable(0.8), 0.5, 4.0},
                          {BernsteinFunction::drift_plus_stable(0.5, 0.5), 1.0, 1.0},
                          {BernsteinFunction::stable(0.3), 2.0, 0.5}};
  for (const auto& c : cases) {
    auto ps = paths(c.b, {0.0, c.t}, 100000, 17);
    auto e = tor::empirical_laplace(ps, 1, c.lambda);
    EXPECT_NEAR(e.estimate, std::exp(-c.t * c.b(c.lambda)), 3.0 * e.std_error) << c.b.name();
  }
}

TEST(EmpiricalLaplace, TrivialCases) {
  auto ps = paths(BernsteinFunction::stable(0.5), {0.0, 1.0}, 100, 1);
  auto e0 = tor::empirical_laplace(ps, 1, 0.0);
  EXPECT_EQ(e0.estimate, 1.0);
  EXPECT_EQ(e0.std_error, 0.0);
  auto id = paths(BernsteinFunction::identity(), {0.0, 2.0}, 10, 1);
  auto e = tor::empirical_laplace(id, 1, 1.0);
  EXPECT_NEAR(e.estimate, std::exp(-2.0), 1e-15);
  EXPECT_EQ(e.std_error, 0.0);
  std::vector<tor::SubordinatorPath> none;
  EXPECT_THROW(tor::empirical_laplace(none, 0, 1.0), tor::ArgumentError);
}

TEST(MomentFunctional, DeltaOneIsLaplace) {
  auto ps = paths(BernsteinFunction::stable(0.5), {0.0, 1.0}, 5000, 3);
  auto a = tor::moment_functional(ps, 1, 0.7, 1.0);
  auto b = tor::empirical_laplace(ps, 1, 0.7);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(MomentFunctional, IdentityDeterministic) {
  auto ps = paths(BernsteinFunction::identity(), {0.0, 2.0}, 10, 3);
  EXPECT_NEAR(tor::moment_functional(ps, 1, 1.0, 2.0).estimate, std::exp(-4.0), 1e-15);
  EXPECT_THROW(tor::moment_functional(ps, 1, 1.0, 0.0), tor::DomainError);
}

TEST(MomentFunctional, StableHalfAgainstLaplaceInversion) {
  const double inv = stable_half_moment(1.0, 0.5, [](double x) { return talbot_inverse(x); });
  const double closed = stable_half_moment(
      1.0, 0.5, [](double x) { return std::exp(-0.25 / x) / (2.0 * std::sqrt(std::numbers::pi) * x * std::sqrt(x)); });
  EXPECT_NEAR(inv, closed, 1e-7);
  auto ps = paths(BernsteinFunction::stable(0.5), {0.0, 1.0}, 100000, 21);
  auto e = tor::moment_functional(ps, 1, 1.0, 0.5);
  EXPECT_GT(e.estimate, 0.0);
  EXPECT_LT(e.estimate, 1.0);
  EXPECT_NEAR(e.estimate, inv, 3.0 * e.std_error);
}

TEST(SduBound, Examples) {
  EXPECT_NEAR(tor::sdu_bound(0.5, 1.0, 1.0, 4.0, 1.0), std::exp(1.0 - 4.0), 1e-15);
  EXPECT_NEAR(tor::sdu_bound(0.5, 1.0, 1.0, 4.0, 1.0), 0.04979, 1e-5);
  EXPECT_NEAR(tor::sdu_bound(0.5, 0.5, 1.0, 1.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(tor::sdu_bound(0.5, 2.0, 16.0, 1.0, 1.0), std::exp(1.0 - std::pow(16.0, 1.0 / 7.0)), 1e-14);
  EXPECT_NEAR(tor::sdu_bound(0.5, 2.0, 16.0, 1.0, 1.0), 0.6153, 1e-3);
}

TEST(SduBound, TimeExponent) {
  EXPECT_NEAR(tor::sdu_time_exponent(0.5, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(tor::sdu_time_exponent(0.5, 0.5), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(tor::sdu_time_exponent(0.5, 2.0), 2.0 / 3.5, 1e-15);
}
