#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tor/errors.hpp"
#include "tor/harness.hpp"
#include "tor/parallel.hpp"
#include "tor/sfbm.hpp"

using tor::BernsteinFunction;
using tor::Theorem;

namespace {

tor::ExperimentConfig small_config() {
  tor::ExperimentConfig c;
  c.d = 1;
  c.t_grid = {16, 32, 64, 128};
  c.replicas = 6;
  c.method = tor::WMethod::ExactCircle;
  c.seed = 99;
  return c;
}

}  // namespace

TEST(Predicted, UpperRows) {
  auto a = tor::predicted_exponent(Theorem::Upper, 1, 0.5, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(a.exponent, -0.5);
  EXPECT_FALSE(a.log_regime);
  EXPECT_TRUE(tor::predicted_exponent(Theorem::Upper, 4, 0.5, 1.0, 1.0).log_regime);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::Upper, 5, 0.5, 1.0, 1.0).exponent, -1.0 / 3, 1e-15);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::Upper, 4, 0.5, 0.5, 1.0).exponent, -1.0 / 3, 1e-15);
  EXPECT_THROW(tor::predicted_exponent(Theorem::Upper, 1, 0.5, 1.0, 0.5), tor::DomainError);
  EXPECT_THROW(tor::predicted_exponent(Theorem::Upper, 1, 0.7, 1.0, 1.0), tor::DomainError);
}

TEST(Predicted, LowerRows) {
  EXPECT_DOUBLE_EQ(tor::predicted_exponent(Theorem::LowerSbm, 3, 0.5, 1.0, 1.0).exponent, -0.5);
  EXPECT_TRUE(tor::predicted_exponent(Theorem::LowerSbm, 3, 0.5, 0.5, 1.0).log_regime);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::LowerSbm, 5, 0.5, 1.0, 1.0).exponent, -1.0 / 3, 1e-15);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::LowerGeneral, 3, 0.5, 0.5, 0.5).exponent, -0.5 / 2, 1e-15);
  EXPECT_THROW(tor::predicted_exponent(Theorem::LowerGeneral, 1, 0.25, 0.5, 1.0), tor::DomainError);
}

TEST(Predicted, DiscreteRows) {
  EXPECT_DOUBLE_EQ(tor::predicted_exponent(Theorem::Discrete, 1, 0.5, 1.0, 1.0, 1.0).exponent, -0.5);
  // 2 < d < 2 + a/H
  EXPECT_NEAR(tor::predicted_exponent(Theorem::Discrete, 3, 0.5, 1.0, 1.0, 0.2).exponent, -0.4, 1e-15);
  auto crit = tor::predicted_exponent(Theorem::Discrete, 3, 0.5, 0.5, 1.0, 2.0);
  EXPECT_TRUE(crit.log_regime);
  EXPECT_DOUBLE_EQ(crit.exponent, -0.5);
  auto crit_slow = tor::predicted_exponent(Theorem::Discrete, 3, 0.5, 0.5, 1.0, 0.2);
  EXPECT_FALSE(crit_slow.log_regime);
  EXPECT_NEAR(crit_slow.exponent, -0.4, 1e-15);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::Discrete, 5, 0.5, 1.0, 1.0, 1.0).exponent, -1.0 / 3, 1e-15);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::Discrete, 5, 0.5, 1.0, 1.0, 0.2).exponent, -0.24, 1e-15);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::Discrete, 5, 0.5, 1.0, 1.0, 4.0).exponent, -1.0 / 3, 1e-15);
  EXPECT_THROW(tor::predicted_exponent(Theorem::Discrete, 1, 0.5, 1.0, 1.0, 0.0), tor::DomainError);
}

TEST(Predicted, TwoProcessRows) {
  EXPECT_DOUBLE_EQ(tor::predicted_exponent(Theorem::TwoProcess, 1, 0.5, 1.0, 1.0).exponent, -0.5);
  EXPECT_DOUBLE_EQ(tor::predicted_exponent(Theorem::TwoProcess, 1, 0.5, 1.0, 2.0).exponent, -1.0);
  EXPECT_NEAR(tor::predicted_exponent(Theorem::TwoProcess, 5, 0.5, 1.0, 1.0).exponent, -1.0 / 3, 1e-15);
  EXPECT_TRUE(tor::predicted_exponent(Theorem::TwoProcess, 4, 0.5, 1.0, 1.0).log_regime);
}

TEST(EpsilonSchedule, Regimes) {
  EXPECT_DOUBLE_EQ(tor::epsilon_schedule(1024, 1, 0.5, 1.0), 1.0 / 1024);
  EXPECT_DOUBLE_EQ(std::sqrt(tor::epsilon_schedule(1024, 1, 0.5, 1.0)), 1.0 / 32);
  EXPECT_NEAR(tor::epsilon_schedule(1024, 4, 0.5, 1.0), std::log(1024.0) / 1024, 1e-18);
  EXPECT_NEAR(tor::epsilon_schedule(4096, 5, 0.5, 1.0), std::pow(4096.0, -2.0 / 3), 1e-15);
}

TEST(FitRate, SyntheticPowerLaw) {
  std::vector<tor::RatePoint> pts;
  for (int k = 6; k <= 13; ++k) {
    const double t = std::ldexp(1.0, k);
    pts.push_back({t, std::pow(t, -0.5), 0.01 * std::pow(t, -0.5)});
  }
  auto f = tor::fit_rate(pts, {-0.5, false}, 0.15);
  EXPECT_NEAR(f.slope, -0.5, 1e-12);
  EXPECT_LT(f.slope_stderr, 1e-12);
  EXPECT_EQ(f.verdict, tor::Verdict::Match);
  EXPECT_EQ(tor::fit_rate(pts, {-0.8, false}, 0.15).verdict, tor::Verdict::Mismatch);
}

TEST(FitRate, LogRegimeFlatness) {
  std::vector<tor::RatePoint> pts;
  for (int k = 6; k <= 13; ++k) {
    const double t = std::ldexp(1.0, k);
    pts.push_back({t, 3.0 * std::sqrt(std::log(t) / t), 0.01});
  }
  auto f = tor::fit_rate(pts, {-0.5, true}, 0.15);
  EXPECT_EQ(f.verdict, tor::Verdict::LogRegime);
  EXPECT_NEAR(f.flat_slope, 0.0, 1e-12);
  std::vector<tor::RatePoint> steep = pts;
  for (auto& p : steep) p.mean = std::pow(p.t, -0.8);
  EXPECT_EQ(tor::fit_rate(steep, {-0.5, true}, 0.15).verdict, tor::Verdict::Mismatch);
  std::vector<tor::RatePoint> three(pts.begin(), pts.begin() + 3);
  EXPECT_THROW(tor::fit_rate(three, {-0.5, false}, 0.15), tor::ArgumentError);
}

TEST(Config, ParseAndRoundTrip) {
  auto j = nlohmann::json::parse(R"({
    "scenario": "rate_discrete", "d": 2, "H": 0.5, "B": {"kind": "stable", "alpha": 0.5},
    "p": 1, "beta": 1.5, "t_grid": [4, 8, 16, 32], "replicas": 4, "method": "fourier_upper",
    "seed": 18446744073709551615, "out_dir": "x"})");
  auto c = tor::config_from_json(j);
  EXPECT_EQ(c.scenario, tor::Scenario::RateDiscrete);
  EXPECT_EQ(c.B, BernsteinFunction::stable(0.5));
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  auto back = tor::config_from_json(tor::to_json(c));
  EXPECT_EQ(back.t_grid, c.t_grid);
  EXPECT_EQ(back.method, c.method);
  EXPECT_EQ(back.beta, c.beta);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(tor::config_from_json(nlohmann::json::parse(R"({"d": 1, "colour": 2})")), tor::ConfigError);
  EXPECT_THROW(tor::config_from_json(nlohmann::json::parse(R"({"method": "magic"})")), tor::ConfigError);
  EXPECT_THROW(tor::config_from_json(nlohmann::json::parse(R"({"d": "one"})")), tor::ConfigError);
  auto c = small_config();
  c.t_grid = {16, 8, 32, 64};
  EXPECT_THROW(tor::validate(c), tor::ConfigError);
  c = small_config();
  c.replicas = 1;
  EXPECT_THROW(tor::validate(c), tor::ConfigError);
  c = small_config();
  c.d = 2;
  EXPECT_THROW(tor::run_rate_experiment(c), tor::ConfigError);
  c = small_config();
  c.H = 1.0;
  EXPECT_THROW(tor::validate(c), tor::ConfigError);
}

TEST(Simulate, IdentityBrownianIncrements) {
  tor::Rng rng(1);
  tor::RunningStats s;
  const double tau = 0.01;
  for (int r = 0; r < 2000; ++r) {
    auto path = tor::simulate_sfbm_path(BernsteinFunction::identity(), 0.5, 1, 1.0, 100, rng);
    for (std::size_t k = 1; k < path.size(); k += 10) {
      const double inc = path[k][0] - path[k - 1][0];
      s.add(inc * inc);
    }
  }
  EXPECT_NEAR(s.mean(), tau, 3.0 * s.std_error());
}

TEST(Simulate, SinglePointVariance) {
  tor::Rng rng(2);
  tor::RunningStats s;
  for (int r = 0; r < 20000; ++r) {
    auto path = tor::simulate_sfbm_path(BernsteinFunction::identity(), 0.5, 1, 0.01, 1, rng);
    s.add(path[0][0] * path[0][0]);
  }
  EXPECT_NEAR(s.mean(), 0.01, 3.0 * s.std_error());
  tor::Rng r2(3);
  auto pts = tor::simulate_sfbm_samples(BernsteinFunction::stable(0.5), 0.75, 2, 1.0, 1, r2);
  EXPECT_EQ(pts.size(), 1u);
  for (double v : pts.data()) {
    EXPECT_GE(v, -0.5);
    EXPECT_LT(v, 0.5);
  }
}

TEST(Simulate, SmallTimeModulus) {
  // E |X_s - X_0|^p ~ s^{pH/a} for small s
  const double H = 0.75, alpha = 0.5, p = 0.4;
  std::vector<tor::FitPoint> pts;
  for (double s : {1e-3, 4e-3, 1.6e-2, 6.4e-2}) {
    tor::Rng rng(static_cast<std::uint64_t>(s * 1e6));
    tor::RunningStats st;
    for (int r = 0; r < 20000; ++r) {
      auto path = tor::simulate_sfbm_path(BernsteinFunction::stable(alpha), H, 1, s, 1, rng);
      st.add(std::pow(std::abs(tor::wrap(path[0][0])), p));
    }
    pts.push_back({s, st.mean(), st.std_error()});
  }
  EXPECT_GE(tor::fit_loglog(pts).slope, p * H / alpha - 0.1);
}

TEST(RateExperiment, DeterministicAcrossThreads) {
  auto c = small_config();
  tor::set_thread_count(1);
  auto a = tor::run_rate_experiment(c);
  tor::set_thread_count(3);
  auto b = tor::run_rate_experiment(c);
  tor::set_thread_count(0);
  EXPECT_EQ(tor::results_csv(c, a), tor::results_csv(c, b));
  EXPECT_EQ(a.rows.size(), c.t_grid.size() * c.replicas);
}

TEST(RateExperiment, FourierOrderingRecorded) {
  auto c = small_config();
  c.method = tor::WMethod::FourierLower;
  auto r = tor::run_rate_experiment(c);
  EXPECT_EQ(r.rows.size(), 2 * c.t_grid.size() * c.replicas);
  EXPECT_EQ(r.extra["ordering"]["checked"], 24);
  EXPECT_EQ(r.extra["ordering"]["violations"], 0);
}

TEST(RateExperiment, OutputFiles) {
  auto c = small_config();
  c.out_dir = (std::filesystem::temp_directory_path() / "tor_harness_test").string();
  auto r = tor::run_rate_experiment(c);
  tor::write_outputs(c, r);
  std::ifstream csv(std::filesystem::path(c.out_dir) / "results.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "scenario,t,replica,method,p,value");
  std::ifstream js(std::filesystem::path(c.out_dir) / "summary.json");
  auto s = nlohmann::json::parse(js);
  EXPECT_EQ(s["points"].size(), 4u);
  EXPECT_TRUE(s.contains("verdict"));
  std::ifstream tsv(std::filesystem::path(c.out_dir) / "plotdata.tsv");
  std::getline(tsv, header);
  EXPECT_EQ(header, "t\tmean\tstderr\tpredicted");
}

TEST(DiscreteExperiment, Guards) {
  auto c = small_config();
  c.scenario = tor::Scenario::RateDiscrete;
  c.beta = 0.0;
  EXPECT_THROW(tor::run_discrete_rate_experiment(c), tor::ConfigError);
  c.beta = 3.0;
  c.t_grid = {16, 32, 64, 128};
  c.max_steps = 4096;
  EXPECT_THROW(tor::run_discrete_rate_experiment(c), tor::ConfigError);
}

TEST(DiscreteExperiment, OneDimensionalRate) {
  auto c = small_config();
  c.scenario = tor::Scenario::RateDiscrete;
  c.beta = 1.0;
  c.t_grid = {32, 64, 128, 256};
  c.max_steps = 1 << 16;
  c.replicas = 32;
  auto r = tor::run_discrete_rate_experiment(c);
  EXPECT_DOUBLE_EQ(r.fit.predicted, -0.5);
  EXPECT_NEAR(r.fit.slope, -0.5, 0.15);
}

TEST(TwoProcess, SameSeedIsZero) {
  auto r1 = tor::make_stream(5, "two:8", 0), r2 = tor::make_stream(5, "two:8", 0);
  auto X = tor::simulate_sfbm_path(BernsteinFunction::stable(0.5), 0.5, 2, 8.0, 128, r1);
  auto Y = tor::simulate_sfbm_path(BernsteinFunction::stable(0.5), 0.5, 2, 8.0, 128, r2);
  EXPECT_EQ(tor::discrete_wp(X, Y, 1.0, tor::Ground::Euclidean).value, 0.0);
}

TEST(TwoProcess, Guards) {
  auto c = small_config();
  c.scenario = tor::Scenario::TwoProcess;
  c.B = BernsteinFunction::identity();
  c.B2 = BernsteinFunction::stable(0.5);
  EXPECT_THROW(tor::run_two_process_experiment(c), tor::ConfigError);
  c.B2.reset();
  EXPECT_THROW(tor::run_two_process_experiment(c), tor::ConfigError);
}

TEST(TwoProcess, OneDimensionalRate) {
  auto c = small_config();
  c.scenario = tor::Scenario::TwoProcess;
  c.B2 = BernsteinFunction::identity();
  c.t_grid = {8, 16, 32, 64};
  c.replicas = 24;
  auto r = tor::run_two_process_experiment(c);
  EXPECT_DOUBLE_EQ(r.fit.predicted, -0.5);
  // Brownian scaling: two independent clouds in R separate like sqrt(t)
  EXPECT_NEAR(r.fit.slope, 0.5, 0.2);
  EXPECT_EQ(r.fit.verdict, tor::Verdict::Mismatch);
  EXPECT_TRUE(r.extra["lower_bound_respected"].get<bool>());
}

TEST(OtCompare, ReportsSlopes) {
  auto c = small_config();
  c.scenario = tor::Scenario::OtCompare;
  auto r = tor::run_ot_compare(c);
  EXPECT_TRUE(r.extra["slopes"].contains("exact_circle"));
  EXPECT_TRUE(r.extra["slopes"].contains("fourier_upper"));
  EXPECT_EQ(r.extra["ordering"]["violations"], 0);
}

TEST(Verification, Dispatch) {
  tor::ExperimentConfig c;
  c.scenario = tor::Scenario::VerifyConvexity;
  c.delta = 2.0;
  c.alpha = 0.5;
  EXPECT_TRUE(tor::run_verification(c).pass);
  c.scenario = tor::Scenario::VerifyNpoint;
  c.N_list = {2, 4, 8, 16};
  c.p = 1.0;
  EXPECT_TRUE(tor::run_verification(c).pass);
  c.scenario = tor::Scenario::RateContinuous;
  EXPECT_THROW(tor::run_verification(c), tor::ConfigError);
}
