#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tor/bernstein.hpp"
#include "tor/stats.hpp"
#include "tor/torus.hpp"
#include "tor/verification.hpp"
#include "tor/wasserstein.hpp"

namespace tor {

enum class Scenario {
  RateContinuous,
  RateDiscrete,
  TwoProcess,
  OtCompare,
  VerifySdu,
  VerifySpectrum,
  VerifyDiscreteSpectrum,
  VerifyMixed,
  VerifyNpoint,
  VerifyConvexity,
};

/// Rate statements used as predictions.
///   Upper          E W_p upper bound for sfBM (p >= 1)
///   LowerSbm       lower bound for subordinated BM, thresholds 2(1+a)
///   LowerGeneral   lower bound -min(1,p)/(d - a/H), d > a/H
///   Discrete       step-tau empirical measure with tau = t^{-beta}
///   TwoProcess     E W_p^p between two independent sBMs in R^d
enum class Theorem { Upper, LowerSbm, LowerGeneral, Discrete, TwoProcess };

enum class Verdict { Match, Mismatch, LogRegime };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);
std::string to_string(Theorem t);
Theorem theorem_from_string(const std::string& s);
std::string to_string(Verdict v);

struct Prediction {
  double exponent = 0.0;
  bool log_regime = false;
};

Prediction predicted_exponent(Theorem th, int d, double H, double alpha, double p, double beta = 0.0);

/// Smoothing level for the Fourier functionals: 1/t below the critical
/// dimension, log(t)/t at it, t^{-2/(d - a/H)} above it.
double epsilon_schedule(double t, int d, double H, double alpha);

struct ExperimentConfig {
  Scenario scenario = Scenario::RateContinuous;
  int d = 1;
  double H = 0.5;
  BernsteinFunction B = BernsteinFunction::identity();
  std::optional<BernsteinFunction> B2;
  double p = 1.0;
  double beta = 1.0;
  std::vector<double> t_grid;
  std::size_t replicas = 16;
  WMethod method = WMethod::ExactCircle;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  double tolerance = 0.15;
  std::size_t max_steps = 4096;
  double steps_per_unit = 16.0;
  std::optional<Theorem> theorem;
  int refine = 16;
  double reg = 1e-2;
  int sinkhorn_iters = 20000;
  bool couple_streams = false;

  // verification parameters
  double lambda = 1.0 / 64.0;
  double delta = 1.0;
  double tau = 0.25;
  double t = 64.0;
  double path_dt = 1.0 / 512.0;
  std::vector<Mode> xi;
  std::vector<int> N_list;
  int grid_n = 2000;
  double alpha = 0.5;
  double c_screen = 10.0;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

struct RatePoint {
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double predicted = 0.0;
  bool log_regime = false;
  double flat_slope = 0.0;  // slope of value * (t / log t)^{-predicted} when log_regime
  double tolerance = 0.15;
  Verdict verdict = Verdict::Mismatch;
};

/// Fits the series and assigns the verdict. Log-regime series are judged by
/// the flatness (|slope| <= 0.1) of value * (t / log t)^{-predicted}.
RateFit fit_rate(std::vector<RatePoint> points, const Prediction& pred, double tolerance);

struct ResultRow {
  double t = 0.0;
  std::size_t replica = 0;
  WMethod method = WMethod::ExactCircle;
  double p = 1.0;
  double value = 0.0;
};

struct ExperimentResult {
  RateFit fit;
  std::vector<ResultRow> rows;
  nlohmann::json extra = nlohmann::json::object();
};

/// Number of sample points per path used at horizon t.
std::size_t continuous_steps(const ExperimentConfig& c, double t);

/// One estimator evaluation on a torus sample cloud.
WassersteinEstimate estimate(const PointCloud& pts, WMethod method, double p, double eps, const ExperimentConfig& c);

ExperimentResult run_rate_experiment(const ExperimentConfig& c);
ExperimentResult run_discrete_rate_experiment(const ExperimentConfig& c);
ExperimentResult run_two_process_experiment(const ExperimentConfig& c);
ExperimentResult run_ot_compare(const ExperimentConfig& c);

/// Dispatches a verification scenario.
CheckReport run_verification(const ExperimentConfig& c);

std::string results_csv(const ExperimentConfig& c, const ExperimentResult& r);
nlohmann::json summary_json(const ExperimentConfig& c, const ExperimentResult& r);
std::string plotdata_tsv(const ExperimentResult& r);
void write_outputs(const ExperimentConfig& c, const ExperimentResult& r);

}  // namespace tor
