#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tor/errors.hpp"
#include "tor/harness.hpp"
#include "tor/parallel.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "root seed; overrides TOR_SEED and the config");
  sub->add_option("--threads", c.threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  sub->add_option("--out", c.out, "output directory");
}

tor::ExperimentConfig load(const Common& c) {
  std::ifstream in(c.config);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw tor::ConfigError(std::string("cannot parse config: ") + e.what());
  }
  auto cfg = tor::config_from_json(j);
  if (const char* env = std::getenv("TOR_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw tor::ConfigError("TOR_SEED is not an unsigned integer");
    }
  }
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.threads > 0) tor::set_thread_count(c.threads);
  return cfg;
}

int run_rates(const Common& c, tor::Scenario expected) {
  auto cfg = load(c);
  cfg.scenario = expected;
  tor::ExperimentResult r;
  switch (expected) {
    case tor::Scenario::RateContinuous:
      r = tor::run_rate_experiment(cfg);
      break;
    case tor::Scenario::RateDiscrete:
      r = tor::run_discrete_rate_experiment(cfg);
      break;
    case tor::Scenario::TwoProcess:
      r = tor::run_two_process_experiment(cfg);
      break;
    default:
      r = tor::run_ot_compare(cfg);
  }
  tor::write_outputs(cfg, r);
  std::cout << "slope " << r.fit.slope << " +- " << r.fit.slope_stderr << "  predicted " << r.fit.predicted
            << (r.fit.log_regime ? " (log regime)" : "") << "  verdict " << tor::to_string(r.fit.verdict) << '\n'
            << "wrote " << cfg.out_dir << '\n';
  return 0;
}

int run_verify(const Common& c, const std::string& kind) {
  static const std::map<std::string, tor::Scenario> kinds{
      {"sdu", tor::Scenario::VerifySdu},
      {"spectrum", tor::Scenario::VerifySpectrum},
      {"discrete-spectrum", tor::Scenario::VerifyDiscreteSpectrum},
      {"mixed", tor::Scenario::VerifyMixed},
      {"npoint", tor::Scenario::VerifyNpoint},
      {"convexity", tor::Scenario::VerifyConvexity}};
  auto cfg = load(c);
  cfg.scenario = kinds.at(kind);
  const auto report = tor::run_verification(cfg);
  const auto j = tor::to_json(report);
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream(std::filesystem::path(cfg.out_dir) / "report.json") << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tor: subordinated fBM on the torus, transport rates and checks"};
  app.require_subcommand(1);

  Common rates, discrete, two, compare, verify;
  std::string kind;
  add_common(app.add_subcommand("rates", "continuous-time rate sweep"), rates);
  add_common(app.add_subcommand("discrete-rates", "step-tau rate sweep"), discrete);
  add_common(app.add_subcommand("two-process", "W_p^p between two sBMs in R^d"), two);
  add_common(app.add_subcommand("ot-compare", "exact vs Fourier estimators"), compare);
  auto* v = app.add_subcommand("verify", "run one verification check");
  v->add_option("kind", kind, "check to run")
      ->required()
      ->check(CLI::IsMember({"sdu", "spectrum", "discrete-spectrum", "mixed", "npoint", "convexity"}));
  add_common(v, verify);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("rates")) return run_rates(rates, tor::Scenario::RateContinuous);
    if (app.got_subcommand("discrete-rates")) return run_rates(discrete, tor::Scenario::RateDiscrete);
    if (app.got_subcommand("two-process")) return run_rates(two, tor::Scenario::TwoProcess);
    if (app.got_subcommand("ot-compare")) return run_rates(compare, tor::Scenario::OtCompare);
    return run_verify(verify, kind);
  } catch (const tor::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const tor::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
