#include "tor/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <json.hpp>

#include "tor/errors.hpp"

namespace tor {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("stable index must lie in (0,1), got " + std::to_string(alpha));
}

}  // namespace

BernsteinFunction BernsteinFunction::identity() { return {BernsteinKind::Identity, 1.0, 1.0}; }

BernsteinFunction BernsteinFunction::stable(double alpha) {
  check_alpha(alpha);
  return {BernsteinKind::Stable, 0.0, alpha};
}

BernsteinFunction BernsteinFunction::tempered_stable(double alpha) {
  check_alpha(alpha);
  return {BernsteinKind::TemperedStable, 0.0, alpha};
}

BernsteinFunction BernsteinFunction::drift_plus_stable(double drift, double alpha) {
  check_alpha(alpha);
  if (!(drift >= 0.0)) throw DomainError("drift must be nonnegative");
  return {BernsteinKind::DriftPlusStable, drift, alpha};
}

double BernsteinFunction::growth_index() const {
  if (kind_ == BernsteinKind::DriftPlusStable && drift_ > 0.0) return 1.0;
  return alpha_;
}

double BernsteinFunction::operator()(double lambda) const {
  if (!(lambda >= 0.0)) throw DomainError("Bernstein function evaluated at negative lambda");
  switch (kind_) {
    case BernsteinKind::Identity:
      return lambda;
    case BernsteinKind::Stable:
      return std::pow(lambda, alpha_);
    case BernsteinKind::TemperedStable:
      // (1+l)^a - 1 without cancellation for small l
      return std::expm1(alpha_ * std::log1p(lambda));
    case BernsteinKind::DriftPlusStable:
      return drift_ * lambda + std::pow(lambda, alpha_);
  }
  return 0.0;
}

double BernsteinFunction::levy_density(double y) const {
  if (!(y > 0.0)) throw DomainError("Levy density requires y > 0");
  if (kind_ == BernsteinKind::Identity) return 0.0;
  const double stable = alpha_ / std::tgamma(1.0 - alpha_) * std::pow(y, -1.0 - alpha_);
  if (kind_ == BernsteinKind::TemperedStable) return stable * std::exp(-y);
  return stable;
}

std::string BernsteinFunction::name() const {
  switch (kind_) {
    case BernsteinKind::Identity:
      return "identity";
    case BernsteinKind::Stable:
      return "stable";
    case BernsteinKind::TemperedStable:
      return "tempered_stable";
    case BernsteinKind::DriftPlusStable:
      return "drift_plus_stable";
  }
  return "?";
}

double eval(const BernsteinFunction& b, double lambda) { return b(lambda); }
double levy_density(const BernsteinFunction& b, double y) { return b.levy_density(y); }

BoundScreen classify_bounds(const BernsteinFunction& b, double alpha, std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("classify_bounds: empty lambda grid");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("classify_bounds: alpha must lie in (0,1]");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double l : grid)
    if (!(l > 0.0)) throw ArgumentError("classify_bounds: grid values must be positive");
  const double lmax = *std::max_element(grid.begin(), grid.end());
  const double cut = lmax / 10.0;

  double lo_top = std::numeric_limits<double>::infinity(), lo_rest = lo_top;
  double hi_top = 0.0, hi_rest = 0.0;
  for (double l : grid) {
    const double v = b(l);
    const double rl = v / std::min(std::pow(l, alpha), l);
    const double ru = v / std::pow(l, alpha);
    lo = std::min(lo, rl);
    hi = std::max(hi, ru);
    if (l > cut) {
      lo_top = std::min(lo_top, rl);
      hi_top = std::max(hi_top, ru);
    } else {
      lo_rest = std::min(lo_rest, rl);
      hi_rest = std::max(hi_rest, ru);
    }
  }
  BoundScreen s;
  s.witness_c = lo;
  s.upper_witness_c = hi;
  const bool have_rest = std::isfinite(lo_rest);
  s.lower_ok = lo > 0.0 && (!have_rest || lo_top * 1.25 >= lo_rest);
  s.upper_ok = std::isfinite(hi) && (!have_rest || hi_top <= 1.25 * hi_rest);
  return s;
}

void to_json(nlohmann::json& j, const BernsteinFunction& b) {
  j = nlohmann::json{{"kind", b.name()}, {"alpha", b.alpha()}, {"drift", b.drift()}};
}

void from_json(const nlohmann::json& j, BernsteinFunction& b) {
  if (!j.is_object()) throw ConfigError("Bernstein function must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "kind" && it.key() != "alpha" && it.key() != "drift")
      throw ConfigError("unknown Bernstein key '" + it.key() + "'");
  if (!j.contains("kind")) throw ConfigError("Bernstein function needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  const double alpha = j.value("alpha", 0.5);
  const double drift = j.value("drift", 0.0);
  if (kind == "identity")
    b = BernsteinFunction::identity();
  else if (kind == "stable")
    b = BernsteinFunction::stable(alpha);
  else if (kind == "tempered_stable")
    b = BernsteinFunction::tempered_stable(alpha);
  else if (kind == "drift_plus_stable")
    b = BernsteinFunction::drift_plus_stable(drift, alpha);
  else
    throw ConfigError("unknown Bernstein kind '" + kind + "'");
}

}  // namespace tor
