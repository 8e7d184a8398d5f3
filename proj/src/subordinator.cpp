#include "tor/subordinator.hpp"

#include <cmath>
#include <numbers>

#include "tor/errors.hpp"

namespace tor {

double sample_stable_increment(double alpha, double dt, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("stable increment: alpha must lie in (0,1)");
  if (!(dt > 0.0)) throw DomainError("stable increment: dt must be positive");
  if (alpha == 0.5) {
    // Levy law: dt^2 / (2 Z^2)
    const double z = rng.normal();
    return dt * dt / (2.0 * z * z);
  }
  const double u = std::numbers::pi * rng.uniform_open();
  const double w = rng.exponential();
  const double log_x = std::log(std::sin(alpha * u)) - std::log(std::sin(u)) / alpha +
                       (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * u)) - std::log(w));
  return std::exp(log_x + std::log(dt) / alpha);
}

namespace {

// Exponential tilting of the stable law by exp(-x); acceptance rate exp(-dt).
double tempered_piece(double alpha, double dt, Rng& rng) {
  for (;;) {
    const double x = sample_stable_increment(alpha, dt, rng);
    if (rng.uniform() < std::exp(-x)) return x;
  }
}

}  // namespace

double sample_increment(const BernsteinFunction& b, double dt, Rng& rng) {
  if (!(dt >= 0.0)) throw DomainError("increment length must be nonnegative");
  if (dt == 0.0) return 0.0;
  switch (b.kind()) {
    case BernsteinKind::Identity:
      return dt;
    case BernsteinKind::Stable:
      return sample_stable_increment(b.alpha(), dt, rng);
    case BernsteinKind::DriftPlusStable:
      return b.drift() * dt + sample_stable_increment(b.alpha(), dt, rng);
    case BernsteinKind::TemperedStable: {
      double total = 0.0, left = dt;
      while (left > 1.0) {
        total += tempered_piece(b.alpha(), 1.0, rng);
        left -= 1.0;
      }
      return total + tempered_piece(b.alpha(), left, rng);
    }
  }
  return 0.0;
}

SubordinatorPath sample_path(const BernsteinFunction& b, std::span<const double> times, Rng& rng) {
  SubordinatorPath path{{times.begin(), times.end()}, {}, b};
  path.values.reserve(times.size());
  double prev = 0.0, s = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (!(t >= 0.0)) throw ArgumentError("sample_path: times must be nonnegative");
    if (i > 0 && t < times[i - 1]) throw ArgumentError("sample_path: times must be sorted");
    if (t > prev) s += sample_increment(b, t - prev, rng);
    prev = std::max(prev, t);
    path.values.push_back(s);
  }
  return path;
}

namespace {

McEstimate functional(std::span<const SubordinatorPath> paths, std::size_t t_index, double lambda,
                      double delta) {
  if (paths.empty()) throw ArgumentError("empty path list");
  RunningStats acc;
  for (const auto& p : paths) {
    if (t_index >= p.values.size()) throw ArgumentError("time index out of range");
    if (p.times.size() != paths.front().times.size()) throw ArgumentError("paths must share a time grid");
    const double s = p.values[t_index];
    acc.add(std::exp(-lambda * (delta == 1.0 ? s : std::pow(s, delta))));
  }
  return {acc.mean(), acc.std_error()};
}

}  // namespace

McEstimate empirical_laplace(std::span<const SubordinatorPath> paths, std::size_t t_index, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("empirical_laplace: lambda must be nonnegative");
  return functional(paths, t_index, lambda, 1.0);
}

McEstimate moment_functional(std::span<const SubordinatorPath> paths, std::size_t t_index, double lambda,
                             double delta) {
  if (!(delta > 0.0)) throw DomainError("moment_functional: delta must be positive");
  if (!(lambda > 0.0)) throw DomainError("moment_functional: lambda must be positive");
  return functional(paths, t_index, lambda, delta);
}

namespace {
double sdu_denominator(double alpha, double delta) {
  return delta <= 1.0 ? (1.0 - delta) * alpha + delta : (1.0 - delta) * alpha + delta * delta;
}
}  // namespace

double sdu_time_exponent(double alpha, double delta) {
  if (!(delta > 0.0)) throw DomainError("sdu: delta must be positive");
  return delta / sdu_denominator(alpha, delta);
}

double sdu_bound(double alpha, double delta, double lambda, double t, double c1) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("sdu_bound: alpha must lie in (0,1)");
  if (!(delta > 0.0 && lambda > 0.0 && t > 0.0 && c1 > 0.0))
    throw DomainError("sdu_bound: delta, lambda, t, c1 must be positive");
  const double den = sdu_denominator(alpha, delta);
  return std::numbers::e * std::exp(-c1 * std::pow(lambda, alpha / den) * std::pow(t, delta / den));
}

}  // namespace tor
