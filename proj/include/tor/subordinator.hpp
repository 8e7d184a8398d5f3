#pragma once

#include <span>
#include <vector>

#include "tor/bernstein.hpp"
#include "tor/random.hpp"
#include "tor/stats.hpp"

namespace tor {

struct SubordinatorPath {
  std::vector<double> times;
  std::vector<double> values;
  BernsteinFunction kind;
};

/// Positive alpha-stable increment with E exp(-l X) = exp(-dt l^alpha)
/// (Kanter / Chambers-Mallows-Stuck representation).
double sample_stable_increment(double alpha, double dt, Rng& rng);

/// Increment S_{s+dt} - S_s for any supported kind.
double sample_increment(const BernsteinFunction& b, double dt, Rng& rng);

SubordinatorPath sample_path(const BernsteinFunction& b, std::span<const double> times, Rng& rng);

McEstimate empirical_laplace(std::span<const SubordinatorPath> paths, std::size_t t_index, double lambda);
McEstimate moment_functional(std::span<const SubordinatorPath> paths, std::size_t t_index, double lambda,
                             double delta);

/// e * exp(-c1 * lambda^{a/D} * t^{delta/D}) with D = (1-delta)a + delta for
/// delta <= 1 and D = (1-delta)a + delta^2 otherwise.
double sdu_bound(double alpha, double delta, double lambda, double t, double c1);
/// The t exponent delta/D of sdu_bound.
double sdu_time_exponent(double alpha, double delta);

}  // namespace tor
