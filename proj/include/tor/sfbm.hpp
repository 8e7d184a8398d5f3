#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tor/bernstein.hpp"
#include "tor/fbm.hpp"
#include "tor/random.hpp"
#include "tor/subordinator.hpp"
#include "tor/torus.hpp"

namespace tor {

/// Walks the d-dimensional subordinated Brownian motion (H = 1/2) through
/// k*tau, k = 1..n, calling visit(k, x) with the unprojected position.
/// Each step draws the clock increment first, then d Gaussian coordinates.
template <class Visit>
void stream_sbm(const BernsteinFunction& B, int d, double tau, std::size_t n, Rng& rng, Visit&& visit) {
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double ds = sample_increment(B, tau, rng);
    const double s = std::sqrt(ds);
    for (auto& xc : x) xc += s * rng.normal();
    visit(k, static_cast<const std::vector<double>&>(x));
  }
}

/// X^H(S_{k tau}) in R^d for k = 1..n_steps, tau = t / n_steps.
PointCloud simulate_sfbm_path(const BernsteinFunction& B, double H, int d, double t, std::size_t n_steps, Rng& rng,
                              std::size_t n_max = kFbmMaxPoints);

/// Same samples projected onto the torus.
PointCloud simulate_sfbm_samples(const BernsteinFunction& B, double H, int d, double t, std::size_t n_steps, Rng& rng,
                                 std::size_t n_max = kFbmMaxPoints);

}  // namespace tor
