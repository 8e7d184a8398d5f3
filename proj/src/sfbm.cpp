#include "tor/sfbm.hpp"

#include "tor/errors.hpp"

namespace tor {

PointCloud simulate_sfbm_path(const BernsteinFunction& B, double H, int d, double t, std::size_t n_steps, Rng& rng,
                              std::size_t n_max) {
  if (!(t > 0.0)) throw DomainError("simulate_sfbm: horizon must be positive");
  if (n_steps < 1) throw ArgumentError("simulate_sfbm: n_steps must be >= 1");
  if (d < 1) throw ArgumentError("simulate_sfbm: dimension must be >= 1");
  if (!(H > 0.0 && H < 1.0)) throw DomainError("simulate_sfbm: Hurst index must lie in (0,1)");
  const double tau = t / static_cast<double>(n_steps);
  PointCloud out(d, n_steps);
  if (H == 0.5) {
    stream_sbm(B, d, tau, n_steps, rng, [&](std::size_t k, const std::vector<double>& x) {
      std::copy(x.begin(), x.end(), out[k - 1].begin());
    });
    return out;
  }
  if (n_steps > n_max)
    throw ArgumentError("simulate_sfbm: n_steps " + std::to_string(n_steps) + " exceeds the fBM limit " +
                        std::to_string(n_max));
  std::vector<double> times(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) times[k] = tau * static_cast<double>(k + 1);
  const auto clock = sample_path(B, times, rng);
  const auto fbm = sample_at_times(H, clock.values, d, rng, n_max);
  for (std::size_t k = 0; k < n_steps; ++k) std::copy(fbm.at(k).begin(), fbm.at(k).end(), out[k].begin());
  return out;
}

PointCloud simulate_sfbm_samples(const BernsteinFunction& B, double H, int d, double t, std::size_t n_steps, Rng& rng,
                                 std::size_t n_max) {
  return project(simulate_sfbm_path(B, H, d, t, n_steps, rng, n_max));
}

}  // namespace tor
