#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tor/random.hpp"

namespace tor {

inline constexpr std::size_t kFbmMaxPoints = 4096;
inline constexpr double kTimeMergeTolerance = 1e-12;

struct FractionalPath {
  double hurst = 0.5;
  int dim = 1;
  std::vector<double> times;
  std::vector<double> values;  // row-major, times.size() x dim

  std::size_t size() const { return times.size(); }
  std::span<const double> at(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// (s^{2H} + t^{2H} - |t-s|^{2H}) / 2
double fbm_covariance(double H, double s, double t);

/// Lower Cholesky factor of the Gram matrix at strictly increasing positive
/// times, with escalating diagonal jitter. Results are cached per (H, times).
std::shared_ptr<const Eigen::MatrixXd> fbm_gram_factor(double H, std::span<const double> times);

FractionalPath sample_at_times(double H, std::span<const double> times, int d, Rng& rng,
                               std::size_t n_max = kFbmMaxPoints);

/// fBM at T*k/n, k = 0..n (n+1 points) by circulant embedding.
FractionalPath sample_uniform_grid(double H, std::size_t n, double T, int d, Rng& rng);

void clear_fbm_cache();

}  // namespace tor
