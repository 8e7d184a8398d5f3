#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace tor {

/// Welford accumulator. Identical inputs give an exact mean and zero variance.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

inline McEstimate summarize(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return {s.mean(), s.std_error()};
}

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;
};

// Weighted least squares of log y on log x with weights (y/sigma)^2.
// When any sigma is nonpositive all points get equal weight. The slope error
// is scaled by the weighted residual variance.
LogLogFit fit_loglog(std::span<const FitPoint> points);

// Ordinary least squares slope of y on x (no logs).
LogLogFit fit_linear(std::span<const double> x, std::span<const double> y);

}  // namespace tor
