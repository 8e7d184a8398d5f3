#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

namespace tor {

using TorusPoint = std::vector<double>;

/// Reduce mod 1 into [-1/2, 1/2).
double wrap(double x);
TorusPoint project(std::span<const double> x);
double torus_distance(std::span<const double> x, std::span<const double> y);

/// n points in R^d or on the torus, stored row-major.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(int dim, std::size_t n = 0) : dim_(dim), data_(n * static_cast<std::size_t>(dim), 0.0) {}
  PointCloud(int dim, std::vector<double> data);

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ > 0 ? data_.size() / static_cast<std::size_t>(dim_) : 0; }
  bool empty() const { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * udim(), udim()}; }
  std::span<double> operator[](std::size_t i) { return {data_.data() + i * udim(), udim()}; }
  void push_back(std::span<const double> x);

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t udim() const { return static_cast<std::size_t>(dim_); }
  int dim_ = 1;
  std::vector<double> data_;
};

PointCloud project(const PointCloud& cloud);

/// Fourier coefficients mu^(xi) = sum_j w_j exp(-2 pi i <xi, x_j>) stored
/// densely over the box |xi|_inf <= K, row-major with the first coordinate
/// slowest.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  SpectralMeasure(int dim, int cutoff, std::vector<std::complex<double>> coeffs);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  std::size_t side() const { return static_cast<std::size_t>(2 * cutoff_ + 1); }
  std::size_t mode_count() const { return coeffs_.size(); }

  std::size_t index(std::span<const int> xi) const;
  void mode(std::size_t index, std::span<int> xi) const;
  /// |xi|^2 of the mode stored at index.
  double norm2(std::size_t index) const;
  std::complex<double> coeff(std::span<const int> xi) const { return coeffs_[index(xi)]; }
  std::complex<double> coeff(std::size_t index) const { return coeffs_[index]; }

  const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }
  std::vector<std::complex<double>>& coeffs() { return coeffs_; }

  const PointCloud& samples() const { return samples_; }
  const std::vector<double>& weights() const { return weights_; }
  void set_samples(PointCloud samples, std::vector<double> weights);

 private:
  int dim_ = 1;
  int cutoff_ = 0;
  std::vector<std::complex<double>> coeffs_;
  PointCloud samples_;
  std::vector<double> weights_;
};

SpectralMeasure empirical_fourier(const PointCloud& samples, std::span<const double> weights, int K);
SpectralMeasure empirical_fourier(const PointCloud& samples, int K);

SpectralMeasure heat_smooth(const SpectralMeasure& m, double eps);
/// Multiplier exp(-2 pi^2 eps |xi|^2).
double heat_multiplier(double eps, double xi_norm2);
/// Smallest K with exp(-2 pi^2 eps K^2) < tol.
int heat_cutoff(double eps, double tol = 1e-12);

/// Wrapped Gaussian q_t(x) = (2 pi t)^{-d/2} sum_k exp(-|x-k|^2 / (2t)).
double heat_kernel(std::span<const double> x, double t);

/// (sum_{|xi|_inf <= K} phi(xi)^p)^{1/p}, phi(xi) = exp(-eps |xi|^2) / (|xi| + 1).
double phi_norm(double eps, double p, int d, int K);
/// Smallest K accepted by phi_norm.
int phi_cutoff(double eps);
double phi_asymptotic(double eps, double p, int d);

/// Values of sum_xi c_xi exp(2 pi i <xi, x>) at x = g / grid_n, g in {0..grid_n-1}^d,
/// for box coefficients with cutoff K. Requires grid_n >= 2K + 1.
std::vector<std::complex<double>> synthesize_on_grid(std::span<const std::complex<double>> box, int d, int K,
                                                     int grid_n);

nlohmann::json to_json(const SpectralMeasure& m);
SpectralMeasure spectral_from_json(const nlohmann::json& j);

}  // namespace tor
