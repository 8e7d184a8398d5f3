#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tor/bernstein.hpp"

namespace tor {

struct CheckReport {
  std::string name;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  std::map<std::string, double> details;
};

nlohmann::json to_json(const CheckReport& r);

using Mode = std::vector<int>;

struct SduOptions {
  std::uint64_t seed = 1;
  double slope_tolerance = 0.1;
};

/// Fits the t exponent of -log E exp(-lambda S_t^delta).
CheckReport verify_sdu(const BernsteinFunction& B, double delta, double lambda, std::span<const double> t_grid,
                       std::size_t replicas, const SduOptions& opt = {});

struct SpectralOptions {
  std::uint64_t seed = 1;
  double path_dt = 1.0 / 512.0;
  double hurst = 0.5;
  double c_screen = 10.0;
};

/// mu^_t(xi) for every replica, time and mode: out[r][i*modes + k], using the
/// Riemann sum with step path_dt. Paths depend only on (seed, B, H, d, path_dt,
/// max time), so different mode lists see identical samples.
std::vector<std::vector<std::complex<double>>> spectral_samples(const BernsteinFunction& B, int d,
                                                                std::span<const Mode> modes,
                                                                std::span<const double> t_grid, std::size_t replicas,
                                                                const SpectralOptions& opt);

/// Closed form of E|mu^_t(xi)|^2 for H = 1/2: (2/(tb))(1 - (1 - e^{-bt})/(tb)).
double spectral_second_moment_closed_form(double b, double t);
/// (1/n^2) sum_{k,l} e^{-b|k-l| tau}.
double discrete_second_moment_exact(double b, double tau, std::size_t n);

CheckReport verify_spectral_second_moment(const BernsteinFunction& B, int d, const Mode& xi,
                                          std::span<const double> t_grid, std::size_t replicas,
                                          const SpectralOptions& opt = {});

/// Several modes checked on one shared set of paths.
CheckReport verify_spectral_second_moment(const BernsteinFunction& B, int d, std::span<const Mode> modes,
                                          std::span<const double> t_grid, std::size_t replicas,
                                          const SpectralOptions& opt = {});

CheckReport verify_discrete_second_moment(const BernsteinFunction& B, double H, int d, const Mode& xi, double tau,
                                          double t, std::size_t replicas, const SpectralOptions& opt = {});

CheckReport verify_mixed_moment(const BernsteinFunction& B, int d, std::span<const Mode> xi_list, double t,
                                std::size_t replicas, const SpectralOptions& opt = {});

/// Right-hand side of the mixed-moment screen without the constant.
double mixed_moment_bound(const BernsteinFunction& B, double H, std::span<const Mode> xi_list, double t);

CheckReport npoint_lower_check(int d, std::span<const int> N_list, double p, double tolerance = 0.15);

/// x [(1 - log x)^{1/delta} - (-log x)^{1/delta}]^{delta - alpha}
double convexity_g(double x, double delta, double alpha);
CheckReport convexity_check(double delta, double alpha, int grid_n);

}  // namespace tor
