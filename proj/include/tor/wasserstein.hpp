#pragma once

#include <optional>
#include <span>
#include <string>

#include "tor/torus.hpp"

namespace tor {

enum class WMethod { ExactCircle, Assignment, Sinkhorn, FourierUpper, FourierLower };
enum class Ground { Torus, Euclidean };

std::string to_string(WMethod m);
WMethod method_from_string(const std::string& s);

struct WassersteinEstimate {
  double value = 0.0;
  double order = 1.0;
  WMethod method = WMethod::ExactCircle;
  std::optional<double> eps;
  std::optional<double> kappa;
  std::optional<int> cutoff;
  std::optional<double> reg;
};

/// ||grad u_eps||_{L^2} where -Lap u_eps = P_eps(mu - m).
double grad_poisson_l2(const SpectralMeasure& m, double eps);
/// ||grad u_eps||_{L^p} for even p by grid synthesis and trapezoid quadrature (d <= 3).
double grad_poisson_lp(const SpectralMeasure& m, double eps, int p, int grid_n);

/// ||grad u_eps||^2_{L^2} for the uniform empirical measure of torus points,
/// summed directly from the samples over the half ball where the squared heat
/// multiplier exp(-4 pi^2 eps |xi|^2) is at least tol.
double gradient_energy(const PointCloud& torus_points, double eps, double tol = 1e-12);

WassersteinEstimate fourier_upper(const SpectralMeasure& m, double eps, double p);
/// Same functional for p in [1,2] from a precomputed gradient energy.
WassersteinEstimate fourier_upper_from_energy(double energy, double eps, double p);
struct LowerSup {
  double value = 0.0;
  double kappa = 0.0;
};
/// max(0, a/k - C b/k^3) at the better of k* = sqrt(3Cb/a) and k = 2 sqrt(C eps).
LowerSup lower_functional(double a, double b, double eps, double C = 1.0);
WassersteinEstimate fourier_lower(const SpectralMeasure& m, double eps, double C = 1.0);

/// W_p between atoms on the circle [-1/2, 1/2) and the uniform law.
WassersteinEstimate circle_wp_exact(std::span<const double> atoms, std::span<const double> weights, double p);
WassersteinEstimate circle_wp_exact(std::span<const double> atoms, double p);

/// Exact W_p between uniform measures on equal-size point sets.
WassersteinEstimate discrete_wp(const PointCloud& X, const PointCloud& Y, double p, Ground ground);

/// W_p between the uniform measure on torus points and the uniform law,
/// the latter discretized by a grid of about refine * N cell centres.
WassersteinEstimate grid_wp(const PointCloud& X, double p, int refine = 16);

/// Entropic transport cost <P, C> between uniform measures (log-domain
/// Sinkhorn with eps-scaling). Upper-biased relative to the exact value.
WassersteinEstimate sinkhorn_wp(const PointCloud& X, const PointCloud& Y, double p, double reg, int iters,
                                Ground ground = Ground::Torus);

/// Cell centres of the G^d uniform grid in [-1/2, 1/2)^d.
PointCloud uniform_grid(int d, int G);

}  // namespace tor
