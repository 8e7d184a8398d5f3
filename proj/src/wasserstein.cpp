#include "tor/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "tor/errors.hpp"
#include "tor/transport.hpp"

namespace tor {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
}  // namespace

std::string to_string(WMethod m) {
  switch (m) {
    case WMethod::ExactCircle:
      return "exact_circle";
    case WMethod::Assignment:
      return "assignment";
    case WMethod::Sinkhorn:
      return "sinkhorn";
    case WMethod::FourierUpper:
      return "fourier_upper";
    case WMethod::FourierLower:
      return "fourier_lower";
  }
  return "?";
}

WMethod method_from_string(const std::string& s) {
  for (auto m : {WMethod::ExactCircle, WMethod::Assignment, WMethod::Sinkhorn, WMethod::FourierUpper,
                 WMethod::FourierLower})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown estimator method '" + s + "'");
}

double grad_poisson_l2(const SpectralMeasure& m, double eps) {
  if (!(eps > 0.0)) throw DomainError("grad_poisson_l2: eps must be positive");
  double s = 0.0;
  const auto& c = m.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double r2 = m.norm2(i);
    if (r2 == 0.0) continue;
    s += std::exp(-4.0 * kPi2 * eps * r2) * std::norm(c[i]) / (4.0 * kPi2 * r2);
  }
  return std::sqrt(s);
}

namespace {

double lp_on_grid(const SpectralMeasure& m, double eps, int p, int grid_n) {
  const int d = m.dim(), K = m.cutoff();
  const std::size_t modes = m.mode_count();
  std::vector<double> mag2;
  std::vector<int> xi(static_cast<std::size_t>(d));
  for (int axis = 0; axis < d; ++axis) {
    std::vector<std::complex<double>> g(modes);
    for (std::size_t i = 0; i < modes; ++i) {
      const double r2 = m.norm2(i);
      if (r2 == 0.0) continue;
      m.mode(i, xi);
      const double f = std::exp(-2.0 * kPi2 * eps * r2) * xi[static_cast<std::size_t>(axis)] / (2.0 * kPi * r2);
      g[i] = std::complex<double>(0.0, f) * m.coeff(i);
    }
    const auto vals = synthesize_on_grid(g, d, K, grid_n);
    if (mag2.empty()) mag2.assign(vals.size(), 0.0);
    for (std::size_t k = 0; k < vals.size(); ++k) mag2[k] += vals[k].real() * vals[k].real();
  }
  double s = 0.0;
  for (double q : mag2) s += std::pow(q, 0.5 * p);
  return std::pow(s / static_cast<double>(mag2.size()), 1.0 / p);
}

}  // namespace

double grad_poisson_lp(const SpectralMeasure& m, double eps, int p, int grid_n) {
  if (!(eps > 0.0)) throw DomainError("grad_poisson_lp: eps must be positive");
  if (p < 2 || p % 2 != 0) throw DomainError("grad_poisson_lp: p must be an even integer >= 2");
  if (m.dim() > 3) throw ArgumentError("grad_poisson_lp: grid quadrature limited to d <= 3");
  if (grid_n < 4 * m.cutoff()) throw ArgumentError("grad_poisson_lp: grid_n must be at least 4K");
  const double coarse = lp_on_grid(m, eps, p, grid_n);
  const double fine = lp_on_grid(m, eps, p, 2 * grid_n);
  const double scale = std::max(std::abs(fine), 1e-300);
  if (std::abs(fine - coarse) > 1e-6 * scale && std::abs(fine - coarse) > 1e-300)
    throw PrecisionError("grad_poisson_lp: grid of " + std::to_string(grid_n) +
                         " points per axis aliases; refine the grid");
  return fine;
}

double gradient_energy(const PointCloud& pts, double eps, double tol) {
  if (!(eps > 0.0)) throw DomainError("gradient_energy: eps must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("gradient_energy: tol must lie in (0,1)");
  const std::size_t n = pts.size();
  if (n == 0) throw ArgumentError("gradient_energy: no samples");
  const int d = pts.dim();
  const double r2max = -std::log(tol) / (4.0 * kPi2 * eps);
  const int K = static_cast<int>(std::floor(std::sqrt(r2max)));
  if (K < 1) return 0.0;
  const std::size_t side = static_cast<std::size_t>(2 * K + 1);

  // er/ei[(c*side + k+K)*n + j] = exp(-2 pi i k x_jc)
  std::vector<double> er(static_cast<std::size_t>(d) * side * n), ei(er.size());
  for (int c = 0; c < d; ++c)
    for (int k = -K; k <= K; ++k) {
      const std::size_t off = (static_cast<std::size_t>(c) * side + static_cast<std::size_t>(k + K)) * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double th = 2.0 * kPi * k * pts[j][static_cast<std::size_t>(c)];
        er[off + j] = std::cos(th);
        ei[off + j] = -std::sin(th);
      }
    }
  auto row = [&](int c, int k) {
    return (static_cast<std::size_t>(c) * side + static_cast<std::size_t>(k + K)) * n;
  };

  // prefix products per level
  std::vector<double> pr(static_cast<std::size_t>(d) * n), pim(pr.size());
  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  double total = 0.0;

  auto last_level = [&](int c, const double* qr, const double* qi, double r2, bool zero) {
    const int kmin = zero ? 1 : -K;
    for (int k = kmin; k <= K; ++k) {
      const double rr = r2 + static_cast<double>(k) * k;
      if (rr > r2max) continue;
      const double* xr = &er[row(c, k)];
      const double* xim = &ei[row(c, k)];
      double sr = 0.0, si = 0.0;
      if (qr == nullptr) {
#pragma omp simd reduction(+ : sr, si)
        for (std::size_t j = 0; j < n; ++j) {
          sr += xr[j];
          si += xim[j];
        }
      } else {
#pragma omp simd reduction(+ : sr, si)
        for (std::size_t j = 0; j < n; ++j) {
          sr += qr[j] * xr[j] - qi[j] * xim[j];
          si += qr[j] * xim[j] + qi[j] * xr[j];
        }
      }
      total += 2.0 * std::exp(-4.0 * kPi2 * eps * rr) * (sr * sr + si * si) * inv_n2 / (4.0 * kPi2 * rr);
    }
  };

  auto recurse = [&](auto&& self, int c, double r2, bool zero) -> void {
    const double* qr = c == 0 ? nullptr : &pr[static_cast<std::size_t>(c - 1) * n];
    const double* qi = c == 0 ? nullptr : &pim[static_cast<std::size_t>(c - 1) * n];
    if (c == d - 1) {
      last_level(c, qr, qi, r2, zero);
      return;
    }
    double* outr = &pr[static_cast<std::size_t>(c) * n];
    double* outi = &pim[static_cast<std::size_t>(c) * n];
    for (int k = zero ? 0 : -K; k <= K; ++k) {
      const double rr = r2 + static_cast<double>(k) * k;
      if (rr > r2max) continue;
      const double* xr = &er[row(c, k)];
      const double* xim = &ei[row(c, k)];
      if (qr == nullptr) {
        std::copy(xr, xr + n, outr);
        std::copy(xim, xim + n, outi);
      } else {
        for (std::size_t j = 0; j < n; ++j) {
          outr[j] = qr[j] * xr[j] - qi[j] * xim[j];
          outi[j] = qr[j] * xim[j] + qi[j] * xr[j];
        }
      }
      self(self, c + 1, rr, zero && k == 0);
    }
  };
  recurse(recurse, 0, 0.0, true);
  return total;
}

WassersteinEstimate fourier_upper_from_energy(double energy, double eps, double p) {
  if (!(eps > 0.0)) throw DomainError("fourier_upper: eps must be positive");
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("fourier_upper: energy form requires p in [1,2]");
  WassersteinEstimate e;
  e.value = std::sqrt(eps) + std::sqrt(std::max(energy, 0.0));
  e.order = p;
  e.method = WMethod::FourierUpper;
  e.eps = eps;
  return e;
}

WassersteinEstimate fourier_upper(const SpectralMeasure& m, double eps, double p) {
  if (!(eps > 0.0)) throw DomainError("fourier_upper: eps must be positive");
  if (!(p >= 1.0)) throw DomainError("fourier_upper: p must be >= 1");
  WassersteinEstimate e;
  e.order = p;
  e.method = WMethod::FourierUpper;
  e.eps = eps;
  e.cutoff = m.cutoff();
  if (p <= 2.0) {
    e.value = std::sqrt(eps) + grad_poisson_l2(m, eps);
    return e;
  }
  const double pi = std::round(p);
  if (pi != p || static_cast<long>(pi) % 2 != 0)
    throw DomainError("fourier_upper: p > 2 must be an even integer");
  const int ip = static_cast<int>(pi);
  int grid = 8;
  while (grid < ip * m.cutoff() + 1) grid *= 2;
  const double g = grad_poisson_lp(m, eps, ip, grid);
  e.value = std::pow(std::pow(eps, p / 2.0) + std::pow(g, p), 1.0 / p);
  return e;
}

LowerSup lower_functional(double a, double b, double eps, double C) {
  if (!(a > 0.0)) return {};
  if (!(b > 0.0)) throw DomainError("lower_functional: b must be positive when a > 0");
  auto f = [&](double k) { return a / k - C * b / (k * k * k); };
  const double k_star = std::sqrt(3.0 * C * b / a);
  const double k_fixed = 2.0 * std::sqrt(C * eps);
  const double v_star = f(k_star), v_fixed = f(k_fixed);
  if (v_star >= v_fixed) return {std::max(0.0, v_star), k_star};
  return {std::max(0.0, v_fixed), k_fixed};
}

WassersteinEstimate fourier_lower(const SpectralMeasure& m, double eps, double C) {
  if (!(eps > 0.0)) throw DomainError("fourier_lower: eps must be positive");
  if (!(C > 0.0)) throw DomainError("fourier_lower: C must be positive");
  WassersteinEstimate e;
  e.order = 1.0;
  e.method = WMethod::FourierLower;
  e.eps = eps;
  e.cutoff = m.cutoff();
  const double l2 = grad_poisson_l2(m, eps);
  const double a = l2 * l2;
  if (a == 0.0) return e;
  int grid = 8;
  while (grid < 4 * m.cutoff() + 1) grid *= 2;
  const double l4 = grad_poisson_lp(m, eps, 4, grid);
  const double b = std::pow(l4, 4);
  const auto sup = lower_functional(a, b, eps, C);
  e.value = sup.value;
  e.kappa = sup.kappa;
  return e;
}

namespace {

struct Atom {
  double y;  // position shifted into [0, 1)
  double w;
};

std::vector<Atom> sorted_atoms(std::span<const double> atoms, std::span<const double> weights) {
  if (atoms.empty()) throw ArgumentError("circle_wp_exact: no atoms");
  if (atoms.size() != weights.size()) throw ArgumentError("circle_wp_exact: one weight per atom required");
  std::vector<Atom> a(atoms.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw ArgumentError("circle_wp_exact: negative weight");
    double y = wrap(atoms[i]) + 0.5;
    if (y >= 1.0) y -= 1.0;
    a[i] = {y, weights[i]};
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("circle_wp_exact: weights must sum to 1");
  std::sort(a.begin(), a.end(), [](const Atom& l, const Atom& r) { return l.y < r.y; });
  return a;
}

// integral over [a, b] of |z0 - y|
double abs_linear(double z0, double a, double b) {
  if (z0 <= a) return ((b - z0) * (b - z0) - (a - z0) * (a - z0)) / 2.0;
  if (z0 >= b) return ((z0 - a) * (z0 - a) - (z0 - b) * (z0 - b)) / 2.0;
  return ((z0 - a) * (z0 - a) + (b - z0) * (b - z0)) / 2.0;
}

double circle_w1(const std::vector<Atom>& atoms) {
  // G = F - id is piecewise (c - y) on segments [a, b); G(Y) for uniform Y is
  // a mixture of uniform laws on (c - b, c - a].
  struct Seg {
    double a, b, c;
  };
  std::vector<Seg> segs;
  segs.reserve(atoms.size() + 1);
  double prev = 0.0, F = 0.0;
  for (const auto& at : atoms) {
    if (at.y > prev) segs.push_back({prev, at.y, F});
    F += at.w;
    prev = std::max(prev, at.y);
  }
  if (prev < 1.0) segs.push_back({prev, 1.0, F});

  std::vector<std::pair<double, int>> ev;
  ev.reserve(2 * segs.size());
  for (const auto& s : segs) {
    ev.emplace_back(s.c - s.b, +1);
    ev.emplace_back(s.c - s.a, -1);
  }
  std::sort(ev.begin(), ev.end());
  double cdf = 0.0, pos = ev.front().first, med = pos;
  long dens = 0;
  for (const auto& [x, dlt] : ev) {
    const double gain = static_cast<double>(dens) * (x - pos);
    if (dens > 0 && cdf + gain >= 0.5) {
      med = pos + (0.5 - cdf) / static_cast<double>(dens);
      break;
    }
    cdf += gain;
    pos = x;
    dens += dlt;
    med = pos;
  }
  double w1 = 0.0;
  for (const auto& s : segs) w1 += abs_linear(s.c - med, s.a, s.b);
  return w1;
}

// integral over u in [0,1] of |Q(u + theta) - u|^p with Q the periodic quantile
double circle_quantile_cost(const std::vector<Atom>& atoms, double theta, double p) {
  const double lo = theta, hi = 1.0 + theta;
  auto prim = [p](double z) {
    const double az = std::abs(z);
    return (z < 0 ? 1.0 : -1.0) * std::pow(az, p + 1.0) / (p + 1.0);
  };
  double total = 0.0;
  for (int j = -1; j <= 2; ++j) {
    double cum = static_cast<double>(j);
    for (const auto& at : atoms) {
      const double a = std::max(cum, lo);
      cum += at.w;
      const double b = std::min(cum, hi);
      if (b <= a) continue;
      const double A = at.y + j + theta;  // integrand |A - v|
      total += prim(A - b) - prim(A - a);
    }
  }
  return total;
}

}  // namespace

WassersteinEstimate circle_wp_exact(std::span<const double> atoms, std::span<const double> weights, double p) {
  if (!(p >= 1.0)) throw DomainError("circle_wp_exact: p must be >= 1");
  const auto a = sorted_atoms(atoms, weights);
  WassersteinEstimate e;
  e.order = p;
  e.method = WMethod::ExactCircle;
  if (p == 1.0) {
    e.value = circle_w1(a);
    return e;
  }
  // cost is convex in theta; golden-section search
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -1.0, hi = 1.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = circle_quantile_cost(a, x1, p), f2 = circle_quantile_cost(a, x2, p);
  while (hi - lo > 1e-13) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = circle_quantile_cost(a, x1, p);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = circle_quantile_cost(a, x2, p);
    }
  }
  e.value = std::pow(std::max(0.0, std::min(f1, f2)), 1.0 / p);
  return e;
}

WassersteinEstimate circle_wp_exact(std::span<const double> atoms, double p) {
  std::vector<double> w(atoms.size(), atoms.empty() ? 0.0 : 1.0 / static_cast<double>(atoms.size()));
  return circle_wp_exact(atoms, w, p);
}

namespace {

double ground_distance(std::span<const double> x, std::span<const double> y, Ground g) {
  if (g == Ground::Torus) return torus_distance(x, y);
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
  return std::sqrt(s);
}

double powered(double dist, double p) { return p == 1.0 ? dist : p == 2.0 ? dist * dist : std::pow(dist, p); }

std::vector<double> cost_matrix(const PointCloud& X, const PointCloud& Y, double p, Ground g) {
  const std::size_t n = X.size(), m = Y.size();
  std::vector<double> c(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) c[i * m + j] = powered(ground_distance(X[i], Y[j], g), p);
  return c;
}

}  // namespace

WassersteinEstimate discrete_wp(const PointCloud& X, const PointCloud& Y, double p, Ground ground) {
  if (X.size() != Y.size()) throw ArgumentError("discrete_wp: point sets must have equal size");
  if (X.dim() != Y.dim()) throw ArgumentError("discrete_wp: dimension mismatch");
  if (X.empty()) throw ArgumentError("discrete_wp: empty point sets");
  if (X.size() > 2048) throw ArgumentError("discrete_wp: at most 2048 points");
  if (!(p > 0.0)) throw DomainError("discrete_wp: p must be positive");
  const std::size_t n = X.size();
  const auto c = cost_matrix(X, Y, p, ground);
  const auto plan = solve_assignment(c, n);
  WassersteinEstimate e;
  e.order = p;
  e.method = WMethod::Assignment;
  e.value = std::pow(plan.cost / static_cast<double>(n), std::min(1.0, 1.0 / p));
  return e;
}

PointCloud uniform_grid(int d, int G) {
  if (d < 1 || G < 1) throw ArgumentError("uniform_grid: invalid shape");
  std::size_t M = 1;
  for (int c = 0; c < d; ++c) M *= static_cast<std::size_t>(G);
  PointCloud grid(d, M);
  for (std::size_t i = 0; i < M; ++i) {
    std::size_t rem = i;
    for (int c = d - 1; c >= 0; --c) {
      grid[i][static_cast<std::size_t>(c)] = (static_cast<double>(rem % static_cast<std::size_t>(G)) + 0.5) / G - 0.5;
      rem /= static_cast<std::size_t>(G);
    }
  }
  return grid;
}

WassersteinEstimate grid_wp(const PointCloud& X, double p, int refine) {
  if (X.empty()) throw ArgumentError("grid_wp: empty point set");
  if (refine < 1) throw ArgumentError("grid_wp: refine must be >= 1");
  if (!(p >= 1.0)) throw DomainError("grid_wp: p must be >= 1");
  const int d = X.dim();
  const std::size_t N = X.size();
  const double target = static_cast<double>(refine) * static_cast<double>(N);
  const int g0 = std::max(1, static_cast<int>(std::lround(std::pow(target, 1.0 / d))));

  // pick a side length whose grid size shares the most with N
  int G = g0;
  std::size_t best_l = 0;
  for (int g = std::max(1, g0 - 3); g <= g0 + 3; ++g) {
    std::size_t M = 1;
    for (int c = 0; c < d; ++c) M *= static_cast<std::size_t>(g);
    const std::size_t l = std::lcm(N, M);
    if (best_l == 0 || l < best_l) {
      best_l = l;
      G = g;
    }
  }
  const PointCloud grid = uniform_grid(d, G);
  const std::size_t M = grid.size();
  const std::size_t L = std::lcm(N, M);
  const std::size_t reps = L / M;
  if (L > 64 * std::max(N, M)) throw ConfigError("grid_wp: sample count incompatible with a grid of ~refine*N cells");

  std::vector<int> supply(N, static_cast<int>(L / N));
  auto cost = [&](std::size_t i, std::size_t j) { return powered(torus_distance(X[i], grid[j / reps]), p); };
  const auto plan = solve_transport(cost, N, L, supply);
  WassersteinEstimate e;
  e.order = p;
  e.method = WMethod::Assignment;
  e.value = std::pow(plan.cost / static_cast<double>(L), 1.0 / p);
  return e;
}

WassersteinEstimate sinkhorn_wp(const PointCloud& X, const PointCloud& Y, double p, double reg, int iters,
                                Ground ground) {
  if (!(reg > 0.0)) throw DomainError("sinkhorn_wp: reg must be positive");
  if (iters < 1) throw ArgumentError("sinkhorn_wp: iters must be >= 1");
  if (X.empty() || Y.empty()) throw ArgumentError("sinkhorn_wp: empty point sets");
  if (X.dim() != Y.dim()) throw ArgumentError("sinkhorn_wp: dimension mismatch");
  const std::size_t n = X.size(), m = Y.size();
  const auto C = cost_matrix(X, Y, p, ground);
  const double a = 1.0 / static_cast<double>(n), b = 1.0 / static_cast<double>(m);
  const double log_a = std::log(a), log_b = std::log(b);
  std::vector<double> f(n, 0.0), g(m, 0.0);

  auto update_f = [&](double r) {
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, (g[j] - C[i * m + j]) / r);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp((g[j] - C[i * m + j]) / r - mx);
      f[i] = r * log_a - r * (mx + std::log(s));
    }
  };
  auto update_g = [&](double r) {
    for (std::size_t j = 0; j < m; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, (f[i] - C[i * m + j]) / r);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::exp((f[i] - C[i * m + j]) / r - mx);
      g[j] = r * log_b - r * (mx + std::log(s));
    }
  };
  // plan P, its marginals, and the L1 marginal error
  std::vector<double> P(n * m), rs(n), cs(m);
  auto marginals = [&](double r, const std::vector<double>& ff, const std::vector<double>& gg) {
    std::fill(rs.begin(), rs.end(), 0.0);
    std::fill(cs.begin(), cs.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const double v = std::exp((ff[i] + gg[j] - C[i * m + j]) / r);
        P[i * m + j] = v;
        rs[i] += v;
        cs[j] += v;
      }
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err += std::abs(rs[i] - a);
    for (std::size_t j = 0; j < m; ++j) err += std::abs(cs[j] - b);
    return err;
  };

  const double cmax = *std::max_element(C.begin(), C.end());
  double r = std::max(reg, cmax);
  int used = 0;
  double err = 1.0;
  for (;;) {
    const bool last = r <= reg;
    // the final stage hands over to Newton once coarse
    const double target = 1e-3;
    int stage = 0;
    for (;;) {
      update_f(r);
      update_g(r);
      ++used;
      ++stage;
      if (stage % 5 == 0 || used >= iters) {
        err = marginals(r, f, g);
        if (err <= target) break;
      }
      if (used >= iters || (!last && stage >= 500)) break;
    }
    if (last) break;
    r = std::max(reg, r * 0.5);
  }

  // Sinkhorn-Newton: J d = -F with J = [[diag rs, P], [P^T, diag cs]] / r, solved by
  // Jacobi-preconditioned CG; every matvec counts as one iteration
  err = marginals(r, f, g);
  const std::size_t N = n + m;
  std::vector<double> res(N), d(N), z(N), q(N), Ap(N), pp(N), ftry(n), gtry(m);
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = rs[i] * x[i];
      for (std::size_t j = 0; j < m; ++j) s += P[i * m + j] * x[n + j];
      y[i] = s / r;
    }
    for (std::size_t j = 0; j < m; ++j) y[n + j] = cs[j] * x[n + j] / r;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) y[n + j] += P[i * m + j] * x[i] / r;
  };
  while (err > 1e-6 && used < iters) {
    for (std::size_t i = 0; i < n; ++i) res[i] = a - rs[i];
    for (std::size_t j = 0; j < m; ++j) res[n + j] = b - cs[j];
    auto diag = [&](std::size_t k) { return (k < n ? rs[k] : cs[k - n]) / r; };
    std::fill(d.begin(), d.end(), 0.0);
    q = res;
    for (std::size_t k = 0; k < N; ++k) z[k] = q[k] / diag(k);
    pp = z;
    double rz = 0.0, r0 = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      rz += q[k] * z[k];
      r0 += q[k] * q[k];
    }
    for (int it = 0; it < 200 && used < iters; ++it) {
      apply(pp, Ap);
      ++used;
      double pAp = 0.0;
      for (std::size_t k = 0; k < N; ++k) pAp += pp[k] * Ap[k];
      if (!(pAp > 0.0)) break;
      const double al = rz / pAp;
      double qq = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        d[k] += al * pp[k];
        q[k] -= al * Ap[k];
        qq += q[k] * q[k];
      }
      if (qq <= 1e-12 * r0) break;
      double rz2 = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        z[k] = q[k] / diag(k);
        rz2 += q[k] * z[k];
      }
      for (std::size_t k = 0; k < N; ++k) pp[k] = z[k] + rz2 / rz * pp[k];
      rz = rz2;
    }
    // backtracking on the marginal error
    double step = 1.0, best = err;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) ftry[i] = f[i] + step * d[i];
      for (std::size_t j = 0; j < m; ++j) gtry[j] = g[j] + step * d[n + j];
      best = marginals(r, ftry, gtry);
      if (best < err) break;
    }
    if (!(best < err)) break;
    f = ftry;
    g = gtry;
    err = best;
  }
  err = marginals(r, f, g);
  if (!(err <= 1e-6))
    throw ConvergenceError("sinkhorn_wp: marginal error " + std::to_string(err) + " after " +
                           std::to_string(used) + " iterations");
  double cost = 0.0;
  for (std::size_t k = 0; k < n * m; ++k) cost += P[k] * C[k];
  WassersteinEstimate e;
  e.order = p;
  e.method = WMethod::Sinkhorn;
  e.reg = reg;
  e.value = std::pow(cost, std::min(1.0, 1.0 / p));
  return e;
}

}  // namespace tor
