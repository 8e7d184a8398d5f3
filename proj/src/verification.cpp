#include "tor/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "tor/errors.hpp"
#include "tor/parallel.hpp"
#include "tor/sfbm.hpp"
#include "tor/stats.hpp"
#include "tor/subordinator.hpp"
#include "tor/wasserstein.hpp"

namespace tor {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

std::string num(double x) {
  std::string s = std::to_string(x);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string mode_label(const Mode& m) {
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += "_";
    s += m[i] < 0 ? "m" + std::to_string(-m[i]) : std::to_string(m[i]);
  }
  return s;
}

double norm2(const Mode& m) {
  double s = 0.0;
  for (int k : m) s += static_cast<double>(k) * k;
  return s;
}

std::complex<double> ipow(std::complex<double> z, int k) {
  if (k < 0) {
    z = std::conj(z);
    k = -k;
  }
  std::complex<double> r{1.0, 0.0};
  while (k > 0) {
    if (k & 1) r = {r.real() * z.real() - r.imag() * z.imag(), r.real() * z.imag() + r.imag() * z.real()};
    z = {z.real() * z.real() - z.imag() * z.imag(), 2.0 * z.real() * z.imag()};
    k >>= 1;
  }
  return r;
}

// exp(-2 pi i <xi, x>) as a product of per-axis integer powers, so that the
// phasor of -xi is exactly the conjugate of the phasor of xi.
void phasors(std::span<const Mode> modes, const std::vector<double>& x, std::vector<std::complex<double>>& base,
             std::vector<std::complex<double>>& out) {
  for (std::size_t c = 0; c < x.size(); ++c) {
    double sn, cs;
    ::sincos(kTwoPi * wrap(x[c]), &sn, &cs);
    base[c] = {cs, -sn};
  }
  for (std::size_t m = 0; m < modes.size(); ++m) {
    std::complex<double> v{1.0, 0.0};
    for (std::size_t c = 0; c < x.size(); ++c) {
      const auto w = ipow(base[c], modes[m][c]);
      v = {v.real() * w.real() - v.imag() * w.imag(), v.real() * w.imag() + v.imag() * w.real()};
    }
    out[m] = v;
  }
}

std::vector<std::size_t> checkpoints(std::span<const double> t_grid, double dt) {
  std::vector<std::size_t> ks;
  for (double t : t_grid) {
    const double q = t / dt;
    const double r = std::round(q);
    if (!(r >= 1.0) || std::abs(q - r) > 1e-9 * std::max(1.0, q))
      throw ArgumentError("time " + num(t) + " is not a positive multiple of the path step " + num(dt));
    ks.push_back(static_cast<std::size_t>(r));
  }
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (ks[i] <= ks[i - 1]) throw ArgumentError("time grid must be strictly increasing");
  return ks;
}

void check_modes(std::span<const Mode> modes, int d) {
  if (modes.empty()) throw ArgumentError("at least one mode required");
  for (const auto& m : modes)
    if (m.size() != static_cast<std::size_t>(d)) throw ArgumentError("mode dimension does not match d");
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json d = nlohmann::json::object();
  for (const auto& [k, v] : r.details) d[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  return {{"name", r.name}, {"pass", r.pass}, {"statistic", r.statistic}, {"threshold", r.threshold}, {"details", d}};
}

CheckReport verify_sdu(const BernsteinFunction& B, double delta, double lambda, std::span<const double> t_grid,
                       std::size_t replicas, const SduOptions& opt) {
  if (t_grid.size() < 5) throw ArgumentError("verify_sdu: need at least 5 times");
  if (replicas < 2) throw ArgumentError("verify_sdu: need at least 2 replicas");
  if (!(delta > 0.0 && lambda > 0.0)) throw DomainError("verify_sdu: delta and lambda must be positive");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
      throw ArgumentError("verify_sdu: t_grid must be positive and increasing");

  const double a = B.growth_index();
  const double den = delta <= 1.0 ? (1.0 - delta) * a + delta : (1.0 - delta) * a + delta * delta;
  const double predicted = delta / den;

  std::vector<SubordinatorPath> paths(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng = make_stream(opt.seed, "sdu", r);
    paths[r] = sample_path(B, t_grid, rng);
  });

  CheckReport rep;
  rep.name = "sdu";
  std::vector<FitPoint> pts;
  std::vector<double> y(t_grid.size());
  bool below = true;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const auto m = moment_functional(paths, i, lambda, delta);
    if (!(m.estimate >= 1e-14))
      throw RangeError("verify_sdu: moment at t=" + num(t_grid[i]) + " below 1e-14; shrink t_grid or lambda");
    y[i] = -std::log(m.estimate);
    pts.push_back({t_grid[i], y[i], m.std_error / m.estimate});
    rep.details["moment_t" + num(t_grid[i])] = m.estimate;
    rep.details["stderr_t" + num(t_grid[i])] = m.std_error;
  }
  const auto fit = fit_loglog(pts);
  double c1 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double X = std::pow(lambda, a / den) * std::pow(t_grid[i], predicted);
    c1 = std::min(c1, y[i] / X);
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double X = std::pow(lambda, a / den) * std::pow(t_grid[i], predicted);
    if (!(std::exp(-y[i]) <= std::numbers::e * std::exp(-c1 * X))) below = false;
  }

  // lambda exponent at the middle time, informational
  const std::size_t mid = t_grid.size() / 2;
  std::vector<FitPoint> lp;
  for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const auto m = moment_functional(paths, mid, lambda * f, delta);
    if (m.estimate >= 1e-14 && m.estimate < 1.0) lp.push_back({lambda * f, -std::log(m.estimate), 0.0});
  }
  if (lp.size() >= 4) {
    rep.details["lambda_slope"] = fit_loglog(lp).slope;
    rep.details["lambda_predicted"] = a / den;
  }

  rep.statistic = fit.slope;
  rep.threshold = predicted - opt.slope_tolerance;
  rep.pass = fit.slope >= rep.threshold && c1 > 0.0 && below;
  rep.details["predicted"] = predicted;
  rep.details["slope_stderr"] = fit.slope_stderr;
  rep.details["c1"] = c1;
  rep.details["alpha"] = a;
  rep.details["delta"] = delta;
  rep.details["lambda"] = lambda;
  return rep;
}

std::vector<std::vector<std::complex<double>>> spectral_samples(const BernsteinFunction& B, int d,
                                                                std::span<const Mode> modes,
                                                                std::span<const double> t_grid, std::size_t replicas,
                                                                const SpectralOptions& opt) {
  check_modes(modes, d);
  if (t_grid.empty()) throw ArgumentError("spectral_samples: empty time grid");
  if (!(opt.path_dt > 0.0)) throw DomainError("spectral_samples: path_dt must be positive");
  const auto ks = checkpoints(t_grid, opt.path_dt);
  const std::size_t n = ks.back(), nm = modes.size();
  const double H = opt.hurst;

  std::vector<std::vector<std::complex<double>>> out(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    Rng rng = make_stream(opt.seed, "spectral", r);
    std::vector<std::complex<double>> acc(nm), ph(nm), base(static_cast<std::size_t>(d));
    auto& res = out[r];
    res.assign(ks.size() * nm, {});
    std::size_t next = 0;
    auto visit = [&](std::size_t k, const std::vector<double>& x) {
      phasors(modes, x, base, ph);
      for (std::size_t m = 0; m < nm; ++m) acc[m] += ph[m];
      if (next < ks.size() && k == ks[next]) {
        for (std::size_t m = 0; m < nm; ++m) res[next * nm + m] = acc[m] / static_cast<double>(k);
        ++next;
      }
    };
    if (H == 0.5) {
      stream_sbm(B, d, opt.path_dt, n, rng, visit);
    } else {
      const auto path = simulate_sfbm_path(B, H, d, opt.path_dt * static_cast<double>(n), n, rng);
      std::vector<double> x(static_cast<std::size_t>(d));
      for (std::size_t k = 0; k < n; ++k) {
        std::copy(path[k].begin(), path[k].end(), x.begin());
        visit(k + 1, x);
      }
    }
  });
  return out;
}

double spectral_second_moment_closed_form(double b, double t) {
  const double bt = b * t;
  return 2.0 / bt * (1.0 + std::expm1(-bt) / bt);
}

double discrete_second_moment_exact(double b, double tau, std::size_t n) {
  const double q = std::exp(-b * tau);
  const double nd = static_cast<double>(n);
  double s = nd, qm = 1.0;
  for (std::size_t m = 1; m < n; ++m) {
    qm *= q;
    if (qm < 1e-300) break;
    s += 2.0 * (nd - static_cast<double>(m)) * qm;
  }
  return s / (nd * nd);
}

CheckReport verify_spectral_second_moment(const BernsteinFunction& B, int d, std::span<const Mode> modes,
                                          std::span<const double> t_grid, std::size_t replicas,
                                          const SpectralOptions& opt) {
  if (replicas < 2) throw ArgumentError("verify_spectral_second_moment: need at least 2 replicas");
  for (const auto& m : modes)
    if (norm2(m) == 0.0) throw ArgumentError("verify_spectral_second_moment: mode must be nonzero");
  if (opt.hurst != 0.5) throw DomainError("verify_spectral_second_moment: paths must have H = 1/2");
  const auto samples = spectral_samples(B, d, modes, t_grid, replicas, opt);
  const std::size_t nm = modes.size();

  CheckReport rep;
  rep.name = "spectral_second_moment";
  rep.threshold = 4.0;
  double worst = 0.0, worst_z = 0.0;
  for (std::size_t m = 0; m < nm; ++m) {
    const double b = B(2.0 * kPi2 * norm2(modes[m]));
    const std::string lab = "xi" + mode_label(modes[m]);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      RunningStats s;
      for (const auto& rs : samples) s.add(std::norm(rs[i * nm + m]));
      const double t = t_grid[i];
      const double ratio = s.mean() * t * b;
      const double cf = spectral_second_moment_closed_form(b, t);
      const double z = s.std_error() > 0 ? std::abs(s.mean() - cf) / s.std_error() : 0.0;
      worst = std::max({worst, ratio, 1.0 / ratio});
      worst_z = std::max(worst_z, z);
      const std::string key = lab + "_t" + num(t);
      rep.details["estimate_" + key] = s.mean();
      rep.details["stderr_" + key] = s.std_error();
      rep.details["ratio_" + key] = ratio;
      rep.details["closed_form_" + key] = cf;
      rep.details["z_" + key] = z;
    }
  }
  rep.statistic = worst;
  rep.details["max_z"] = worst_z;
  const bool closed_ok = B.kind() != BernsteinKind::Identity || worst_z <= 3.0;
  rep.pass = worst <= 4.0 && closed_ok;
  return rep;
}

CheckReport verify_spectral_second_moment(const BernsteinFunction& B, int d, const Mode& xi,
                                          std::span<const double> t_grid, std::size_t replicas,
                                          const SpectralOptions& opt) {
  return verify_spectral_second_moment(B, d, std::span<const Mode>(&xi, 1), t_grid, replicas, opt);
}

CheckReport verify_discrete_second_moment(const BernsteinFunction& B, double H, int d, const Mode& xi, double tau,
                                          double t, std::size_t replicas, const SpectralOptions& opt) {
  if (!(tau > 0.0 && tau <= t)) throw DomainError("verify_discrete_second_moment: need 0 < tau <= t");
  if (replicas < 2) throw ArgumentError("verify_discrete_second_moment: need at least 2 replicas");
  if (xi.size() != static_cast<std::size_t>(d) || norm2(xi) == 0.0)
    throw ArgumentError("verify_discrete_second_moment: mode must be a nonzero d-vector");
  const auto n = static_cast<std::size_t>(std::floor(t / tau + 1e-9));
  SpectralOptions o = opt;
  o.hurst = H;
  o.path_dt = tau;
  const double tn = tau * static_cast<double>(n);
  const std::vector<double> grid{tn};
  const auto samples = spectral_samples(B, d, std::span<const Mode>(&xi, 1), grid, replicas, o);
  RunningStats s;
  for (const auto& rs : samples) s.add(std::norm(rs[0]));

  const double xn2 = norm2(xi);
  double bound;
  CheckReport rep;
  rep.name = "discrete_second_moment";
  if (H == 0.5) {
    const double b = B(2.0 * kPi2 * xn2);
    bound = (1.0 / t) * (1.0 / b + tau);
    const double exact = discrete_second_moment_exact(b, tau, n);
    rep.details["exact"] = exact;
    rep.details["z_exact"] = s.std_error() > 0 ? std::abs(s.mean() - exact) / s.std_error() : 0.0;
  } else {
    bound = (1.0 / t) * (std::pow(std::sqrt(xn2), -B.growth_index() / H) + tau);
  }
  rep.statistic = s.mean();
  rep.threshold = opt.c_screen * bound;
  rep.pass = rep.statistic <= rep.threshold;
  rep.details["stderr"] = s.std_error();
  rep.details["bound"] = bound;
  rep.details["c_screen"] = opt.c_screen;
  rep.details["n"] = static_cast<double>(n);
  return rep;
}

double mixed_moment_bound(const BernsteinFunction& B, double H, std::span<const Mode> xi_list, double t) {
  const std::size_t p = xi_list.size();
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t d = xi_list.front().size();
  double total = 0.0;
  do {
    double prod = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      Mode tail(d, 0);
      for (std::size_t i = j; i < p; ++i)
        for (std::size_t c = 0; c < d; ++c) tail[c] += xi_list[perm[i]][c];
      const double r2 = norm2(tail);
      double f;
      if (r2 == 0.0)
        f = t;
      else if (H == 0.5)
        f = std::min(1.0 / B(2.0 * kPi2 * r2), t);
      else
        f = std::min(std::pow(std::sqrt(r2), -B.growth_index() / H), t);
      prod *= f;
    }
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total / std::pow(t, static_cast<double>(p));
}

CheckReport verify_mixed_moment(const BernsteinFunction& B, int d, std::span<const Mode> xi_list, double t,
                                std::size_t replicas, const SpectralOptions& opt) {
  const std::size_t p = xi_list.size();
  if (p != 2 && p != 4) throw ArgumentError("verify_mixed_moment: p must be 2 or 4");
  check_modes(xi_list, d);
  for (int c = 0; c < d; ++c) {
    long s = 0;
    for (const auto& m : xi_list) s += m[static_cast<std::size_t>(c)];
    if (s != 0) throw ArgumentError("verify_mixed_moment: modes must sum to zero");
  }
  if (replicas < 2) throw ArgumentError("verify_mixed_moment: need at least 2 replicas");
  const std::vector<double> grid{t};
  const auto samples = spectral_samples(B, d, xi_list, grid, replicas, opt);
  RunningStats re, im;
  for (const auto& rs : samples) {
    std::complex<double> prod{1.0, 0.0};
    for (std::size_t j = 0; j < p; ++j) {
      const auto w = rs[j];
      prod = {prod.real() * w.real() - prod.imag() * w.imag(), prod.real() * w.imag() + prod.imag() * w.real()};
    }
    re.add(prod.real());
    im.add(prod.imag());
  }
  CheckReport rep;
  rep.name = "mixed_moment";
  const double bound = mixed_moment_bound(B, opt.hurst, xi_list, t);
  rep.statistic = std::hypot(re.mean(), im.mean());
  rep.threshold = opt.c_screen * bound;
  rep.pass = rep.statistic <= rep.threshold;
  rep.details["real"] = re.mean();
  rep.details["imag"] = im.mean();
  rep.details["stderr_real"] = re.std_error();
  rep.details["stderr_imag"] = im.std_error();
  rep.details["bound"] = bound;
  rep.details["p"] = static_cast<double>(p);
  return rep;
}

CheckReport npoint_lower_check(int d, std::span<const int> N_list, double p, double tolerance) {
  if (d != 1 && d != 2) throw ArgumentError("npoint_lower_check: d must be 1 or 2");
  if (N_list.size() < 2) throw ArgumentError("npoint_lower_check: need at least two sizes");
  if (!(p >= 1.0)) throw DomainError("npoint_lower_check: p must be >= 1");
  CheckReport rep;
  rep.name = "npoint_lower";
  std::vector<FitPoint> pts;
  for (int N : N_list) {
    if (N < 1) throw ArgumentError("npoint_lower_check: sizes must be positive");
    double v;
    if (d == 1) {
      std::vector<double> atoms(static_cast<std::size_t>(N));
      for (int k = 0; k < N; ++k) atoms[static_cast<std::size_t>(k)] = (k + 0.5) / N - 0.5;
      v = circle_wp_exact(atoms, p).value;
    } else {
      const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
      if (k * k != N) throw ArgumentError("npoint_lower_check: d=2 sizes must be perfect squares");
      v = grid_wp(uniform_grid(2, k), p, 16).value;
    }
    rep.details["value_N" + std::to_string(N)] = v;
    pts.push_back({static_cast<double>(N), v, 0.0});
  }
  const auto fit = fit_loglog(pts);
  rep.statistic = fit.slope;
  rep.threshold = -1.0 / d;
  rep.pass = std::abs(fit.slope - rep.threshold) <= tolerance;
  rep.details["tolerance"] = tolerance;
  rep.details["slope_stderr"] = fit.slope_stderr;
  return rep;
}

double convexity_g(double x, double delta, double alpha) {
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("convexity_g: x must lie in (0,1]");
  const double L = -std::log(x);
  // (1+L)^{1/delta} - L^{1/delta} without cancellation
  const double D = L == 0.0 ? 1.0 : std::pow(L, 1.0 / delta) * std::expm1(std::log1p(1.0 / L) / delta);
  return std::exp(std::log(x) + (delta - alpha) * std::log(D));
}

CheckReport convexity_check(double delta, double alpha, int grid_n) {
  if (!(delta > 1.0)) throw DomainError("convexity_check: delta must exceed 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("convexity_check: alpha must lie in (0,1)");
  if (grid_n < 1000) throw ArgumentError("convexity_check: grid_n must be at least 1000");
  std::vector<double> x(static_cast<std::size_t>(grid_n)), g(x.size());
  const double l0 = std::log(1e-6);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = i + 1 == x.size() ? 1.0 : std::exp(l0 * (1.0 - static_cast<double>(i) / (grid_n - 1)));
    g[i] = convexity_g(x[i], delta, alpha);
  }
  std::vector<double> slope(x.size() - 1);
  double min_first = std::numeric_limits<double>::infinity(), scale = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    min_first = std::min(min_first, g[i + 1] - g[i]);
    slope[i] = (g[i + 1] - g[i]) / (x[i + 1] - x[i]);
    scale = std::max(scale, std::abs(slope[i]));
  }
  double min_second = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < slope.size(); ++i) min_second = std::min(min_second, (slope[i + 1] - slope[i]) / scale);
  CheckReport rep;
  rep.name = "convexity";
  rep.statistic = min_second;
  rep.threshold = -1e-9;
  rep.pass = min_first > 0.0 && min_second >= rep.threshold;
  rep.details["min_first_difference"] = min_first;
  rep.details["g_at_1"] = g.back();
  rep.details["slope_scale"] = scale;
  return rep;
}

}  // namespace tor
