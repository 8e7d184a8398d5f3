#include "tor/torus.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "fft.hpp"
#include "tor/errors.hpp"

namespace tor {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
}  // namespace

double wrap(double x) {
  double r = x - std::floor(x + 0.5);
  if (r < -0.5) r += 1.0;
  if (r >= 0.5) r -= 1.0;
  return r;
}

TorusPoint project(std::span<const double> x) {
  TorusPoint p(x.size());
  std::transform(x.begin(), x.end(), p.begin(), wrap);
  return p;
}

double torus_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("torus_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double a = std::abs(wrap(x[c] - y[c]));
    s += a * a;
  }
  return std::sqrt(s);
}

PointCloud::PointCloud(int dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
  if (dim < 1) throw ArgumentError("PointCloud: dimension must be >= 1");
  if (data_.size() % static_cast<std::size_t>(dim) != 0) throw ArgumentError("PointCloud: ragged data");
}

void PointCloud::push_back(std::span<const double> x) {
  if (x.size() != udim()) throw ArgumentError("PointCloud: dimension mismatch");
  data_.insert(data_.end(), x.begin(), x.end());
}

PointCloud project(const PointCloud& cloud) {
  PointCloud out(cloud.dim(), cloud.data());
  for (double& v : out.data()) v = wrap(v);
  return out;
}

SpectralMeasure::SpectralMeasure(int dim, int cutoff, std::vector<std::complex<double>> coeffs)
    : dim_(dim), cutoff_(cutoff), coeffs_(std::move(coeffs)) {
  if (dim < 1 || cutoff < 0) throw ArgumentError("SpectralMeasure: invalid shape");
  std::size_t expect = 1;
  for (int c = 0; c < dim; ++c) expect *= side();
  if (coeffs_.size() != expect) throw ArgumentError("SpectralMeasure: coefficient count does not match (2K+1)^d");
}

std::size_t SpectralMeasure::index(std::span<const int> xi) const {
  if (xi.size() != static_cast<std::size_t>(dim_)) throw ArgumentError("SpectralMeasure: mode dimension mismatch");
  std::size_t idx = 0;
  for (int k : xi) {
    if (std::abs(k) > cutoff_) throw ArgumentError("SpectralMeasure: mode outside the stored box");
    idx = idx * side() + static_cast<std::size_t>(k + cutoff_);
  }
  return idx;
}

void SpectralMeasure::mode(std::size_t index, std::span<int> xi) const {
  for (int c = dim_ - 1; c >= 0; --c) {
    xi[static_cast<std::size_t>(c)] = static_cast<int>(index % side()) - cutoff_;
    index /= side();
  }
}

double SpectralMeasure::norm2(std::size_t index) const {
  double s = 0.0;
  for (int c = 0; c < dim_; ++c) {
    const double k = static_cast<double>(static_cast<int>(index % side()) - cutoff_);
    s += k * k;
    index /= side();
  }
  return s;
}

void SpectralMeasure::set_samples(PointCloud samples, std::vector<double> weights) {
  samples_ = std::move(samples);
  weights_ = std::move(weights);
}

SpectralMeasure empirical_fourier(const PointCloud& samples, std::span<const double> weights, int K) {
  if (K < 1) throw ArgumentError("empirical_fourier: K must be >= 1");
  const std::size_t n = samples.size();
  if (n == 0) throw ArgumentError("empirical_fourier: no samples");
  if (weights.size() != n) throw ArgumentError("empirical_fourier: one weight per sample required");
  double wsum = 0.0, comp = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ArgumentError("empirical_fourier: weights must be nonnegative");
    const double t = wsum + w;
    comp += std::abs(wsum) >= std::abs(w) ? (wsum - t) + w : (w - t) + wsum;
    wsum = t;
  }
  wsum += comp;
  if (std::abs(wsum - 1.0) > 1e-12) throw ArgumentError("empirical_fourier: weights must sum to 1");

  const int d = samples.dim();
  const std::size_t side = static_cast<std::size_t>(2 * K + 1);
  std::size_t total = 1;
  for (int c = 0; c < d; ++c) total *= side;

  // table[(j*d + c)*side + k+K] = exp(-2 pi i k x_jc)
  std::vector<std::complex<double>> table(n * static_cast<std::size_t>(d) * side);
  for (std::size_t j = 0; j < n; ++j)
    for (int c = 0; c < d; ++c) {
      const double x = samples[j][static_cast<std::size_t>(c)];
      auto* row = &table[(j * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)) * side];
      for (int k = -K; k <= K; ++k) {
        const double th = kTwoPi * static_cast<double>(k) * x;
        row[k + K] = {std::cos(th), -std::sin(th)};
      }
    }

  std::vector<std::complex<double>> coeffs(total, {0.0, 0.0});
  const std::size_t inner = total / side;
  const long outer = static_cast<long>(side);
#pragma omp parallel for schedule(static)
  for (long k0 = 0; k0 < outer; ++k0) {
    std::vector<std::complex<double>> partial(static_cast<std::size_t>(d));
    std::complex<double>* out = &coeffs[static_cast<std::size_t>(k0) * inner];
    for (std::size_t j = 0; j < n; ++j) {
      const auto* base = &table[j * static_cast<std::size_t>(d) * side];
      const std::complex<double> lead = weights[j] * base[static_cast<std::size_t>(k0)];
      for (std::size_t r = 0; r < inner; ++r) {
        std::complex<double> v = lead;
        std::size_t rem = r;
        for (int c = d - 1; c >= 1; --c) {
          v *= base[static_cast<std::size_t>(c) * side + rem % side];
          rem /= side;
        }
        out[r] += v;
      }
    }
  }
  coeffs[(total - 1) / 2] = {1.0, 0.0};  // zero mode: the validated total mass
  SpectralMeasure m(d, K, std::move(coeffs));
  m.set_samples(samples, {weights.begin(), weights.end()});
  return m;
}

SpectralMeasure empirical_fourier(const PointCloud& samples, int K) {
  std::vector<double> w(samples.size(), samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size()));
  return empirical_fourier(samples, w, K);
}

double heat_multiplier(double eps, double xi_norm2) { return std::exp(-2.0 * kPi2 * eps * xi_norm2); }

SpectralMeasure heat_smooth(const SpectralMeasure& m, double eps) {
  if (!(eps > 0.0)) throw DomainError("heat_smooth: eps must be positive");
  SpectralMeasure out = m;
  auto& c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= heat_multiplier(eps, m.norm2(i));
  return out;
}

int heat_cutoff(double eps, double tol) {
  if (!(eps > 0.0)) throw DomainError("heat_cutoff: eps must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("heat_cutoff: tol must lie in (0,1)");
  int K = static_cast<int>(std::floor(std::sqrt(-std::log(tol) / (2.0 * kPi2 * eps))));
  while (heat_multiplier(eps, static_cast<double>(K) * K) >= tol) ++K;
  while (K > 1 && heat_multiplier(eps, static_cast<double>(K - 1) * (K - 1)) < tol) --K;
  return std::max(K, 1);
}

namespace {

double wrapped_gaussian_1d(double x, double t) {
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * t);
  double s = std::exp(-x * x / (2.0 * t));
  for (int k = 1;; ++k) {
    const double a = x - k, b = x + k;
    const double term = std::exp(-a * a / (2.0 * t)) + std::exp(-b * b / (2.0 * t));
    s += term;
    // remaining terms are dominated by a geometric tail of the last one
    if (term * norm < 1e-16 && k > 1) break;
  }
  return norm * s;
}

}  // namespace

double heat_kernel(std::span<const double> x, double t) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  double q = 1.0;
  for (double xc : x) q *= wrapped_gaussian_1d(wrap(xc), t);
  return q;
}

int phi_cutoff(double eps) {
  if (!(eps > 0.0)) throw DomainError("phi_cutoff: eps must be positive");
  int K = 1;
  while (std::exp(-eps * static_cast<double>(K) * K) / (K + 1) >= 1e-14) K = K < 64 ? K + 1 : K + K / 16;
  while (K > 1 && std::exp(-eps * static_cast<double>(K - 1) * (K - 1)) / K < 1e-14) --K;
  return K;
}

double phi_norm(double eps, double p, int d, int K) {
  if (!(eps > 0.0)) throw DomainError("phi_norm: eps must be positive");
  if (!(p >= 1.0)) throw DomainError("phi_norm: p must be >= 1");
  if (d < 1) throw ArgumentError("phi_norm: d must be >= 1");
  if (!(std::exp(-eps * static_cast<double>(K) * K) / (K + 1) < 1e-14))
    throw PrecisionError("phi_norm: cutoff K=" + std::to_string(K) + " too small, use K >= " +
                         std::to_string(phi_cutoff(eps)));

  // multiplicities of |xi|^2 over the box, truncated where terms are negligible
  const double kk = static_cast<double>(K) * K;
  const double tail = (17.0 * std::log(10.0) + d * std::log(2.0 * K + 1.0)) / (p * eps);
  const auto mcut = static_cast<std::size_t>(std::min(d * kk, std::ceil(tail)));
  std::vector<double> h(mcut + 1, 0.0), next(mcut + 1);
  h[0] = 1.0;
  for (int c = 0; c < d; ++c) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t m = 0; m <= mcut; ++m) {
      if (h[m] == 0.0) continue;
      for (std::size_t k = 0; k <= static_cast<std::size_t>(K); ++k) {
        const std::size_t mm = m + k * k;
        if (mm > mcut) break;
        next[mm] += h[m] * (k == 0 ? 1.0 : 2.0);
      }
    }
    h.swap(next);
  }
  double s = 0.0;
  for (std::size_t m = mcut + 1; m-- > 0;) {
    if (h[m] == 0.0) continue;
    const double md = static_cast<double>(m);
    s += h[m] * std::exp(p * (-eps * md - std::log1p(std::sqrt(md))));
  }
  return std::pow(s, 1.0 / p);
}

double phi_asymptotic(double eps, double p, int d) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("phi_asymptotic: eps must lie in (0,1)");
  const double dd = d;
  if (dd < p) return 1.0;
  if (dd == p) return std::pow(std::abs(std::log(eps)), 1.0 / p);
  return std::pow(eps, -(dd / p - 1.0) / 2.0);
}

std::vector<std::complex<double>> synthesize_on_grid(std::span<const std::complex<double>> box, int d, int K,
                                                     int grid_n) {
  if (grid_n < 2 * K + 1) throw ArgumentError("synthesize_on_grid: grid too coarse for the coefficient box");
  const std::size_t side = static_cast<std::size_t>(2 * K + 1);
  const std::size_t gn = static_cast<std::size_t>(grid_n);
  std::size_t total = 1, modes = 1;
  for (int c = 0; c < d; ++c) {
    total *= gn;
    modes *= side;
  }
  if (box.size() != modes) throw ArgumentError("synthesize_on_grid: coefficient count mismatch");

  fftw_complex* buf = fftw_alloc_complex(total);
  for (std::size_t i = 0; i < total; ++i) buf[i][0] = buf[i][1] = 0.0;
  for (std::size_t i = 0; i < modes; ++i) {
    std::size_t rem = i, pos = 0, stride = 1;
    for (int c = d - 1; c >= 0; --c) {
      const long k = static_cast<long>(rem % side) - K;
      rem /= side;
      pos += static_cast<std::size_t>((k + grid_n) % grid_n) * stride;
      stride *= gn;
    }
    buf[pos][0] = box[i].real();
    buf[pos][1] = box[i].imag();
  }
  std::vector<int> dims(static_cast<std::size_t>(d), grid_n);
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft(d, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::vector<std::complex<double>> out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = {buf[i][0], buf[i][1]};
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

nlohmann::json to_json(const SpectralMeasure& m) {
  std::vector<double> re, im;
  re.reserve(m.mode_count());
  im.reserve(m.mode_count());
  for (const auto& c : m.coeffs()) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  return {{"d", m.dim()}, {"K", m.cutoff()}, {"re", re}, {"im", im}};
}

SpectralMeasure spectral_from_json(const nlohmann::json& j) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "d" && it.key() != "K" && it.key() != "re" && it.key() != "im")
      throw ConfigError("unknown spectral measure key '" + it.key() + "'");
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != im.size()) throw ConfigError("spectral measure: re/im length mismatch");
  std::vector<std::complex<double>> c(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) c[i] = {re[i], im[i]};
  return SpectralMeasure(j.at("d").get<int>(), j.at("K").get<int>(), std::move(c));
}

}  // namespace tor
