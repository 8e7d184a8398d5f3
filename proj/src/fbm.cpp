#include "tor/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "fft.hpp"
#include "tor/errors.hpp"

namespace tor {

namespace {

void check_hurst(double H) {
  if (!(H > 0.0 && H < 1.0)) throw DomainError("Hurst index must lie in (0,1)");
}

std::uint64_t hash_times(double H, std::span<const double> times) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    h = mix64(h ^ bits);
  };
  feed(H);
  for (double t : times) feed(t);
  return h;
}

struct CacheEntry {
  double H;
  std::vector<double> times;
  std::shared_ptr<const Eigen::MatrixXd> factor;
};

class FactorCache {
 public:
  std::shared_ptr<const Eigen::MatrixXd> find(std::uint64_t key, double H, std::span<const double> times) {
    std::shared_lock lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    const auto& e = it->second;
    if (e.H != H || !std::equal(e.times.begin(), e.times.end(), times.begin(), times.end())) return nullptr;
    return e.factor;
  }

  void insert(std::uint64_t key, double H, std::span<const double> times,
              std::shared_ptr<const Eigen::MatrixXd> f) {
    const std::size_t bytes = times.size() * times.size() * sizeof(double);
    if (times.size() > kMaxCachedPoints) return;
    std::unique_lock lock(mu_);
    if (map_.count(key)) return;
    while (!order_.empty() && bytes_ + bytes > kMaxBytes) {
      auto it = map_.find(order_.front());
      if (it != map_.end()) {
        bytes_ -= it->second.times.size() * it->second.times.size() * sizeof(double);
        map_.erase(it);
      }
      order_.pop_front();
    }
    map_.emplace(key, CacheEntry{H, {times.begin(), times.end()}, std::move(f)});
    order_.push_back(key);
    bytes_ += bytes;
  }

  void clear() {
    std::unique_lock lock(mu_);
    map_.clear();
    order_.clear();
    bytes_ = 0;
  }

 private:
  static constexpr std::size_t kMaxCachedPoints = 1024;
  static constexpr std::size_t kMaxBytes = std::size_t{256} << 20;
  std::shared_mutex mu_;
  std::map<std::uint64_t, CacheEntry> map_;
  std::deque<std::uint64_t> order_;
  std::size_t bytes_ = 0;
};

FactorCache& cache() {
  static FactorCache c;
  return c;
}

std::shared_ptr<const Eigen::MatrixXd> factorize(double H, std::span<const double> times) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd gram(n, n);
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = fbm_covariance(H, times[i], times[j]);
      gram(i, j) = c;
      gram(j, i) = c;
      if (i == j) max_diag = std::max(max_diag, c);
    }
  for (double jitter : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
    Eigen::MatrixXd g = gram;
    g.diagonal().array() += jitter * max_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() == Eigen::Success) return std::make_shared<const Eigen::MatrixXd>(llt.matrixL());
  }
  double min_gap = times.empty() ? 0.0 : times[0];
  for (std::size_t i = 1; i < times.size(); ++i) min_gap = std::min(min_gap, times[i] - times[i - 1]);
  std::ostringstream os;
  os << "fBM Gram matrix not positive definite after jitter 1e-8 (n=" << n << ", H=" << H
     << ", min gap=" << min_gap << ", max variance=" << max_diag << ")";
  throw NumericalError(os.str());
}

}  // namespace

double fbm_covariance(double H, double s, double t) {
  check_hurst(H);
  if (!(s >= 0.0 && t >= 0.0)) throw DomainError("fbm covariance requires nonnegative times");
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

std::shared_ptr<const Eigen::MatrixXd> fbm_gram_factor(double H, std::span<const double> times) {
  check_hurst(H);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw ArgumentError("fbm_gram_factor: times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) throw ArgumentError("fbm_gram_factor: times must increase");
  }
  const auto key = hash_times(H, times);
  if (auto f = cache().find(key, H, times)) return f;
  auto f = factorize(H, times);
  cache().insert(key, H, times, f);
  return f;
}

void clear_fbm_cache() { cache().clear(); }

FractionalPath sample_at_times(double H, std::span<const double> times, int d, Rng& rng, std::size_t n_max) {
  check_hurst(H);
  if (d < 1) throw ArgumentError("sample_at_times: dimension must be >= 1");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw ArgumentError("sample_at_times: times must be nonnegative");
    if (i > 0 && times[i] < times[i - 1]) throw ArgumentError("sample_at_times: times must be sorted");
  }
  const std::size_t dd = static_cast<std::size_t>(d);
  FractionalPath path{H, d, {times.begin(), times.end()}, std::vector<double>(times.size() * dd, 0.0)};

  // slot[i] = index into the merged positive times, or -1 for time zero
  std::vector<double> uniq;
  std::vector<long> slot(times.size(), -1);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t <= kTimeMergeTolerance) continue;
    if (uniq.empty() || t - uniq.back() > kTimeMergeTolerance) uniq.push_back(t);
    slot[i] = static_cast<long>(uniq.size()) - 1;
  }
  if (uniq.size() > n_max)
    throw ArgumentError("sample_at_times: " + std::to_string(uniq.size()) + " distinct times exceed n_max");
  if (uniq.empty()) return path;

  const auto n = static_cast<Eigen::Index>(uniq.size());
  Eigen::MatrixXd z(n, d);
  if (H == 0.5) {
    // independent increments; no factorization needed
    for (int c = 0; c < d; ++c) {
      double x = 0.0, prev = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        x += std::sqrt(uniq[i] - prev) * rng.normal();
        prev = uniq[i];
        z(i, c) = x;
      }
    }
  } else {
    const auto L = fbm_gram_factor(H, uniq);
    for (int c = 0; c < d; ++c)
      for (Eigen::Index i = 0; i < n; ++i) z(i, c) = rng.normal();
    z = L->triangularView<Eigen::Lower>() * z;
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (slot[i] < 0) continue;
    for (std::size_t c = 0; c < dd; ++c) path.values[i * dd + c] = z(slot[i], static_cast<Eigen::Index>(c));
  }
  return path;
}

namespace {

// Circulant eigenvalues for unit-step fractional Gaussian noise embedded in
// size m. Empty when the embedding is not nonnegative.
std::vector<double> circulant_eigenvalues(double H, std::size_t m) {
  auto gamma = [H](double k) {
    const double h2 = 2.0 * H;
    return 0.5 * (std::pow(std::abs(k + 1), h2) - 2.0 * std::pow(std::abs(k), h2) + std::pow(std::abs(k - 1), h2));
  };
  fftw_complex* buf = fftw_alloc_complex(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lag = static_cast<double>(k <= m / 2 ? k : m - k);
    buf[k][0] = gamma(lag);
    buf[k][1] = 0.0;
  }
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::vector<double> lam(m);
  double top = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    lam[k] = buf[k][0];
    top = std::max(top, std::abs(lam[k]));
  }
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  for (double& l : lam) {
    if (l < -1e-10 * top) return {};
    l = std::max(l, 0.0);
  }
  return lam;
}

}  // namespace

FractionalPath sample_uniform_grid(double H, std::size_t n, double T, int d, Rng& rng) {
  check_hurst(H);
  if (n == 0 || (n & (n - 1)) != 0 || n > (std::size_t{1} << 20))
    throw ArgumentError("sample_uniform_grid: n must be a power of two <= 2^20");
  if (!(T > 0.0)) throw DomainError("sample_uniform_grid: horizon must be positive");
  if (d < 1) throw ArgumentError("sample_uniform_grid: dimension must be >= 1");

  std::vector<double> times(n + 1);
  for (std::size_t k = 0; k <= n; ++k) times[k] = T * static_cast<double>(k) / static_cast<double>(n);

  std::vector<double> lam;
  std::size_t m = 2 * n;
  for (int doubling = 0; doubling <= 4 && lam.empty(); ++doubling, m *= 2) lam = circulant_eigenvalues(H, m);
  if (lam.empty()) {
    m /= 2;
    if (n + 1 > kFbmMaxPoints)
      throw NumericalError("circulant embedding failed and n exceeds the dense sampler limit");
    return sample_at_times(H, times, d, rng);
  }
  m /= 2;

  const std::size_t dd = static_cast<std::size_t>(d);
  FractionalPath path{H, d, times, std::vector<double>((n + 1) * dd, 0.0)};
  const double scale = std::pow(T / static_cast<double>(n), H);

  fftw_complex* buf = fftw_alloc_complex(m);
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  const double md = static_cast<double>(m);
  for (std::size_t c = 0; c < dd; c += 2) {
    for (std::size_t k = 0; k < m; ++k) {
      const double s = std::sqrt(lam[k] / md);
      buf[k][0] = s * rng.normal();
      buf[k][1] = s * rng.normal();
    }
    fftw_execute(plan);
    for (std::size_t part = 0; part < 2 && c + part < dd; ++part) {
      double x = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        x += scale * buf[k][part];
        path.values[(k + 1) * dd + c + part] = x;
      }
    }
  }
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return path;
}

}  // namespace tor
