#include "tor/stats.hpp"

#include <vector>

#include "tor/errors.hpp"

namespace tor {

namespace {

LogLogFit weighted_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  const std::size_t n = x.size();
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw ArgumentError("fit: abscissae are all equal");
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    // weights normalized to mean one so the residual scale is comparable
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += w[i] * r * r;
    }
    const double wn = sw / static_cast<double>(n);
    f.slope_stderr = std::sqrt(rss / wn / static_cast<double>(n - 2) / (sxx / wn));
  }
  return f;
}

}  // namespace

LogLogFit fit_loglog(std::span<const FitPoint> points) {
  if (points.size() < 2) throw ArgumentError("fit_loglog: need at least two points");
  std::vector<double> lx, ly, w;
  bool equal = false;
  for (const auto& p : points) {
    if (!(p.y > 0)) throw DomainError("fit_loglog: y must be positive");
    if (!(p.x > 0)) throw DomainError("fit_loglog: x must be positive");
    if (!(p.sigma > 0)) equal = true;
  }
  for (const auto& p : points) {
    lx.push_back(std::log(p.x));
    ly.push_back(std::log(p.y));
    const double rel = p.sigma / p.y;
    w.push_back(equal ? 1.0 : 1.0 / (rel * rel));
  }
  return weighted_line(lx, ly, w);
}

LogLogFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("fit_linear: need matching series");
  std::vector<double> w(x.size(), 1.0);
  return weighted_line(x, y, w);
}

}  // namespace tor
