#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

// Two-sample Kolmogorov-Smirnov statistic and the asymptotic critical value
// at level 0.01.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = a.size(), nb = b.size();
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

inline bool ks_pass_01(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = a.size(), nb = b.size();
  return ks_statistic(a, b) <= 1.628 * std::sqrt((na + nb) / (na * nb));
}

inline double circ(double x, double y) {
  double d = std::abs(x - y);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

// Minimum assignment cost by exhaustive permutation search.
template <class Cost>
double brute_force_assignment(std::size_t n, Cost cost) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += cost(i, perm[i]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// W_p^p between weighted circle atoms and an m-point uniform grid with mass
// 1/m per point, by the monotone (north-west corner) coupling of the
// quantile functions minimized over the cyclic shift of the grid. Exact for
// the discrete problem on the circle.
inline double circle_grid_cost(std::vector<double> atoms, std::vector<double> w, double p, std::size_t m) {
  std::vector<std::size_t> idx(atoms.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return atoms[x] < atoms[y]; });
  std::vector<double> a, wa;
  for (auto k : idx) {
    a.push_back(atoms[k]);
    wa.push_back(w[k]);
  }
  double best = INFINITY;
  for (std::size_t s = 0; s < m; ++s) {
    double cost = 0.0, left = wa[0];
    std::size_t ai = 0;
    for (std::size_t g = 0; g < m; ++g) {
      double need = 1.0 / m;
      const double gx = -0.5 + (static_cast<double>((g + s) % m) + 0.5) / m;
      while (need > 1e-15 && ai < a.size()) {
        const double take = std::min(need, left);
        cost += take * std::pow(circ(a[ai], gx), p);
        need -= take;
        left -= take;
        if (left <= 1e-15 && ai + 1 < a.size()) left = wa[++ai];
        else if (left <= 1e-15) break;
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace oracle
