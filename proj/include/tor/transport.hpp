#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "tor/errors.hpp"

namespace tor {

struct TransportPlan {
  double cost = 0.0;
  std::vector<int> owner;  // owner[col] = row serving that unit column
};

/// Exact transport from rows with integer supplies to unit-demand columns by
/// successive shortest augmenting paths (dense Dijkstra with potentials).
/// `cost(i, j)` is evaluated on demand; the sum of supplies must equal `cols`.
template <class CostFn>
TransportPlan solve_transport(CostFn&& cost, std::size_t rows, std::size_t cols, std::span<const int> supply) {
  if (supply.size() != rows) throw ArgumentError("solve_transport: one supply per row");
  long total = 0;
  for (int s : supply) {
    if (s < 0) throw ArgumentError("solve_transport: negative supply");
    total += s;
  }
  if (static_cast<std::size_t>(total) != cols) throw ArgumentError("solve_transport: supplies must sum to cols");
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(rows, 0.0), v(cols, inf);
  std::vector<int> owner(cols, -1), left(supply.begin(), supply.end());

  // column reduction, then greedy zero-reduced-cost assignment
  std::vector<int> best(cols, 0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double c = cost(i, j);
      if (c < v[j]) {
        v[j] = c;
        best[j] = static_cast<int>(i);
      }
    }
  for (std::size_t j = 0; j < cols; ++j)
    if (left[static_cast<std::size_t>(best[j])] > 0) {
      owner[j] = best[j];
      --left[static_cast<std::size_t>(best[j])];
    }

  std::vector<double> dist(cols), row_dist(rows);
  std::vector<int> pred(cols), reach(rows);
  std::vector<char> done(cols), scanned(rows);
  std::vector<std::size_t> settled, rows_seen;
  settled.reserve(cols);
  const bool use_heap = cols >= 4 * rows;
  std::vector<std::pair<double, std::size_t>> heap;
  if (use_heap) heap.reserve(cols);
  // min-heap with index tie-break
  const auto later = [](const std::pair<double, std::size_t>& x, const std::pair<double, std::size_t>& y) {
    return x.first > y.first || (x.first == y.first && x.second > y.second);
  };

  for (std::size_t src = 0; src < rows; ++src) {
    while (left[src] > 0) {
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(done.begin(), done.end(), 0);
      std::fill(scanned.begin(), scanned.end(), 0);
      settled.clear();
      rows_seen.clear();

      // labels only change on a row scan; with many columns per row a heap rebuilt
      // there beats a linear minimum per settled column
      auto scan = [&](std::size_t r, double dr, int via) {
        scanned[r] = 1;
        row_dist[r] = dr;
        reach[r] = via;
        rows_seen.push_back(r);
        heap.clear();
        for (std::size_t k = 0; k < cols; ++k) {
          if (done[k]) continue;
          const double nd = dr + cost(r, k) - u[r] - v[k];
          if (nd < dist[k]) {
            dist[k] = nd;
            pred[k] = static_cast<int>(r);
          }
          if (use_heap) heap.push_back({dist[k], k});
        }
        if (use_heap) std::make_heap(heap.begin(), heap.end(), later);
      };
      scan(src, 0.0, -1);

      std::size_t end = cols;
      double delta = 0.0;
      for (;;) {
        std::size_t j = cols;
        double dj = inf;
        if (use_heap) {
          if (!heap.empty()) {
            std::pop_heap(heap.begin(), heap.end(), later);
            std::tie(dj, j) = heap.back();
            heap.pop_back();
          }
        } else {
          for (std::size_t k = 0; k < cols; ++k)
            if (!done[k] && dist[k] < dj) {
              dj = dist[k];
              j = k;
            }
        }
        if (j == cols || !(dj < inf)) throw NumericalError("solve_transport: no augmenting path");
        done[j] = 1;
        settled.push_back(j);
        if (owner[j] < 0) {
          end = j;
          delta = dj;
          break;
        }
        const auto r = static_cast<std::size_t>(owner[j]);
        if (!scanned[r]) scan(r, dj, static_cast<int>(j));
      }

      for (std::size_t k : settled) v[k] -= delta - dist[k];
      for (std::size_t r : rows_seen) u[r] += delta - row_dist[r];

      std::size_t j = end;
      for (;;) {
        const int r = pred[j];
        const int prev = reach[static_cast<std::size_t>(r)];
        owner[j] = r;
        if (prev < 0) break;
        j = static_cast<std::size_t>(prev);
      }
      --left[src];
    }
  }

  TransportPlan plan;
  plan.owner = std::move(owner);
  for (std::size_t j = 0; j < cols; ++j) plan.cost += cost(static_cast<std::size_t>(plan.owner[j]), j);
  return plan;
}

/// Square assignment on a dense row-major cost matrix.
inline TransportPlan solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw ArgumentError("solve_assignment: cost matrix must be n x n");
  std::vector<int> ones(n, 1);
  return solve_transport([&](std::size_t i, std::size_t j) { return cost[i * n + j]; }, n, n, ones);
}

}  // namespace tor
