#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the solvers it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "fairtask/matrix.hpp"
#include "fairtask/rng.hpp"

namespace oracle {

using fairtask::Matrix;

/// Calls fn(agent_of_task) for every permutation of n.
template <typename Fn>
void for_each_permutation(std::size_t n, Fn&& fn) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    fn(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

inline double brute_max_sum(const Matrix<double>& s) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_permutation(s.rows(), [&](const std::vector<std::size_t>& p) {
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) total += s(j, p[j]);
    best = std::max(best, total);
  });
  return best;
}

/// max over permutations of sum_j w_j log(u(j, p(j))).
inline double brute_max_eg(const Matrix<double>& u, const std::vector<double>& w) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_permutation(u.rows(), [&](const std::vector<std::size_t>& p) {
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) total += w[j] * std::log(u(j, p[j]));
    best = std::max(best, total);
  });
  return best;
}

inline double brute_min_bottleneck(const Matrix<double>& c) {
  double best = std::numeric_limits<double>::infinity();
  for_each_permutation(c.rows(), [&](const std::vector<std::size_t>& p) {
    double worst = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) worst = std::max(worst, c(j, p[j]));
    best = std::min(best, worst);
  });
  return best;
}

/// Random utility instance with entries alpha^d * pref, d in [0, 4], pref in [0.2, 1].
inline Matrix<double> random_utilities(fairtask::Rng& rng, std::size_t n, double alpha = 0.97) {
  Matrix<double> u(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      u(j, i) = std::pow(alpha, rng.uniform(0.0, 4.0)) * rng.uniform(0.2, 1.0);
  return u;
}

inline std::vector<double> random_weights(fairtask::Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform(0.5, 2.0);
  return w;
}

/// Population mean and standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace oracle

#include <queue>
#include <tuple>

#include "fairtask/pathfind.hpp"

namespace oracle {

/// Plain Dijkstra over the grid's free cells, 8-connected without corner
/// cutting. Lengths carried as exact (straight, diagonal) move counts.
/// Returns +inf when unreachable.
inline double dijkstra_cells(const fairtask::NavGrid& g, fairtask::Cell from, fairtask::Cell to) {
  const std::size_t n = g.dims();
  auto id = [n](std::size_t x, std::size_t y) { return y * n + x; };
  auto free_at = [&](long x, long y) {
    return x >= 0 && y >= 0 && x < static_cast<long>(n) && y < static_cast<long>(n) &&
           g.free({static_cast<std::size_t>(x), static_cast<std::size_t>(y)});
  };
  struct Len {
    std::uint32_t s = 0, d = 0;
    double v() const { return s + d * std::numbers::sqrt2; }
  };
  std::vector<Len> dist(n * n);
  std::vector<char> seen(n * n, 0), done(n * n, 0);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  seen[id(from.x, from.y)] = 1;
  pq.emplace(0.0, id(from.x, from.y));
  while (!pq.empty()) {
    const auto [dv, cur] = pq.top();
    pq.pop();
    if (done[cur]) continue;
    done[cur] = 1;
    const long cx = static_cast<long>(cur % n), cy = static_cast<long>(cur / n);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const long nx = cx + dx, ny = cy + dy;
        if (!free_at(nx, ny)) continue;
        const bool diag = dx != 0 && dy != 0;
        if (diag && (!free_at(nx, cy) || !free_at(cx, ny))) continue;
        const std::size_t k = id(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny));
        Len cand = dist[cur];
        if (diag) ++cand.d; else ++cand.s;
        if (!seen[k] || cand.v() < dist[k].v()) {
          seen[k] = 1;
          dist[k] = cand;
          pq.emplace(cand.v(), k);
        }
      }
    }
  }
  const std::size_t t = id(to.x, to.y);
  if (!done[t]) return std::numeric_limits<double>::infinity();
  return dist[t].v();
}

/// Shortest distance under the same snapping convention as the library,
/// with the grid part computed by dijkstra_cells.
inline double dijkstra_distance(const fairtask::NavGrid& g, fairtask::Vec2 a, fairtask::Vec2 b) {
  const auto ca = g.cell_of(a), cb = g.cell_of(b);
  if (ca == cb) return fairtask::distance(a, b);
  const double cells = dijkstra_cells(g, ca, cb);
  if (std::isinf(cells)) return cells;
  return fairtask::distance(a, g.center(ca)) + cells * g.resolution() +
         fairtask::distance(g.center(cb), b);
}

}  // namespace oracle
