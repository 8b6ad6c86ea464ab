#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "fairtask/geometry.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

inline constexpr double kDefaultGridResolution = 0.05;

struct Cell {
  std::size_t x = 0;
  std::size_t y = 0;
  friend constexpr bool operator==(Cell, Cell) noexcept = default;
};

/// Occupancy grid over the workspace. A cell is blocked when its closed
/// square touches an obstacle disc or a wall, so every free cell center keeps
/// at least resolution/2 clearance from all geometry. The geometry itself is
/// kept for exact line-of-sight tests.
class NavGrid {
 public:
  NavGrid() = default;

  NavGrid(double resolution, Vec2 origin, std::size_t dims, std::vector<std::uint8_t> blocked,
          std::vector<Segment> walls, std::vector<Disc> obstacles, double extent)
      : resolution_(resolution),
        origin_(origin),
        dims_(dims),
        blocked_(std::move(blocked)),
        walls_(std::move(walls)),
        obstacles_(std::move(obstacles)),
        extent_(extent) {}

  double resolution() const noexcept { return resolution_; }
  Vec2 origin() const noexcept { return origin_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t cell_count() const noexcept { return dims_ * dims_; }

  std::size_t index(Cell c) const noexcept { return c.y * dims_ + c.x; }
  Cell cell_at(std::size_t idx) const noexcept { return {idx % dims_, idx / dims_}; }

  bool blocked(Cell c) const noexcept { return blocked_[index(c)] != 0; }
  bool free(Cell c) const noexcept { return !blocked(c); }

  Vec2 center(Cell c) const noexcept {
    return {origin_.x + (static_cast<double>(c.x) + 0.5) * resolution_,
            origin_.y + (static_cast<double>(c.y) + 0.5) * resolution_};
  }

  Cell cell_of(Vec2 p) const noexcept {
    auto axis = [&](double v, double o) {
      const double f = std::floor((v - o) / resolution_);
      if (f < 0.0) return std::size_t{0};
      return std::min(static_cast<std::size_t>(f), dims_ - 1);
    };
    return {axis(p.x, origin_.x), axis(p.y, origin_.y)};
  }

  std::size_t blocked_count() const noexcept {
    return static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), 1));
  }

  /// Straight segment keeps more than `margin` from every wall and obstacle
  /// and stays inside the workspace.
  bool line_of_sight(Vec2 a, Vec2 b, double margin) const noexcept {
    auto inside = [&](Vec2 p) {
      return p.x >= origin_.x && p.y >= origin_.y && p.x <= origin_.x + extent_ &&
             p.y <= origin_.y + extent_;
    };
    if (!inside(a) || !inside(b)) return false;
    const Segment s{a, b};
    for (const auto& w : walls_) {
      if (segment_segment_distance(s, w) <= margin) return false;
    }
    for (const auto& d : obstacles_) {
      if (point_segment_distance(d.center, s) <= d.radius + margin) return false;
    }
    return true;
  }

  /// Nearest free cell to p by ring search (p's own cell if free). With
  /// `in_sight`, only cells whose center is in direct line of sight count.
  std::optional<Cell> nearest_free(Vec2 p, bool in_sight = false) const {
    const Cell start = cell_of(p);
    if (free(start)) return start;
    std::optional<Cell> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t ring = 1; ring < dims_; ++ring) {
      const auto lo_x = start.x >= ring ? start.x - ring : 0;
      const auto lo_y = start.y >= ring ? start.y - ring : 0;
      const auto hi_x = std::min(dims_ - 1, start.x + ring);
      const auto hi_y = std::min(dims_ - 1, start.y + ring);
      for (std::size_t y = lo_y; y <= hi_y; ++y) {
        for (std::size_t x = lo_x; x <= hi_x; ++x) {
          const Cell c{x, y};
          if (blocked(c)) continue;
          const double d = distance(center(c), p);
          if (in_sight && d < best_d && !line_of_sight(p, center(c), 0.0)) continue;
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
      }
      if (best) return best;
    }
    return std::nullopt;
  }

  /// Connected-component label of every cell (blocked cells get `npos`).
  std::vector<std::size_t> components() const {
    constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> label(cell_count(), npos);
    std::size_t next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < cell_count(); ++s) {
      if (blocked_[s] || label[s] != npos) continue;
      label[s] = next;
      stack.push_back(s);
      while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        for_each_neighbor(cell_at(cur), [&](Cell nb, bool) {
          const std::size_t k = index(nb);
          if (label[k] == npos) {
            label[k] = next;
            stack.push_back(k);
          }
        });
      }
      ++next;
    }
    return label;
  }

  /// Visits free 8-neighbors of c. Diagonal moves require both adjacent
  /// orthogonal cells to be free.
  template <typename Fn>
  void for_each_neighbor(Cell c, Fn&& fn) const {
    static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const auto n = static_cast<long>(dims_);
    for (int k = 0; k < 8; ++k) {
      const long nx = static_cast<long>(c.x) + dx[k];
      const long ny = static_cast<long>(c.y) + dy[k];
      if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
      const Cell nb{static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)};
      if (blocked(nb)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && (blocked({nb.x, c.y}) || blocked({c.x, nb.y}))) continue;
      fn(nb, diagonal);
    }
  }

 private:
  double resolution_ = kDefaultGridResolution;
  Vec2 origin_;
  std::size_t dims_ = 0;
  std::vector<std::uint8_t> blocked_;
  std::vector<Segment> walls_;
  std::vector<Disc> obstacles_;
  double extent_ = 0.0;
};

// Cell edges land on round coordinates only up to rounding.
inline constexpr double kTouchTolerance = 1e-9;

inline NavGrid build_nav_grid(const Scenario& s, double resolution = kDefaultGridResolution) {
  if (!(resolution > 0.0) || resolution > s.min_sensing_radius()) {
    throw std::invalid_argument("build_nav_grid: resolution must be in (0, min sensing radius]");
  }
  const auto dims = static_cast<std::size_t>(std::ceil(s.workspace_size / resolution - 1e-9));
  std::vector<std::uint8_t> blocked(dims * dims, 0);
  const double half = resolution / 2.0;
  for (std::size_t y = 0; y < dims; ++y) {
    for (std::size_t x = 0; x < dims; ++x) {
      const Vec2 c{(static_cast<double>(x) + 0.5) * resolution,
                   (static_cast<double>(y) + 0.5) * resolution};
      bool hit = c.x >= s.workspace_size || c.y >= s.workspace_size;
      for (const auto& d : s.obstacles) {
        if (hit) break;
        // Distance from the disc center to the closed square.
        const double ex = std::max(std::abs(d.center.x - c.x) - half, 0.0);
        const double ey = std::max(std::abs(d.center.y - c.y) - half, 0.0);
        hit = std::hypot(ex, ey) <= d.radius + kTouchTolerance;
      }
      for (const auto& w : s.walls) {
        if (hit) break;
        hit = square_segment_distance(c, half, w) <= kTouchTolerance;
      }
      blocked[y * dims + x] = hit ? 1 : 0;
    }
  }
  NavGrid grid(resolution, {0.0, 0.0}, dims, std::move(blocked), s.walls, s.obstacles,
               s.workspace_size);
  for (const auto& a : s.agents) {
    if (grid.blocked(grid.cell_of(a.start_position))) {
      throw std::invalid_argument("build_nav_grid: agent start lies in a blocked cell");
    }
  }
  for (const auto& t : s.tasks) {
    if (grid.blocked(grid.cell_of(t.position))) {
      throw std::invalid_argument("build_nav_grid: task lies in a blocked cell");
    }
  }
  return grid;
}

/// Octile path length in move counts; exact, so ties compare reliably.
struct OctileLength {
  std::uint32_t straight = 0;
  std::uint32_t diagonal = 0;

  double cells() const noexcept {
    return static_cast<double>(straight) + static_cast<double>(diagonal) * std::numbers::sqrt2;
  }
  friend constexpr bool operator==(OctileLength, OctileLength) noexcept = default;
};

inline double octile_heuristic(Cell a, Cell b) noexcept {
  const auto dx = static_cast<double>(a.x > b.x ? a.x - b.x : b.x - a.x);
  const auto dy = static_cast<double>(a.y > b.y ? a.y - b.y : b.y - a.y);
  return std::max(dx, dy) - std::min(dx, dy) + std::min(dx, dy) * std::numbers::sqrt2;
}

struct GridPath {
  std::vector<Cell> cells;  // start .. goal inclusive
  OctileLength length;
};

/// 8-connected A* between two free cells. Ties prefer the lower heuristic,
/// then the lower cell index. Empty result when disconnected.
inline std::optional<GridPath> astar(const NavGrid& g, Cell start, Cell goal) {
  if (g.blocked(start) || g.blocked(goal)) {
    throw std::invalid_argument("astar: endpoints must lie in free cells");
  }
  const std::size_t n = g.cell_count();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<OctileLength> best(n);
  std::vector<char> reached(n, 0), closed(n, 0);
  std::vector<std::size_t> parent(n, none);

  using Key = std::tuple<double, double, std::size_t>;  // f, h, index
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open;
  const std::size_t s = g.index(start), t = g.index(goal);
  reached[s] = 1;
  const double h0 = octile_heuristic(start, goal);
  open.emplace(h0, h0, s);

  while (!open.empty()) {
    const auto [f, h, cur] = open.top();
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == t) break;
    const Cell c = g.cell_at(cur);
    g.for_each_neighbor(c, [&](Cell nb, bool diagonal) {
      const std::size_t k = g.index(nb);
      if (closed[k]) return;
      OctileLength cand = best[cur];
      if (diagonal) ++cand.diagonal; else ++cand.straight;
      if (!reached[k] || cand.cells() < best[k].cells()) {
        reached[k] = 1;
        best[k] = cand;
        parent[k] = cur;
        const double hk = octile_heuristic(nb, goal);
        open.emplace(cand.cells() + hk, hk, k);
      }
    });
  }
  if (!closed[t]) return std::nullopt;

  GridPath path;
  path.length = best[t];
  for (std::size_t k = t; k != none; k = parent[k]) path.cells.push_back(g.cell_at(k));
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Obstacle-aware distance: straight offsets to the snapped cell centers plus
/// the octile grid path between them. Same cell: Euclidean distance.
/// An endpoint inside a blocked cell (an agent pressed against geometry)
/// snaps to the nearest free cell. Returns kUnreachable when disconnected.
inline double shortest_path_distance(const NavGrid& g, Vec2 a, Vec2 b) {
  Cell ca = g.cell_of(a), cb = g.cell_of(b);
  if (ca == cb && g.free(ca)) return distance(a, b);
  if (g.blocked(ca)) {
    const auto snapped = g.nearest_free(a);
    if (!snapped) return kUnreachable;
    ca = *snapped;
  }
  if (g.blocked(cb)) {
    const auto snapped = g.nearest_free(b);
    if (!snapped) return kUnreachable;
    cb = *snapped;
  }
  if (ca == cb) return distance(a, g.center(ca)) + distance(g.center(ca), b);
  const auto path = astar(g, ca, cb);
  if (!path) return kUnreachable;
  return distance(a, g.center(ca)) + path->length.cells() * g.resolution() +
         distance(g.center(cb), b);
}

/// Margin kept from geometry when pulling waypoint chains taut.
inline double waypoint_margin(const NavGrid& g) noexcept { return g.resolution() / 4.0; }

/// Greedy string pulling: from each anchor jump to the farthest chain point
/// still in line of sight.
inline std::vector<Vec2> string_pull(const NavGrid& g, Vec2 from, const std::vector<Vec2>& chain) {
  std::vector<Vec2> out;
  const double margin = waypoint_margin(g);
  Vec2 anchor = from;
  std::size_t next = 0;
  while (next < chain.size()) {
    std::size_t pick = next;
    for (std::size_t k = chain.size(); k-- > next;) {
      if (g.line_of_sight(anchor, chain[k], margin)) {
        pick = k;
        break;
      }
    }
    out.push_back(chain[pick]);
    anchor = chain[pick];
    next = pick + 1;
  }
  return out;
}

namespace detail {

inline std::vector<Vec2> waypoints_between(const NavGrid& g, Vec2 a, Cell ca, Vec2 b) {
  const Cell cb = g.cell_of(b);
  if (ca == cb) return {b};
  const auto path = astar(g, ca, cb);
  if (!path) return {};
  std::vector<Vec2> chain;
  for (std::size_t k = 1; k + 1 < path->cells.size(); ++k) chain.push_back(g.center(path->cells[k]));
  chain.push_back(b);
  return string_pull(g, a, chain);
}

}  // namespace detail

/// Waypoints from a to b (a excluded, b last). Empty when a == b or when the
/// endpoints are disconnected.
inline std::vector<Vec2> path_waypoints(const NavGrid& g, Vec2 a, Vec2 b) {
  if (a == b) return {};
  const Cell ca = g.cell_of(a);
  if (g.blocked(ca) || g.blocked(g.cell_of(b))) {
    throw std::invalid_argument("path_waypoints: endpoints must lie in free cells");
  }
  return detail::waypoints_between(g, a, ca, b);
}

/// Like path_waypoints, but tolerates a start inside a blocked cell (an agent
/// pressed against geometry) by routing from the nearest free cell.
inline std::vector<Vec2> path_waypoints_from_anywhere(const NavGrid& g, Vec2 a, Vec2 b) {
  if (a == b) return {};
  Cell ca = g.cell_of(a);
  std::vector<Vec2> prefix;
  if (g.blocked(ca)) {
    auto snapped = g.nearest_free(a, true);
    if (!snapped) snapped = g.nearest_free(a);
    if (!snapped) return {};
    ca = *snapped;
    prefix.push_back(g.center(ca));
  }
  if (g.blocked(g.cell_of(b))) return {};
  auto rest = detail::waypoints_between(g, prefix.empty() ? a : prefix.front(), ca, b);
  if (rest.empty()) return {};
  prefix.insert(prefix.end(), rest.begin(), rest.end());
  return prefix;
}

/// Distance matrix (tasks x agents) from the given agent positions.
inline Matrix<double> task_agent_distances(const NavGrid& g, const Scenario& s,
                                           const std::vector<Vec2>& agent_positions) {
  Matrix<double> d(s.tasks.size(), agent_positions.size());
  for (std::size_t j = 0; j < s.tasks.size(); ++j)
    for (std::size_t i = 0; i < agent_positions.size(); ++i)
      d(j, i) = shortest_path_distance(g, agent_positions[i], s.tasks[j].position);
  return d;
}

}  // namespace fairtask
