#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairtask/assign.hpp"
#include "fairtask/engine.hpp"
#include "fairtask/metrics.hpp"
#include "fairtask/pathfind.hpp"
#include "fairtask/rng.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

/// Square lattice of exploration points over the workspace.
struct ExplorationMap {
  std::vector<Vec2> lattice;
  std::vector<bool> explored;
  double grid_width = 0.0;
  std::size_t per_axis = 0;

  std::size_t unexplored_count() const {
    return static_cast<std::size_t>(std::count(explored.begin(), explored.end(), false));
  }
};

/// Points at multiples of half the smallest sensing radius, the last one
/// clamped onto the far edge. Points inside obstacles start explored; so do
/// points that cannot be reached from any agent start when a grid is given.
inline ExplorationMap init_lattice(const Scenario& s, const NavGrid* g = nullptr) {
  ExplorationMap m;
  m.grid_width = s.min_sensing_radius() / 2.0;
  const double L = s.workspace_size;
  m.per_axis = static_cast<std::size_t>(std::ceil(L / m.grid_width - 1e-9)) + 1;
  std::vector<std::size_t> labels;
  std::vector<bool> start_label;
  if (g) {
    labels = g->components();
    start_label.assign(g->cell_count(), false);
    for (const auto& a : s.agents) {
      const auto c = g->nearest_free(a.start_position);
      if (c) start_label[labels[g->index(*c)]] = true;
    }
  }
  for (std::size_t y = 0; y < m.per_axis; ++y) {
    for (std::size_t x = 0; x < m.per_axis; ++x) {
      const Vec2 p{std::min(static_cast<double>(x) * m.grid_width, L),
                   std::min(static_cast<double>(y) * m.grid_width, L)};
      bool unreachable = std::any_of(s.obstacles.begin(), s.obstacles.end(),
                                     [&](const Disc& d) { return distance(p, d.center) < d.radius; });
      if (!unreachable && g) {
        const auto c = g->nearest_free(p);
        unreachable = !c || !start_label[labels[g->index(*c)]];
      }
      m.lattice.push_back(p);
      m.explored.push_back(unreachable);
    }
  }
  return m;
}

/// Draws an unexplored point with probability proportional to exp(-d) in
/// Euclidean distance d from `agent_pos`, and marks it explored. Returns
/// nullopt when nothing is left to explore.
inline std::optional<std::size_t> sample_target(ExplorationMap& m, Vec2 agent_pos, Rng& rng) {
  std::vector<std::size_t> candidates;
  std::vector<double> mass;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.lattice.size(); ++k) {
    if (m.explored[k]) continue;
    candidates.push_back(k);
    const double d = distance(agent_pos, m.lattice[k]);
    mass.push_back(d);
    dmin = std::min(dmin, d);
  }
  if (candidates.empty()) return std::nullopt;
  // Shifting by the minimum distance leaves the ratios unchanged.
  double total = 0.0;
  for (auto& v : mass) {
    v = std::exp(-(v - dmin));
    total += v;
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t pick = candidates.back();
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    acc += mass[k];
    if (u < acc) {
      pick = candidates[k];
      break;
    }
  }
  m.explored[pick] = true;
  return pick;
}

/// Marks every lattice point in the closed ball. Returns how many changed.
inline std::size_t mark_swept(ExplorationMap& m, Vec2 agent_pos, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("mark_swept: radius must be > 0");
  std::size_t changed = 0;
  for (std::size_t k = 0; k < m.lattice.size(); ++k) {
    if (!m.explored[k] && distance(agent_pos, m.lattice[k]) <= radius) {
      m.explored[k] = true;
      ++changed;
    }
  }
  return changed;
}

/// Committed result of one assignment phase.
struct SubsetChoice {
  std::vector<std::size_t> agents;  // chosen agents, ascending
  std::vector<std::size_t> tasks;   // tasks in the order they were passed in
  /// task_of_agent[k] indexes into `tasks` for agents[k].
  Assignment assignment;
  double objective = -std::numeric_limits<double>::infinity();
  std::size_t subsets_evaluated = 0;
};

/// Calls fn(subset) for each size-k subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(std::span<const std::size_t>(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t r = i; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
}

inline constexpr double kSubsetTieTolerance = 1e-12;

/// Best |tasks|-subset of `free_agents` by one-to-one EG value. `distance`
/// is a (task row, free-agent column) matrix of travel distances. Ties keep
/// the lexicographically smallest subset.
inline SubsetChoice select_subset_and_assign(const std::vector<std::size_t>& free_agents,
                                             const std::vector<std::size_t>& tasks,
                                             const Scenario& s, const Matrix<double>& distance) {
  const std::size_t k = tasks.size();
  if (k == 0) throw std::invalid_argument("select_subset_and_assign: no tasks");
  if (free_agents.size() < k) {
    throw std::logic_error("select_subset_and_assign: fewer free agents than tasks");
  }
  if (distance.rows() != k || distance.cols() != free_agents.size()) {
    throw std::invalid_argument("select_subset_and_assign: distance shape");
  }
  std::vector<double> w;
  for (auto j : tasks) w.push_back(s.tasks[j].weight);

  SubsetChoice best;
  Matrix<double> d(k, k), p(k, k);
  for_each_subset(free_agents.size(), k, [&](std::span<const std::size_t> pick) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        d(r, c) = distance(r, pick[c]);
        p(r, c) = s.preference(tasks[r], free_agents[pick[c]]);
      }
    }
    const auto u = compute_utility(d, p, s.alpha);
    Assignment a = solve_eg(u, w);
    ++best.subsets_evaluated;
    const double tol = kSubsetTieTolerance * std::max(1.0, std::abs(best.objective));
    const bool first = best.agents.empty();
    if (first || a.objective > best.objective + tol) {
      best.objective = a.objective;
      best.assignment = std::move(a);
      best.agents.clear();
      for (auto c : pick) best.agents.push_back(free_agents[c]);
    }
  });
  best.tasks = tasks;
  return best;
}

struct PhaseRecord {
  double time = 0.0;
  std::vector<Vec2> agent_positions;  // all agents at the trigger
  SubsetChoice choice;
};

struct OnlineOptions {
  EpisodeOptions episode{};
  /// Speed at which exploration targets are passed.
  double explore_speed = 0.5;
};

struct OnlineEpisode {
  EpisodeResult result;
  std::vector<PhaseRecord> phases;
  double u_star = 0.0;
  /// Set when the lattice ran dry with tasks still hidden and exploration
  /// restarted in visit-only mode.
  bool lattice_reset = false;
};

/// Cooperative exploration with subset-based EG assignment every time k
/// discovered tasks are waiting (or all tasks are known).
inline OnlineEpisode run_online_episode(const Scenario& s, std::size_t k, Rng& rng,
                                        const OnlineOptions& opts = {}) {
  validate(s);
  const std::size_t n = s.agents.size();
  if (k < 1 || k > n) throw std::invalid_argument("run_online_episode: k must lie in [1, N]");
  const NavGrid g = build_nav_grid(s, opts.episode.grid_resolution);

  OnlineEpisode out;
  out.u_star = centralized_optimum(s, g).u_star;

  EpisodeCore core(s, g, opts.episode);
  ExplorationMap map = init_lattice(s, &g);
  bool sweeping = true;
  std::vector<std::optional<std::size_t>> target(n);
  std::vector<std::size_t> discovery_order;
  const double reach_radius = map.grid_width / 2.0;
  const double explore_speed = opts.explore_speed;

  auto free_agents = [&] {
    std::vector<std::size_t> f;
    for (std::size_t i = 0; i < n; ++i)
      if (!core.task_of(i)) f.push_back(i);
    return f;
  };
  auto pending = [&] {
    std::vector<std::size_t> p;
    for (auto j : discovery_order)
      if (!core.task_assigned(j)) p.push_back(j);
    return p;
  };
  // Lattice points are approached via the center of the nearest free cell.
  auto nav_goal = [&](std::size_t point) { return g.center(*g.nearest_free(map.lattice[point])); };
  auto all_discovered = [&] { return discovery_order.size() == s.tasks.size(); };

  auto phase_two = [&](std::vector<std::size_t> tasks) {
    const auto free = free_agents();
    Matrix<double> d(tasks.size(), free.size());
    for (std::size_t r = 0; r < tasks.size(); ++r)
      for (std::size_t c = 0; c < free.size(); ++c)
        d(r, c) = shortest_path_distance(g, core.state().agent_positions[free[c]],
                                         s.tasks[tasks[r]].position);
    PhaseRecord rec;
    rec.time = core.state().time;
    rec.agent_positions = core.state().agent_positions;
    rec.choice = select_subset_and_assign(free, tasks, s, d);
    for (std::size_t c = 0; c < rec.choice.agents.size(); ++c) {
      const std::size_t agent = rec.choice.agents[c];
      core.assign(agent, tasks[rec.choice.assignment.task_of_agent[c]]);
      target[agent].reset();
    }
    out.phases.push_back(std::move(rec));
  };

  while (!core.all_completed() && !core.capped()) {
    for (const auto& [task, agent] : core.discover()) discovery_order.push_back(task);

    if (sweeping) {
      for (auto i : free_agents())
        mark_swept(map, core.state().agent_positions[i], s.agents[i].sensing_radius);
    }

    for (auto p = pending(); p.size() >= k; p = pending())
      phase_two(std::vector<std::size_t>(p.begin(), p.begin() + static_cast<long>(k)));
    if (all_discovered()) {
      if (auto p = pending(); !p.empty()) phase_two(p);
    }

    std::vector<std::optional<Vec2>> goals(n);
    if (!all_discovered()) {
      const auto free = free_agents();
      for (auto i : free) {
        const Vec2 pos = core.state().agent_positions[i];
        if (target[i] && distance(pos, nav_goal(*target[i])) <= reach_radius) target[i].reset();
        if (!target[i]) {
          target[i] = sample_target(map, pos, rng);
          if (!target[i]) {
            // Everything swept yet tasks remain hidden: walk the lattice again,
            // this time only visiting.
            const auto fresh = init_lattice(s, &g);
            map.explored = fresh.explored;
            sweeping = false;
            out.lattice_reset = true;
            target[i] = sample_target(map, pos, rng);
          }
        }
        if (target[i]) goals[i] = nav_goal(*target[i]);
      }
    }
    core.step(goals, explore_speed);
  }
  out.result = core.finish();
  return out;
}

}  // namespace fairtask
