#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairtask/pathfind.hpp"
#include "fairtask/rng.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

struct GeneratorParams {
  std::size_t num_agents = 7;
  /// Side length of the square workspace; 0 picks default_map_size(N).
  double map_size = 0.0;
  std::size_t num_obstacles = 2;
  double obstacle_radius_min = 0.1;
  double obstacle_radius_max = 0.2;
  std::size_t num_walls = 1;
  double wall_length_min = 0.4;
  double wall_length_max = 0.8;
  std::size_t agent_types = 3;
  std::size_t task_types = 3;
  double preference_min = 0.2;
  double preference_max = 1.0;
  double workload_min = 0.5;
  double workload_max = 1.5;
  double weight_min = 0.5;
  double weight_max = 2.0;
  double sensing_radius = 0.5;
  double max_speed = 1.0;
  double dt = 0.05;
  double alpha = 0.97;
  /// Minimum gap between any two sampled entities.
  double clearance = 0.1;

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("generator: " + what); };
    if (num_agents == 0) fail("N must be >= 1");
    if (map_size < 0.0) fail("map size must be > 0");
    if (!(obstacle_radius_min > 0.0 && obstacle_radius_min <= obstacle_radius_max)) fail("obstacle radius range");
    if (!(wall_length_min > 0.0 && wall_length_min <= wall_length_max)) fail("wall length range");
    if (agent_types == 0 || task_types == 0) fail("type counts must be >= 1");
    if (!(preference_min > 0.0 && preference_min <= preference_max)) fail("preference range");
    if (!(workload_min > 0.0 && workload_min <= workload_max)) fail("workload range");
    if (!(weight_min > 0.0 && weight_min <= weight_max)) fail("weight range");
    if (!(sensing_radius > 0.0 && max_speed > 0.0 && dt > 0.0)) fail("radius, speed and dt must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
    if (!(clearance >= 0.0)) fail("clearance must be >= 0");
  }
};

/// 2.5, 2.7 and 2.9 for N = 3, 7, 10; linear in between and beyond.
inline double default_map_size(std::size_t n) {
  const double x = static_cast<double>(n);
  if (x <= 3.0) return 2.5;
  if (x <= 7.0) return 2.5 + 0.2 * (x - 3.0) / 4.0;
  return 2.7 + 0.2 * (x - 7.0) / 3.0;
}

namespace detail {

inline bool try_generate(const GeneratorParams& p, Rng& rng, Scenario& s) {
  const double L = s.workspace_size;
  const double c = p.clearance;

  s.obstacles.clear();
  s.walls.clear();
  s.agents.clear();
  s.tasks.clear();

  for (std::size_t k = 0; k < p.num_obstacles; ++k) {
    const double r = rng.uniform(p.obstacle_radius_min, p.obstacle_radius_max);
    if (L - 2.0 * (r + c) <= 0.0) return false;
    const Vec2 center{rng.uniform(r + c, L - r - c), rng.uniform(r + c, L - r - c)};
    s.obstacles.push_back({center, r});
  }
  static constexpr std::array<double, 4> kAngles = {0.0, 45.0, 90.0, 135.0};
  for (std::size_t k = 0; k < p.num_walls; ++k) {
    const double len = rng.uniform(p.wall_length_min, p.wall_length_max);
    const double theta = kAngles[rng.below(kAngles.size())] * std::numbers::pi / 180.0;
    const Vec2 half{0.5 * len * std::cos(theta), 0.5 * len * std::sin(theta)};
    const Vec2 mid{rng.uniform(c, L - c), rng.uniform(c, L - c)};
    const Segment w{mid - half, mid + half};
    for (Vec2 e : {w.a, w.b})
      if (e.x < c || e.y < c || e.x > L - c || e.y > L - c) return false;
    s.walls.push_back(w);
  }

  std::vector<Vec2> placed;
  auto sample_point = [&](Vec2& out) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec2 q{rng.uniform(c, L - c), rng.uniform(c, L - c)};
      bool ok = true;
      for (const auto& d : s.obstacles) ok = ok && distance(q, d.center) >= d.radius + c;
      for (const auto& w : s.walls) ok = ok && point_segment_distance(q, w) >= c;
      for (const auto& o : placed) ok = ok && distance(q, o) >= c;
      if (ok) {
        placed.push_back(q);
        out = q;
        return true;
      }
    }
    return false;
  };

  // Preference of each agent type for each task type.
  std::vector<std::vector<double>> table(p.agent_types, std::vector<double>(p.task_types));
  for (auto& row : table)
    for (auto& v : row) v = rng.uniform(p.preference_min, p.preference_max);

  for (std::size_t i = 0; i < p.num_agents; ++i) {
    AgentSpec a;
    a.id = i;
    if (!sample_point(a.start_position)) return false;
    a.agent_type = rng.below(p.agent_types);
    a.sensing_radius = p.sensing_radius;
    a.max_speed = p.max_speed;
    a.preference_row = table[a.agent_type];
    s.agents.push_back(a);
  }
  for (std::size_t j = 0; j < p.num_agents; ++j) {
    TaskSpec t;
    t.id = j;
    if (!sample_point(t.position)) return false;
    t.task_type = rng.below(p.task_types);
    t.workload = rng.uniform(p.workload_min, p.workload_max);
    t.weight = rng.uniform(p.weight_min, p.weight_max);
    s.tasks.push_back(t);
  }

  NavGrid g = build_nav_grid(s);
  const auto labels = g.components();
  const std::size_t root = labels[g.index(g.cell_of(s.agents[0].start_position))];
  for (const auto& a : s.agents)
    if (labels[g.index(g.cell_of(a.start_position))] != root) return false;
  for (const auto& t : s.tasks)
    if (labels[g.index(g.cell_of(t.position))] != root) return false;
  return true;
}

}  // namespace detail

/// Random scenario with uniformly placed entities (rejection sampling with
/// a minimum clearance) whose agents and tasks share one connected region.
inline Scenario generate_scenario(const GeneratorParams& p, std::uint64_t seed) {
  p.validate();
  Scenario s;
  s.workspace_size = p.map_size > 0.0 ? p.map_size : default_map_size(p.num_agents);
  s.dt = p.dt;
  s.alpha = p.alpha;
  s.seed = seed;
  Rng rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    if (detail::try_generate(p, rng, s)) {
      validate(s);
      return s;
    }
  }
  throw std::runtime_error("generate_scenario: could not place entities; map too crowded");
}

}  // namespace fairtask
