#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairtask/assign.hpp"
#include "fairtask/geometry.hpp"

namespace fairtask {

/// An agent services a task when its center is within this distance.
inline constexpr double kArrivalRadius = 0.05;
/// Two agents closer than this are in contact (counted, never blocked).
inline constexpr double kAgentContactDistance = 0.05;
/// Remaining workload at or below this is treated as fully served.
inline constexpr double kWorkloadTolerance = 1e-12;
/// Contact points are backed off the surface by this much.
inline constexpr double kContactBackoff = 1e-9;

struct AgentSpec {
  std::size_t id = 0;
  Vec2 start_position;
  std::size_t agent_type = 0;
  double sensing_radius = 0.5;
  double max_speed = 1.0;
  /// Service rate of this agent for each task type.
  std::vector<double> preference_row;
};

struct TaskSpec {
  std::size_t id = 0;
  Vec2 position;
  std::size_t task_type = 0;
  double workload = 1.0;  // total work to serve
  double weight = 1.0;    // importance in the fairness objective
};

struct Scenario {
  double workspace_size = 2.5;
  std::vector<Segment> walls;
  std::vector<Disc> obstacles;
  std::vector<AgentSpec> agents;
  std::vector<TaskSpec> tasks;
  std::uint64_t seed = 0;
  double dt = 0.05;
  double alpha = 0.97;

  std::size_t num_agents() const noexcept { return agents.size(); }
  std::size_t num_tasks() const noexcept { return tasks.size(); }

  std::size_t num_agent_types() const noexcept {
    std::size_t n = 0;
    for (const auto& a : agents) n = std::max(n, a.agent_type + 1);
    return n;
  }
  std::size_t num_task_types() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tasks) n = std::max(n, t.task_type + 1);
    return n;
  }

  /// Service rate of agent i on task j.
  double preference(std::size_t task, std::size_t agent) const {
    return agents[agent].preference_row[tasks[task].task_type];
  }

  std::vector<double> weights() const {
    std::vector<double> w;
    w.reserve(tasks.size());
    for (const auto& t : tasks) w.push_back(t.weight);
    return w;
  }

  Matrix<double> preference_matrix() const {
    Matrix<double> p(tasks.size(), agents.size());
    for (std::size_t j = 0; j < tasks.size(); ++j)
      for (std::size_t i = 0; i < agents.size(); ++i) p(j, i) = preference(j, i);
    return p;
  }

  double min_sensing_radius() const noexcept {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& a : agents) r = std::min(r, a.sensing_radius);
    return r;
  }
};

inline bool strictly_inside_workspace(const Scenario& s, Vec2 p) noexcept {
  return p.x > 0.0 && p.y > 0.0 && p.x < s.workspace_size && p.y < s.workspace_size;
}

/// Throws std::invalid_argument describing the first violated invariant.
inline void validate(const Scenario& s) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
  if (!(s.workspace_size > 0.0)) fail("workspace_size must be > 0");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail("alpha must lie in (0,1)");
  if (!(s.dt > 0.0)) fail("dt must be > 0");
  if (s.agents.empty()) fail("at least one agent required");
  if (s.agents.size() != s.tasks.size()) fail("agent and task counts must match");
  const std::size_t task_types = s.num_task_types();
  auto in_obstacle = [&](Vec2 p) {
    return std::any_of(s.obstacles.begin(), s.obstacles.end(),
                       [&](const Disc& d) { return distance(p, d.center) < d.radius; });
  };
  for (const auto& d : s.obstacles) {
    if (!(d.radius > 0.0)) fail("obstacle radius must be > 0");
  }
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& a = s.agents[i];
    if (a.id != i) fail("agent ids must equal their index");
    if (!(a.sensing_radius > 0.0)) fail("sensing_radius must be > 0");
    if (!(a.max_speed > 0.0)) fail("max_speed must be > 0");
    if (a.preference_row.size() < task_types) fail("preference_row shorter than task type count");
    for (double p : a.preference_row) {
      if (!(p >= 0.0)) fail("preferences must be >= 0");
    }
    if (!strictly_inside_workspace(s, a.start_position)) fail("agent outside workspace");
    if (in_obstacle(a.start_position)) fail("agent inside obstacle");
  }
  for (std::size_t j = 0; j < s.tasks.size(); ++j) {
    const auto& t = s.tasks[j];
    if (t.id != j) fail("task ids must equal their index");
    if (!(t.workload > 0.0)) fail("workload must be > 0");
    if (!(t.weight > 0.0)) fail("weight must be > 0");
    if (!strictly_inside_workspace(s, t.position)) fail("task outside workspace");
    if (in_obstacle(t.position)) fail("task inside obstacle");
  }
}

struct WorldState {
  double time = 0.0;
  std::vector<Vec2> agent_positions;
  std::vector<Vec2> agent_velocities;
  std::vector<double> remaining_workloads;
  std::vector<double> progress;
  std::vector<bool> discovered;
  std::vector<bool> completed;
  std::vector<std::optional<std::size_t>> last_server;
  std::vector<double> cumulative_distance;
};

inline WorldState initial_state(const Scenario& s) {
  WorldState w;
  for (const auto& a : s.agents) {
    w.agent_positions.push_back(a.start_position);
    w.agent_velocities.push_back({});
    w.cumulative_distance.push_back(0.0);
  }
  for (const auto& t : s.tasks) {
    w.remaining_workloads.push_back(t.workload);
    w.progress.push_back(0.0);
  }
  w.discovered.assign(s.tasks.size(), false);
  w.completed.assign(s.tasks.size(), false);
  w.last_server.assign(s.tasks.size(), std::nullopt);
  return w;
}

enum class Action : std::uint8_t { Idle, AccelPosX, AccelNegX, AccelPosY, AccelNegY };

inline constexpr std::array<Action, 5> kAllActions = {Action::Idle, Action::AccelPosX,
                                                      Action::AccelNegX, Action::AccelPosY,
                                                      Action::AccelNegY};

/// Velocity change applied by one action.
inline double acceleration_quantum(const AgentSpec& a) noexcept { return a.max_speed / 4.0; }

inline Vec2 action_delta(Action act, double quantum) noexcept {
  switch (act) {
    case Action::AccelPosX: return {quantum, 0.0};
    case Action::AccelNegX: return {-quantum, 0.0};
    case Action::AccelPosY: return {0.0, quantum};
    case Action::AccelNegY: return {0.0, -quantum};
    case Action::Idle: break;
  }
  return {};
}

inline Vec2 clamp_speed(Vec2 v, double max_speed) noexcept {
  const double s = norm(v);
  return s > max_speed ? v * (max_speed / s) : v;
}

enum class CollisionKind { Boundary, Wall, Obstacle, Agent };

struct CollisionEvent {
  std::size_t agent = 0;
  CollisionKind kind = CollisionKind::Wall;
  std::size_t other = 0;  // wall / obstacle / agent index; unused for Boundary
};

struct StepResult {
  WorldState state;
  std::vector<CollisionEvent> collisions;
};

namespace detail {

struct Contact {
  double t = 2.0;
  Vec2 normal;
  CollisionKind kind = CollisionKind::Wall;
  std::size_t other = 0;
};

inline Vec2 segment_normal(const Segment& s) noexcept {
  const Vec2 d = s.b - s.a;
  const double len = norm(d);
  return len == 0.0 ? Vec2{} : Vec2{-d.y / len, d.x / len};
}

inline Contact earliest_contact(const Scenario& s, const Segment& motion) {
  Contact best;
  const double L = s.workspace_size;
  const Segment bounds[4] = {{{0, 0}, {L, 0}}, {{L, 0}, {L, L}}, {{L, L}, {0, L}}, {{0, L}, {0, 0}}};
  for (std::size_t k = 0; k < 4; ++k) {
    if (auto t = segment_crossing(motion, bounds[k]); t && *t < best.t) {
      best = {*t, segment_normal(bounds[k]), CollisionKind::Boundary, k};
    }
  }
  for (std::size_t k = 0; k < s.walls.size(); ++k) {
    if (auto t = segment_crossing(motion, s.walls[k]); t && *t < best.t) {
      best = {*t, segment_normal(s.walls[k]), CollisionKind::Wall, k};
    }
  }
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    if (auto t = disc_entry(motion, s.obstacles[k]); t && *t < best.t) {
      const Vec2 hit = motion.a + (motion.b - motion.a) * *t;
      const Vec2 n = hit - s.obstacles[k].center;
      const double len = norm(n);
      best = {*t, len == 0.0 ? Vec2{} : n * (1.0 / len), CollisionKind::Obstacle, k};
    }
  }
  return best;
}

}  // namespace detail

/// Advances the world by one timestep. Velocities change by one acceleration
/// quantum per action and are clamped to max_speed; motion that would cross
/// a wall, the workspace boundary, or enter an obstacle stops at the contact
/// point with the normal velocity component removed. Agents pass through
/// each other; new contacts are reported.
inline StepResult step_dynamics(const WorldState& state, std::span<const Action> joint_action,
                                const Scenario& s) {
  const std::size_t n = s.agents.size();
  if (joint_action.size() != n) throw std::invalid_argument("step_dynamics: one action per agent");
  StepResult out{state, {}};
  WorldState& w = out.state;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& spec = s.agents[i];
    Vec2 v = clamp_speed(state.agent_velocities[i] +
                             action_delta(joint_action[i], acceleration_quantum(spec)),
                         spec.max_speed);
    const Vec2 p = state.agent_positions[i];
    Vec2 q = p + v * s.dt;
    if (!(q == p)) {
      const Segment motion{p, q};
      const detail::Contact c = detail::earliest_contact(s, motion);
      if (c.t <= 1.0) {
        const double len = distance(p, q);
        const double t = std::max(0.0, c.t - kContactBackoff / len);
        q = p + (q - p) * t;
        v -= c.normal * dot(v, c.normal);
        out.collisions.push_back({i, c.kind, c.other});
      }
    }
    w.agent_velocities[i] = v;
    w.agent_positions[i] = q;
    w.cumulative_distance[i] += distance(p, q);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const bool before = distance(state.agent_positions[i], state.agent_positions[k]) <
                          kAgentContactDistance;
      const bool after = distance(w.agent_positions[i], w.agent_positions[k]) < kAgentContactDistance;
      if (after && !before) out.collisions.push_back({i, CollisionKind::Agent, k});
    }
  }
  w.time = state.time + s.dt;
  return out;
}

struct VisibleSet {
  std::vector<std::size_t> agents;
  std::vector<std::size_t> tasks;
  std::vector<std::size_t> obstacles;
};

/// Entities whose position lies in the closed sensing ball of `agent`.
inline VisibleSet sense(const WorldState& w, const Scenario& s, std::size_t agent) {
  if (agent >= s.agents.size()) throw std::out_of_range("sense: agent index");
  const Vec2 p = w.agent_positions[agent];
  const double r = s.agents[agent].sensing_radius;
  VisibleSet v;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    if (i != agent && distance(p, w.agent_positions[i]) <= r) v.agents.push_back(i);
  }
  for (std::size_t j = 0; j < s.tasks.size(); ++j) {
    if (distance(p, s.tasks[j].position) <= r) v.tasks.push_back(j);
  }
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    if (distance(p, s.obstacles[k].center) <= r) v.obstacles.push_back(k);
  }
  return v;
}

/// Marks every task sensed by any agent as discovered. Returns the newly
/// discovered tasks paired with the agent credited for each.
inline std::vector<std::pair<std::size_t, std::size_t>> commit_discoveries(WorldState& w,
                                                                          const Scenario& s) {
  std::vector<std::pair<std::size_t, std::size_t>> found;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    for (std::size_t j : sense(w, s, i).tasks) {
      if (!w.discovered[j]) {
        w.discovered[j] = true;
        found.emplace_back(j, i);
      }
    }
  }
  return found;
}

struct ServiceResult {
  WorldState state;
  double served = 0.0;        // workload removed this tick
  bool completed_now = false;
  bool noop_completed = false;  // task was already complete
};

inline bool within_arrival(Vec2 p, Vec2 target) noexcept {
  return distance(p, target) <= kArrivalRadius;
}

/// One tick of service by `agent` on `task`: the remaining workload drops by
/// preference * dt, floored at zero.
inline ServiceResult service_tick(const WorldState& w, const Scenario& s, std::size_t agent,
                                  std::size_t task) {
  if (agent >= s.agents.size() || task >= s.tasks.size()) {
    throw std::out_of_range("service_tick: index");
  }
  ServiceResult r{w};
  if (w.completed[task]) {
    r.noop_completed = true;
    return r;
  }
  if (!w.discovered[task]) throw std::logic_error("service_tick: task not discovered");
  if (!within_arrival(w.agent_positions[agent], s.tasks[task].position)) {
    throw std::logic_error("service_tick: agent not at task");
  }
  const double rate = s.preference(task, agent) * s.dt;
  double remaining = w.remaining_workloads[task];
  r.served = std::min(rate, remaining);
  remaining -= rate;
  if (remaining <= kWorkloadTolerance) {
    r.served = w.remaining_workloads[task];
    remaining = 0.0;
    r.state.completed[task] = true;
    r.completed_now = true;
  }
  r.state.remaining_workloads[task] = remaining;
  r.state.progress[task] = s.tasks[task].workload - remaining;
  r.state.last_server[task] = agent;
  return r;
}

struct Occupancy {
  double value = 0.0;
  /// Set when the nearest agent is farther than 1, i.e. value < 0.
  bool out_of_range = false;
};

/// 1 minus the distance from the task to its nearest agent. Values below
/// zero are reported unclamped.
inline Occupancy occupancy(const WorldState& w, const Scenario& s, std::size_t task) {
  if (task >= s.tasks.size()) throw std::out_of_range("occupancy: task index");
  double nearest = std::numeric_limits<double>::infinity();
  for (const Vec2& p : w.agent_positions) nearest = std::min(nearest, distance(p, s.tasks[task].position));
  const double value = 1.0 - nearest;
  return {value, value < 0.0};
}

/// Length of one per-task observation block:
/// [rel_x, rel_y, u, pref over agent types..., occupancy, last_server, weight].
inline std::size_t observation_block_size(const Scenario& s) noexcept {
  return 2 + 1 + s.num_agent_types() + 3;
}

/// Preference of each agent type for the type of task j; 0 for types with
/// no agent in the scenario.
inline std::vector<double> task_preference_column(const Scenario& s, std::size_t task) {
  std::vector<double> col(s.num_agent_types(), 0.0);
  std::vector<bool> seen(col.size(), false);
  for (const auto& a : s.agents) {
    if (!seen[a.agent_type]) {
      seen[a.agent_type] = true;
      col[a.agent_type] = a.preference_row[s.tasks[task].task_type];
    }
  }
  return col;
}

/// Fixed-length ego observation; blocks of tasks outside the sensing radius
/// are zero.
inline std::vector<double> build_observation(const WorldState& w, const Scenario& s,
                                             std::size_t agent) {
  const std::size_t block = observation_block_size(s);
  std::vector<double> obs(s.tasks.size() * block, 0.0);
  const Vec2 p = w.agent_positions[agent];
  for (std::size_t j : sense(w, s, agent).tasks) {
    double* out = obs.data() + j * block;
    const Vec2 rel = s.tasks[j].position - p;
    *out++ = rel.x;
    *out++ = rel.y;
    *out++ = utility_value(s.alpha, norm(rel), s.preference(j, agent));
    for (double pref : task_preference_column(s, j)) *out++ = pref;
    *out++ = occupancy(w, s, j).value;
    *out++ = w.last_server[j] ? static_cast<double>(*w.last_server[j]) : -1.0;
    *out++ = s.tasks[j].weight;
  }
  return obs;
}

}  // namespace fairtask
