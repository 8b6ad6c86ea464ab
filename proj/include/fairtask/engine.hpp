#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fairtask/assign.hpp"
#include "fairtask/controller.hpp"
#include "fairtask/metrics.hpp"
#include "fairtask/pathfind.hpp"
#include "fairtask/rewards.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

enum class ExecutionMode {
  Scripted,
  /// Agents jump to their task on assignment and are charged exactly the
  /// shortest-path distance.
  Teleport,
};

inline constexpr std::size_t kDefaultStepCap = 3000;

struct EpisodeOptions {
  std::size_t step_cap = kDefaultStepCap;
  ExecutionMode mode = ExecutionMode::Scripted;
  RewardConstants rewards{};
  ControllerParams controller{};
  double grid_resolution = kDefaultGridResolution;
  PolicyTrace* trace = nullptr;
};

/// Shared episode bookkeeping: assignment, navigation, service, accounting
/// and rewards. Drivers decide who is assigned where and when; free agents
/// may be given exploration goals.
class EpisodeCore {
 public:
  EpisodeCore(const Scenario& s, const NavGrid& g, const EpisodeOptions& opts)
      : s_(s), g_(g), opts_(opts), w_(initial_state(s)) {
    const std::size_t n = s.agents.size(), m = s.tasks.size();
    task_of_agent_.assign(n, kNoTask);
    agent_of_task_.assign(m, kNoAgent);
    assigned_at_distance_.assign(n, 0.0);
    arrived_.assign(n, false);
    realized_distance_.assign(m, std::numeric_limits<double>::infinity());
    discovery_times_.assign(m, std::numeric_limits<double>::quiet_NaN());
    nav_.resize(n);
    pending_.assign(n, RewardBreakdown{});
  }

  static constexpr std::size_t kNoTask = std::numeric_limits<std::size_t>::max();

  const WorldState& state() const noexcept { return w_; }
  const Scenario& scenario() const noexcept { return s_; }
  const NavGrid& grid() const noexcept { return g_; }
  std::size_t steps() const noexcept { return steps_; }
  bool capped() const noexcept { return steps_ >= opts_.step_cap; }
  std::optional<std::size_t> task_of(std::size_t agent) const {
    if (task_of_agent_[agent] == kNoTask) return std::nullopt;
    return task_of_agent_[agent];
  }
  bool task_assigned(std::size_t task) const { return agent_of_task_[task] != kNoAgent; }

  bool all_completed() const {
    return std::all_of(w_.completed.begin(), w_.completed.end(), [](bool c) { return c; });
  }

  /// Marks tasks sensed by any agent as discovered, crediting exploration
  /// rewards to the discovering agent.
  std::vector<std::pair<std::size_t, std::size_t>> discover() {
    auto found = commit_discoveries(w_, s_);
    for (const auto& [task, agent] : found) {
      discovery_times_[task] = w_.time;
      pending_[agent].exploration += exploration_reward(w_.time, true, opts_.rewards);
      discoveries_.emplace_back(task, agent);
    }
    return found;
  }

  /// Reveals every task at once (full-information baselines).
  void discover_all() {
    for (std::size_t j = 0; j < s_.tasks.size(); ++j) {
      if (!w_.discovered[j]) {
        w_.discovered[j] = true;
        discovery_times_[j] = w_.time;
      }
    }
  }

  void assign(std::size_t agent, std::size_t task) {
    if (task_of_agent_[agent] != kNoTask || agent_of_task_[task] != kNoAgent) {
      throw std::logic_error("EpisodeCore::assign: agent or task already assigned");
    }
    task_of_agent_[agent] = task;
    agent_of_task_[task] = agent;
    log_.push_back({w_.time, agent, task});
    nav_[agent].reset();
    assigned_at_distance_[agent] = w_.cumulative_distance[agent];
    const Vec2 goal = s_.tasks[task].position;
    if (opts_.mode == ExecutionMode::Teleport) {
      const double d = shortest_path_distance(g_, w_.agent_positions[agent], goal);
      if (!std::isinf(d)) {
        w_.agent_positions[agent] = goal;
        w_.agent_velocities[agent] = {};
        w_.cumulative_distance[agent] += d;
      }
    }
    check_arrival(agent, nullptr);
  }

  /// One control step. `explore_goals[i]` steers unassigned agent i (no
  /// goal: brake to a stop); `explore_speed` is the pass-through speed used
  /// at exploration goals.
  void step(const std::vector<std::optional<Vec2>>& explore_goals, double explore_speed = 0.0) {
    const std::size_t n = s_.agents.size();
    std::vector<Action> actions(n, Action::Idle);
    for (std::size_t i = 0; i < n; ++i) actions[i] = choose_action(i, explore_goals, explore_speed);

    StepResult r = step_dynamics(w_, actions, s_);
    w_ = std::move(r.state);
    collisions_ += r.collisions.size();

    TraceStep rec;
    rec.time = w_.time;
    std::vector<RewardBreakdown> rw = std::move(pending_);
    pending_.assign(n, RewardBreakdown{});
    rec.discoveries = std::move(discoveries_);
    discoveries_.clear();

    for (const auto& c : r.collisions)
      rw[c.agent].collision += completion_and_collision(0, 1, opts_.rewards);

    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t task = task_of_agent_[i];
      bool arrived_now = false;
      if (task != kNoTask) arrived_now = check_arrival(i, &rec);
      if (task == kNoTask) continue;
      const Vec2 goal = s_.tasks[task].position;
      rw[i].shaping += fairness_shaping(&goal, w_.agent_positions[i], arrived_now, opts_.rewards).value;
      if (w_.completed[task] || !w_.discovered[task]) continue;
      if (!within_arrival(w_.agent_positions[i], goal)) continue;
      const double pref = s_.preference(task, i);
      rw[i].progress += progress_reward(pref, s_.dt, w_.remaining_workloads[task], opts_.rewards);
      ServiceResult sr = service_tick(w_, s_, i, task);
      w_ = std::move(sr.state);
      if (sr.completed_now) {
        last_completion_ = w_.time;
        rw[i].completion += completion_and_collision(1, 0, opts_.rewards);
        rec.completed_tasks.push_back(task);
      }
    }
    ++steps_;

    if (opts_.trace) {
      rec.joint_action = std::move(actions);
      rec.collisions = std::move(r.collisions);
      rec.joint_reward = 0.0;
      for (const auto& b : rw) rec.joint_reward += b.total();
      rec.rewards = std::move(rw);
      opts_.trace->steps.push_back(std::move(rec));
    }
  }

  EpisodeResult finish() const {
    EpisodeResult out;
    out.weights = s_.weights();
    out.agent_of_task = agent_of_task_;
    out.realized_distances = realized_distance_;
    out.realized_utilities = realized_utilities(s_, agent_of_task_, realized_distance_);
    out.per_agent_distance = w_.cumulative_distance;
    for (double d : out.per_agent_distance) out.total_distance += d;
    out.collision_count = collisions_;
    out.discovery_times = discovery_times_;
    out.assignment_log = log_;
    out.incomplete = !all_completed();
    out.completion_time = out.incomplete ? w_.time : last_completion_;
    out.steps = steps_;
    return out;
  }

 private:
  Action choose_action(std::size_t i, const std::vector<std::optional<Vec2>>& explore_goals,
                       double explore_speed) {
    const std::size_t task = task_of_agent_[i];
    if (task != kNoTask) {
      if (opts_.mode == ExecutionMode::Teleport) return Action::Idle;
      if (w_.completed[task]) return stop(i);
      return scripted_goto(w_, s_, i, s_.tasks[task].position, g_, nav_[i], 0.0, opts_.controller);
    }
    if (i < explore_goals.size() && explore_goals[i]) {
      return scripted_goto(w_, s_, i, *explore_goals[i], g_, nav_[i], explore_speed,
                           opts_.controller);
    }
    return stop(i);
  }

  Action stop(std::size_t i) {
    return detail::track_velocity(w_.agent_velocities[i], {}, s_.agents[i]);
  }

  bool check_arrival(std::size_t agent, TraceStep* rec) {
    const std::size_t task = task_of_agent_[agent];
    if (arrived_[agent] || !within_arrival(w_.agent_positions[agent], s_.tasks[task].position)) {
      return false;
    }
    arrived_[agent] = true;
    realized_distance_[task] = w_.cumulative_distance[agent] - assigned_at_distance_[agent];
    if (rec) rec->arrived_agents.push_back(agent);
    return true;
  }

  const Scenario& s_;
  const NavGrid& g_;
  EpisodeOptions opts_;
  WorldState w_;
  std::vector<std::size_t> task_of_agent_, agent_of_task_;
  std::vector<double> assigned_at_distance_;
  std::vector<bool> arrived_;
  std::vector<double> realized_distance_;
  std::vector<double> discovery_times_;
  std::vector<AssignmentRecord> log_;
  std::vector<Navigator> nav_;
  std::vector<RewardBreakdown> pending_;
  std::vector<std::pair<std::size_t, std::size_t>> discoveries_;
  std::size_t collisions_ = 0;
  std::size_t steps_ = 0;
  double last_completion_ = 0.0;
};

/// Allocation chosen by a centralized rule with full information at t = 0.
inline Assignment centralized_assignment(const Scenario& s, const NavGrid& g, Rule rule) {
  std::vector<Vec2> starts;
  for (const auto& a : s.agents) starts.push_back(a.start_position);
  const Matrix<double> d = task_agent_distances(g, s, starts);
  switch (rule) {
    case Rule::EG: {
      const auto u = compute_utility(d, s.preference_matrix(), s.alpha);
      return solve_eg(u, s.weights());
    }
    case Rule::Hungarian: return solve_hungarian_max(s.preference_matrix());
    case Rule::MinMax: {
      Matrix<double> c = d;
      double finite_max = 0.0;
      for (double x : c.data())
        if (!std::isinf(x)) finite_max = std::max(finite_max, x);
      // Disconnected pairs become dearer than any connected one.
      for (auto& x : c.data())
        if (std::isinf(x)) x = 2.0 * finite_max + 1.0;
      return solve_minmax(c);
    }
  }
  throw std::invalid_argument("centralized_assignment: unknown rule");
}

struct CentralizedEpisode {
  EpisodeResult result;
  Assignment assignment;
  double u_star = 0.0;
};

/// Solves the rule at t = 0 and executes it with the scripted controller.
inline CentralizedEpisode run_centralized_episode(const Scenario& s, Rule rule,
                                                  const EpisodeOptions& opts = {}) {
  validate(s);
  const NavGrid g = build_nav_grid(s, opts.grid_resolution);
  CentralizedEpisode out;
  out.u_star = centralized_optimum(s, g).u_star;
  out.assignment = centralized_assignment(s, g, rule);

  EpisodeCore core(s, g, opts);
  core.discover_all();
  for (std::size_t i = 0; i < s.agents.size(); ++i) core.assign(i, out.assignment.task_of_agent[i]);
  const std::vector<std::optional<Vec2>> none;
  while (!core.all_completed() && !core.capped()) core.step(none);
  out.result = core.finish();
  return out;
}

}  // namespace fairtask
