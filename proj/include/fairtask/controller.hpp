#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "fairtask/pathfind.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

/// Per-agent waypoint plan, reused while the goal stays the same.
struct Navigator {
  std::optional<Vec2> goal;
  std::vector<Vec2> waypoints;
  std::size_t next = 0;
  double best_remaining = std::numeric_limits<double>::infinity();
  std::size_t stalled_steps = 0;
  bool unreachable = false;

  void reset() { *this = Navigator{}; }
};

struct ControllerParams {
  /// Steps without progress toward the goal before replanning.
  std::size_t stall_limit = 40;
  /// Fraction of the nominal deceleration assumed when braking; single-axis
  /// actions brake slower along diagonals.
  double braking_fraction = 0.5;
};

namespace detail {

inline double remaining_length(const Navigator& nav, Vec2 p) {
  if (nav.next >= nav.waypoints.size()) return nav.goal ? distance(p, *nav.goal) : 0.0;
  double total = distance(p, nav.waypoints[nav.next]);
  for (std::size_t k = nav.next + 1; k < nav.waypoints.size(); ++k)
    total += distance(nav.waypoints[k - 1], nav.waypoints[k]);
  return total;
}

inline void plan(Navigator& nav, const NavGrid& g, Vec2 from, Vec2 goal) {
  nav.goal = goal;
  nav.waypoints = path_waypoints_from_anywhere(g, from, goal);
  nav.next = 0;
  nav.stalled_steps = 0;
  nav.best_remaining = std::numeric_limits<double>::infinity();
  nav.unreachable = nav.waypoints.empty() && !(from == goal);
}

/// Action whose resulting velocity is closest to `desired`.
inline Action track_velocity(Vec2 v, Vec2 desired, const AgentSpec& spec) {
  const double q = acceleration_quantum(spec);
  Action best = Action::Idle;
  double best_err = std::numeric_limits<double>::infinity();
  for (Action a : kAllActions) {
    const double err = norm(clamp_speed(v + action_delta(a, q), spec.max_speed) - desired);
    if (err < best_err - 1e-15) {
      best_err = err;
      best = a;
    }
  }
  return best;
}

}  // namespace detail

/// Desired speed toward a point `dist` away that should be passed at
/// `exit_speed`, under the controller's braking model.
inline double braking_speed(double dist, double exit_speed, const AgentSpec& spec, double dt,
                            const ControllerParams& params = {}) {
  const double decel = params.braking_fraction * acceleration_quantum(spec) / dt;
  return std::min(spec.max_speed, std::sqrt(exit_speed * exit_speed + 2.0 * decel * dist));
}

/// Greedy waypoint follower. Steers toward the farthest visible waypoint,
/// slows for intermediate corners and stops at the goal. `terminal_speed`
/// lets exploration targets be passed without stopping.
inline Action scripted_goto(const WorldState& w, const Scenario& s, std::size_t agent, Vec2 goal,
                            const NavGrid& g, Navigator& nav, double terminal_speed = 0.0,
                            const ControllerParams& params = {}) {
  const auto& spec = s.agents[agent];
  const Vec2 p = w.agent_positions[agent];
  const Vec2 v = w.agent_velocities[agent];

  if (!nav.goal || !(*nav.goal == goal)) detail::plan(nav, g, p, goal);

  const double to_goal = distance(p, goal);
  if (to_goal <= kArrivalRadius && terminal_speed == 0.0) {
    // Hold position: steer back toward the center, gently.
    const Vec2 desired = to_goal > 0.0 ? (goal - p) * std::min(1.0, 0.5 / s.dt) : Vec2{};
    return detail::track_velocity(v, clamp_speed(desired, spec.max_speed), spec);
  }
  if (nav.unreachable) return detail::track_velocity(v, {}, spec);

  const double margin = waypoint_margin(g);
  while (nav.next + 1 < nav.waypoints.size() &&
         g.line_of_sight(p, nav.waypoints[nav.next + 1], margin)) {
    ++nav.next;
  }
  if (nav.next < nav.waypoints.size() && !g.line_of_sight(p, nav.waypoints[nav.next], 0.0)) {
    detail::plan(nav, g, p, goal);
    if (nav.unreachable) return detail::track_velocity(v, {}, spec);
  }

  const double remaining = detail::remaining_length(nav, p);
  if (remaining < nav.best_remaining - 1e-6) {
    nav.best_remaining = remaining;
    nav.stalled_steps = 0;
  } else if (++nav.stalled_steps > params.stall_limit) {
    detail::plan(nav, g, p, goal);
    if (nav.unreachable) return detail::track_velocity(v, {}, spec);
  }

  const Vec2 target = nav.next < nav.waypoints.size() ? nav.waypoints[nav.next] : goal;
  const bool final_leg = nav.next + 1 >= nav.waypoints.size();
  const double leg = distance(p, target);
  if (leg == 0.0) return detail::track_velocity(v, {}, spec);

  const double corner_speed = final_leg ? terminal_speed : spec.max_speed / 2.0;
  double speed = std::min(braking_speed(leg, corner_speed, spec, s.dt, params),
                          braking_speed(remaining, terminal_speed, spec, s.dt, params));
  if (terminal_speed == 0.0) speed = std::min(speed, remaining / (2.0 * s.dt));
  const Vec2 desired = (target - p) * (speed / leg);
  return detail::track_velocity(v, desired, spec);
}

/// Replans from scratch every call; convenient for one-off queries.
inline Action scripted_goto_policy(const WorldState& w, const Scenario& s, std::size_t agent,
                                   Vec2 goal, const NavGrid& g, bool* unreachable = nullptr) {
  Navigator nav;
  const Action a = scripted_goto(w, s, agent, goal, g, nav);
  if (unreachable) *unreachable = nav.unreachable;
  return a;
}

}  // namespace fairtask
