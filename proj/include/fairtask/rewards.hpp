#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fairtask/geometry.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

struct RewardConstants {
  double eta0 = 1.0;
  double gamma_decay = 0.1;
  double kappa = 1.0;
  double arrival_bonus = 5.0;
  double completion_bonus = 10.0;
  double collision_penalty = -5.0;

  void validate() const {
    if (!(eta0 >= 0.0 && kappa >= 0.0 && arrival_bonus >= 0.0 && completion_bonus >= 0.0)) {
      throw std::invalid_argument("reward constants: eta0, kappa and bonuses must be >= 0");
    }
    if (!(gamma_decay >= 0.0)) throw std::invalid_argument("reward constants: gamma_decay must be >= 0");
    if (!(collision_penalty <= 0.0)) {
      throw std::invalid_argument("reward constants: collision_penalty must be <= 0");
    }
  }
};

inline double exploration_reward(double t, bool discovered_new, const RewardConstants& c) {
  if (t < 0.0) throw std::invalid_argument("exploration_reward: negative time");
  return discovered_new ? c.eta0 * std::exp(-c.gamma_decay * t) : 0.0;
}

struct ShapingReward {
  double value = 0.0;
  bool unassigned = false;
};

/// Distance penalty to the assigned goal plus the one-time arrival bonus.
inline ShapingReward fairness_shaping(const Vec2* goal, Vec2 agent_pos, bool arrived_now,
                                      const RewardConstants& c) {
  if (!goal) return {0.0, true};
  return {-distance(agent_pos, *goal) + (arrived_now ? c.arrival_bonus : 0.0), false};
}

/// kappa * pref * dt, truncated to what was actually left on the last tick.
inline double progress_reward(double pref, double dt, double remaining, const RewardConstants& c) {
  return c.kappa * std::min(pref * dt, remaining);
}

inline double completion_and_collision(std::size_t completions, std::size_t collisions,
                                       const RewardConstants& c) {
  return static_cast<double>(completions) * c.completion_bonus +
         static_cast<double>(collisions) * c.collision_penalty;
}

struct RewardBreakdown {
  double exploration = 0.0;
  double shaping = 0.0;
  double progress = 0.0;
  double completion = 0.0;
  double collision = 0.0;

  double total() const noexcept { return exploration + shaping + progress + completion + collision; }
  bool operator==(const RewardBreakdown&) const = default;
};

struct TraceStep {
  double time = 0.0;
  std::vector<Action> joint_action;
  std::vector<RewardBreakdown> rewards;
  double joint_reward = 0.0;
  std::vector<CollisionEvent> collisions;
  std::vector<std::size_t> completed_tasks;
  std::vector<std::size_t> arrived_agents;
  std::vector<std::pair<std::size_t, std::size_t>> discoveries;  // (task, agent)
};

struct PolicyTrace {
  std::vector<TraceStep> steps;
};

}  // namespace fairtask
