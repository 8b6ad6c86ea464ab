#include "fairtask/engine.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "fairtask/scenario_gen.hpp"
#include "oracles.hpp"
#include "test_scenarios.hpp"

namespace fairtask {
namespace {

using fixtures::open_scenario;

TEST(Rewards, Exploration) {
  const RewardConstants c;
  EXPECT_EQ(exploration_reward(0.0, true, c), c.eta0);
  EXPECT_EQ(exploration_reward(3.0, false, c), 0.0);
  EXPECT_NEAR(exploration_reward(1.0 / c.gamma_decay, true, c), c.eta0 / std::numbers::e, 1e-15);
  EXPECT_THROW(exploration_reward(-1.0, true, c), std::invalid_argument);
}

TEST(Rewards, FairnessShaping) {
  const RewardConstants c;
  const Vec2 goal{1.0, 1.0};
  EXPECT_EQ(fairness_shaping(&goal, goal, true, c).value, c.arrival_bonus);
  EXPECT_NEAR(fairness_shaping(&goal, {1.7, 1.0}, false, c).value, -0.7, 1e-15);
  EXPECT_EQ(fairness_shaping(&goal, goal, false, c).value, 0.0);
  const auto none = fairness_shaping(nullptr, goal, false, c);
  EXPECT_EQ(none.value, 0.0);
  EXPECT_TRUE(none.unassigned);
}

TEST(Rewards, ProgressTruncates) {
  RewardConstants c;
  EXPECT_DOUBLE_EQ(progress_reward(0.5, 0.1, 1.0, c), 0.05);
  EXPECT_DOUBLE_EQ(progress_reward(0.5, 0.1, 0.02, c), 0.02);
  c.kappa = 0.0;
  EXPECT_EQ(progress_reward(0.5, 0.1, 1.0, c), 0.0);
}

TEST(Rewards, CompletionAndCollision) {
  const RewardConstants c;
  EXPECT_EQ(completion_and_collision(1, 0, c), c.completion_bonus);
  EXPECT_EQ(completion_and_collision(0, 2, c), 2 * c.collision_penalty);
  EXPECT_EQ(completion_and_collision(0, 0, c), 0.0);
}

TEST(Rewards, ConstantsValidated) {
  RewardConstants c;
  EXPECT_NO_THROW(c.validate());
  c.collision_penalty = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.eta0 = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Controller, IdleAtGoal) {
  const auto s = open_scenario({{1.0, 1.0}}, {{2.0, 2.0}});
  const auto g = build_nav_grid(s);
  const auto w = initial_state(s);
  EXPECT_EQ(scripted_goto_policy(w, s, 0, {1.0, 1.0}, g), Action::Idle);
}

TEST(Controller, AcceleratesTowardDistantGoal) {
  const auto s = open_scenario({{0.5, 1.0}}, {{2.0, 2.0}});
  const auto g = build_nav_grid(s);
  const auto w = initial_state(s);
  EXPECT_EQ(scripted_goto_policy(w, s, 0, {2.0, 1.0}, g), Action::AccelPosX);
  EXPECT_EQ(scripted_goto_policy(w, s, 0, {0.5, 0.2}, g), Action::AccelNegY);
}

TEST(Controller, UnreachableGoalIdlesWithFlag) {
  auto s = open_scenario({{0.5, 0.5}}, {{0.5, 2.0}});
  s.walls.push_back({{0.0, 1.25}, {2.5, 1.25}});
  const auto g = build_nav_grid(s);
  bool unreachable = false;
  EXPECT_EQ(scripted_goto_policy(initial_state(s), s, 0, {0.5, 2.0}, g, &unreachable), Action::Idle);
  EXPECT_TRUE(unreachable);
}

// Drives one agent to `goal`; returns the travelled length or +inf.
double drive(const Scenario& s, const NavGrid& g, Vec2 goal, std::size_t cap = 2000) {
  WorldState w = initial_state(s);
  Navigator nav;
  for (std::size_t k = 0; k < cap; ++k) {
    if (distance(w.agent_positions[0], goal) <= kArrivalRadius) return w.cumulative_distance[0];
    const Action a = scripted_goto(w, s, 0, goal, g, nav);
    const std::vector<Action> joint{a};
    w = step_dynamics(w, joint, s).state;
  }
  return std::numeric_limits<double>::infinity();
}

TEST(Controller, PathOverheadOnOpenMapBelowBound) {
  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 a{rng.uniform(0.2, 2.3), rng.uniform(0.2, 2.3)};
    const Vec2 b{rng.uniform(0.2, 2.3), rng.uniform(0.2, 2.3)};
    if (distance(a, b) < 0.3) continue;
    auto s = open_scenario({a}, {b});
    s.dt = 0.05;
    const auto g = build_nav_grid(s);
    const double travelled = drive(s, g, b);
    const double shortest = shortest_path_distance(g, a, b);
    ASSERT_FALSE(std::isinf(travelled));
    worst = std::max(worst, travelled / shortest);
  }
  RecordProperty("worst_overhead_ratio", std::to_string(worst));
  EXPECT_LE(worst, 1.15);
}

TEST(Controller, ReachesGoalsAroundGeometry) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = generate_scenario({}, seed);
    const auto g = build_nav_grid(s);
    for (std::size_t j = 0; j < s.tasks.size(); ++j) {
      auto one = s;
      one.agents.resize(1);
      one.tasks = {s.tasks[j]};
      one.tasks[0].id = 0;
      EXPECT_FALSE(std::isinf(drive(one, g, s.tasks[j].position, 3000)))
          << "seed " << seed << " task " << j;
    }
  }
}

TEST(Centralized, SingleAgentClosedForm) {
  auto s = open_scenario({{0.5, 0.5}}, {{1.7, 0.5}});
  s.dt = 0.05;
  s.tasks[0].workload = 1.2;
  const auto e = run_centralized_episode(s, Rule::EG);
  const auto g = build_nav_grid(s);
  const double d_star = shortest_path_distance(g, {0.5, 0.5}, {1.7, 0.5});
  EXPECT_FALSE(e.result.incomplete);
  EXPECT_NEAR(e.result.total_distance, d_star, 0.1);
  const double service = std::ceil(1.2 / (0.5 * 0.05) - 1e-9) * 0.05;
  const double travel = e.result.completion_time - service;
  // Ramp-up and braking at 1/4 speed steps: bounded by d*/vmax + a few seconds.
  EXPECT_GT(travel, d_star / 1.0 - 0.1);
  EXPECT_LT(travel, d_star / 1.0 + 1.5);
}

TEST(Centralized, RuleRecordedAndFairnessComputed) {
  const auto s = generate_scenario({}, 3);
  const auto eg = run_centralized_episode(s, Rule::EG);
  const auto hu = run_centralized_episode(s, Rule::Hungarian);
  EXPECT_EQ(eg.assignment.rule, Rule::EG);
  EXPECT_EQ(hu.assignment.rule, Rule::Hungarian);
  EXPECT_FALSE(eg.result.incomplete);
  EXPECT_TRUE(std::isfinite(fairness_cv(rho(eg.result)).value));
}

TEST(Centralized, Deterministic) {
  const auto s = generate_scenario({}, 11);
  const auto a = run_centralized_episode(s, Rule::MinMax);
  const auto b = run_centralized_episode(s, Rule::MinMax);
  EXPECT_EQ(a.result, b.result);
}

TEST(Centralized, AccountingIdentities) {
  const auto s = generate_scenario({}, 4);
  PolicyTrace trace;
  EpisodeOptions opts;
  opts.trace = &trace;
  const auto e = run_centralized_episode(s, Rule::EG, opts);
  ASSERT_FALSE(e.result.incomplete);
  double sum = 0.0;
  for (double d : e.result.per_agent_distance) sum += d;
  EXPECT_NEAR(e.result.total_distance, sum, 1e-9);

  double last_completion = -1.0;
  std::size_t collisions = 0;
  for (const auto& st : trace.steps) {
    double joint = 0.0;
    for (const auto& r : st.rewards) joint += r.total();
    EXPECT_EQ(st.joint_reward, joint);
    if (!st.completed_tasks.empty()) last_completion = st.time;
    collisions += st.collisions.size();
  }
  EXPECT_EQ(e.result.completion_time, last_completion);
  EXPECT_EQ(e.result.collision_count, collisions);
  EXPECT_EQ(trace.steps.size(), e.result.steps);
}

TEST(Centralized, ArrivalBonusOncePerAgent) {
  const auto s = generate_scenario({}, 6);
  PolicyTrace trace;
  EpisodeOptions opts;
  opts.trace = &trace;
  run_centralized_episode(s, Rule::EG, opts);
  std::vector<int> arrivals(s.agents.size(), 0);
  for (const auto& st : trace.steps)
    for (auto a : st.arrived_agents) ++arrivals[a];
  for (int a : arrivals) EXPECT_LE(a, 1);
}

TEST(Centralized, TeleportGivesZeroRegret) {
  EpisodeOptions opts;
  opts.mode = ExecutionMode::Teleport;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = generate_scenario({}, seed);
    const auto e = run_centralized_episode(s, Rule::EG, opts);
    ASSERT_FALSE(e.result.incomplete);
    EXPECT_EQ(realized_value(e.result).value, e.u_star) << "seed " << seed;
  }
}

TEST(Centralized, MinMaxHasSmallestBottleneck) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = generate_scenario({}, seed);
    const auto g = build_nav_grid(s);
    std::vector<Vec2> starts;
    for (const auto& a : s.agents) starts.push_back(a.start_position);
    const auto d = task_agent_distances(g, s, starts);
    auto bottleneck = [&](const Assignment& a) {
      double worst = 0.0;
      for (std::size_t i = 0; i < a.task_of_agent.size(); ++i)
        worst = std::max(worst, d(a.task_of_agent[i], i));
      return worst;
    };
    const double mm = bottleneck(centralized_assignment(s, g, Rule::MinMax));
    EXPECT_LE(mm, bottleneck(centralized_assignment(s, g, Rule::EG)));
    EXPECT_LE(mm, bottleneck(centralized_assignment(s, g, Rule::Hungarian)));
    EXPECT_EQ(mm, oracle::brute_min_bottleneck(d));
  }
}

}  // namespace
}  // namespace fairtask
