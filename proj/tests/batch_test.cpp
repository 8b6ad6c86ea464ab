#include "fairtask/batch.hpp"

#include <gtest/gtest.h>

#include "fairtask/scenario_io.hpp"

namespace fairtask {
namespace {

BatchConfig small(Algorithm a, std::size_t episodes, std::uint64_t seed) {
  BatchConfig c;
  c.generator.num_agents = 4;
  c.algorithm = a;
  c.k = a == Algorithm::Online ? 2 : 0;
  c.episodes = episodes;
  c.root_seed = seed;
  return c;
}

TEST(Batch, SingleEpisodeAggregatesEqualRow) {
  const auto out = batch_run(small(Algorithm::EG, 1, 9));
  ASSERT_EQ(out.rows.size(), 1u);
  const auto& r = out.rows[0];
  EXPECT_EQ(out.summary.T.mean, r.T);
  EXPECT_EQ(out.summary.D.mean, r.D);
  EXPECT_EQ(out.summary.F_rho.mean, r.F_rho);
  EXPECT_EQ(out.summary.jain.mean, r.jain);
  EXPECT_EQ(out.summary.regret.mean, r.regret);
  EXPECT_EQ(out.summary.T.stddev, 0.0);
}

TEST(Batch, ReproducibleAndSeedSensitive) {
  const auto a = batch_run(small(Algorithm::Online, 4, 1));
  const auto b = batch_run(small(Algorithm::Online, 4, 1));
  const auto c = batch_run(small(Algorithm::Online, 4, 2));
  for (std::size_t e = 0; e < 4; ++e) {
    EXPECT_EQ(a.rows[e].result, b.rows[e].result);
    EXPECT_NE(a.rows[e].seed, c.rows[e].seed);
  }
  EXPECT_NE(a.summary.T.mean, c.summary.T.mean);
}

TEST(Batch, EpisodeReproducibleInIsolation) {
  const auto c = small(Algorithm::Online, 5, 3);
  const auto all = batch_run(c);
  const auto alone = run_episode(c, 3);
  EXPECT_EQ(alone.result, all.rows[3].result);
  EXPECT_EQ(alone.seed, derive_seed(3, 3));
}

TEST(Batch, ParallelMatchesSerial) {
  auto c = small(Algorithm::Online, 8, 4);
  const auto serial = batch_run(c);
  c.parallel = 4;
  const auto parallel = batch_run(c);
  for (std::size_t e = 0; e < 8; ++e) {
    EXPECT_EQ(serial.rows[e].episode, parallel.rows[e].episode);
    EXPECT_EQ(serial.rows[e].result, parallel.rows[e].result);
  }
  EXPECT_EQ(serial.summary.T.mean, parallel.summary.T.mean);
}

TEST(Batch, IncompleteCountedAndExcludedFromRegret) {
  auto c = small(Algorithm::EG, 3, 5);
  c.episode.step_cap = 3;
  const auto out = batch_run(c);
  EXPECT_EQ(out.summary.incomplete, 3u);
  EXPECT_EQ(out.summary.regret.count, 0u);
  EXPECT_EQ(out.summary.T.count, 3u);
}

TEST(Batch, ConfigValidation) {
  auto c = small(Algorithm::Online, 1, 1);
  c.k = 0;
  EXPECT_THROW(batch_run(c), std::invalid_argument);
  c.k = 5;
  EXPECT_THROW(batch_run(c), std::invalid_argument);
  c = small(Algorithm::EG, 1, 1);
  c.k = 2;
  EXPECT_THROW(batch_run(c), std::invalid_argument);
  c = small(Algorithm::EG, 0, 1);
  EXPECT_THROW(batch_run(c), std::invalid_argument);
}

TEST(Batch, SingleTaskSweepRowsIdentical) {
  BatchConfig c;
  c.generator.num_agents = 1;
  c.algorithm = Algorithm::Online;
  c.k = 1;
  c.episodes = 3;
  const auto a = batch_run(c);
  const auto b = batch_run(c);
  EXPECT_EQ(a.summary.T.mean, b.summary.T.mean);
  EXPECT_EQ(a.summary.regret.mean, b.summary.regret.mean);
}

TEST(Generator, DefaultMapSizes) {
  EXPECT_EQ(default_map_size(3), 2.5);
  EXPECT_DOUBLE_EQ(default_map_size(7), 2.7);
  EXPECT_DOUBLE_EQ(default_map_size(10), 2.9);
}

TEST(Generator, ScenariosAreValidAndSeparated) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GeneratorParams p;
    p.num_agents = 10;
    const auto s = generate_scenario(p, seed);
    EXPECT_NO_THROW(validate(s));
    EXPECT_NO_THROW(build_nav_grid(s));
    EXPECT_DOUBLE_EQ(s.workspace_size, 2.9);
    std::vector<Vec2> pts;
    for (const auto& a : s.agents) pts.push_back(a.start_position);
    for (const auto& t : s.tasks) pts.push_back(t.position);
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) EXPECT_GE(distance(pts[a], pts[b]), 0.1);
    for (const auto& t : s.tasks) {
      EXPECT_GE(t.workload, p.workload_min);
      EXPECT_LT(t.workload, p.workload_max);
      EXPECT_GE(t.weight, p.weight_min);
      EXPECT_LT(t.weight, p.weight_max);
    }
    for (const auto& w : s.walls) {
      const Vec2 d = w.b - w.a;
      const double angle = std::fmod(std::atan2(d.y, d.x) * 180.0 / std::numbers::pi + 180.0, 180.0);
      const double snapped = std::round(angle / 45.0) * 45.0;
      EXPECT_NEAR(angle, snapped, 1e-9);
    }
  }
}

TEST(Generator, SameSeedSameScenario) {
  const auto a = generate_scenario({}, 77);
  const auto b = generate_scenario({}, 77);
  EXPECT_EQ(scenario_to_json(a), scenario_to_json(b));
  EXPECT_NE(scenario_to_json(a), scenario_to_json(generate_scenario({}, 78)));
}

TEST(ScenarioIO, RoundTrip) {
  const auto s = generate_scenario({}, 12);
  const auto back = scenario_from_json(scenario_to_json(s));
  EXPECT_EQ(scenario_to_json(back), scenario_to_json(s));
  EXPECT_EQ(run_centralized_episode(back, Rule::EG).result, run_centralized_episode(s, Rule::EG).result);
}

TEST(ScenarioIO, RejectsBadDocuments) {
  auto j = scenario_to_json(generate_scenario({}, 1));
  auto missing = j;
  missing.erase("version");
  EXPECT_THROW(scenario_from_json(missing), FormatError);
  auto future = j;
  future["version"] = 99;
  EXPECT_THROW(scenario_from_json(future), FormatError);
  auto bad_point = j;
  bad_point["agents"][0]["position"] = {1.0};
  EXPECT_THROW(scenario_from_json(bad_point), FormatError);
  auto invalid = j;
  invalid["alpha"] = 1.5;
  EXPECT_THROW(scenario_from_json(invalid), std::invalid_argument);
}

TEST(RewardConstantsIO, PartialOverrideAndValidation) {
  const auto c = reward_constants_from_json({{"kappa", 2.0}});
  EXPECT_EQ(c.kappa, 2.0);
  EXPECT_EQ(c.eta0, RewardConstants{}.eta0);
  EXPECT_THROW(reward_constants_from_json({{"bogus", 1.0}}), FormatError);
  EXPECT_THROW(reward_constants_from_json({{"collision_penalty", 3.0}}), std::invalid_argument);
}

}  // namespace
}  // namespace fairtask
