#include "fairtask/metrics.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "test_scenarios.hpp"

namespace fairtask {
namespace {

using fixtures::open_scenario;

EpisodeResult with_utilities(std::vector<double> u, std::vector<double> w) {
  EpisodeResult r;
  r.realized_utilities = std::move(u);
  r.weights = std::move(w);
  return r;
}

TEST(Rho, ElementwiseRatio) {
  EXPECT_EQ(rho(with_utilities({0.3, 0.7}, {0.3, 0.7})), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(rho(with_utilities({2, 1}, {4, 1})), (std::vector<double>{0.5, 1.0}));
  const auto base = rho(with_utilities({0.2, 0.9, 0.4}, {1.5, 0.5, 1.0}));
  const auto scaled = rho(with_utilities({0.6, 2.7, 1.2}, {1.5, 0.5, 1.0}));
  for (std::size_t j = 0; j < base.size(); ++j) EXPECT_NEAR(scaled[j], 3 * base[j], 1e-15);
}

TEST(Rho, RejectsNonPositiveWeight) {
  EXPECT_THROW(rho(with_utilities({1, 1}, {1, 0})), std::invalid_argument);
}

TEST(FairnessCV, ZeroVarianceGivesSentinel) {
  const std::vector<double> r{1, 1, 1};
  const auto f = fairness_cv(r);
  EXPECT_EQ(f.value, 1e9);
  EXPECT_TRUE(f.exact_equality);
}

TEST(FairnessCV, TwoPointStatistics) {
  const std::vector<double> r{1, 3};
  const auto f = fairness_cv(r);
  EXPECT_DOUBLE_EQ(f.value, 2.0);
  EXPECT_FALSE(f.exact_equality);
}

TEST(FairnessCV, PermutationAndScaleInvariant) {
  const std::vector<double> a{0.2, 0.9, 0.5, 0.4};
  const std::vector<double> b{0.5, 0.4, 0.9, 0.2};
  const std::vector<double> c{2.0, 9.0, 5.0, 4.0};
  EXPECT_DOUBLE_EQ(fairness_cv(a).value, fairness_cv(b).value);
  EXPECT_NEAR(fairness_cv(a).value, fairness_cv(c).value, 1e-12);
  const auto [mu, sd] = oracle::mean_std(a);
  EXPECT_NEAR(fairness_cv(a).value, mu / sd, 1e-12);
}

TEST(FairnessCV, RejectsSingleTask) {
  const std::vector<double> r{1};
  EXPECT_THROW(fairness_cv(r), std::invalid_argument);
}

TEST(Jain, KnownValues) {
  const std::vector<double> equal{0.4, 0.4, 0.4, 0.4};
  EXPECT_DOUBLE_EQ(jain(equal), 1.0);
  const std::vector<double> one{1, 0, 0};
  EXPECT_DOUBLE_EQ(jain(one), 1.0 / 3.0);
  const std::vector<double> two{1, 3};
  EXPECT_DOUBLE_EQ(jain(two), 0.8);
}

TEST(Jain, BoundsOnRandomInputs) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng.below(9);
    std::vector<double> r(m);
    for (auto& x : r) x = rng.uniform(0.0, 2.0);
    const double j = jain(r);
    EXPECT_GE(j, 1.0 / static_cast<double>(m) - 1e-12);
    EXPECT_LE(j, 1.0 + 1e-12);
  }
}

TEST(Jain, RejectsAllZero) {
  const std::vector<double> z{0, 0};
  EXPECT_THROW(jain(z), std::invalid_argument);
}

TEST(Fairness, MeasuresAgreeOrdinallyOnTwoPointDistributions) {
  const std::vector<double> a{1, 1}, b{1, 3}, c{1, 9};
  EXPECT_GE(fairness_cv(a).value, fairness_cv(b).value);
  EXPECT_GE(fairness_cv(b).value, fairness_cv(c).value);
  EXPECT_GE(jain(a), jain(b));
  EXPECT_GE(jain(b), jain(c));
}

TEST(CentralizedOptimum, SingleAgentClosedForm) {
  auto s = open_scenario({{0.5, 0.5}}, {{1.5, 0.5}});
  s.tasks[0].weight = 1.7;
  const auto g = build_nav_grid(s);
  const auto c = centralized_optimum(s, g);
  const double d = shortest_path_distance(g, {0.5, 0.5}, {1.5, 0.5});
  EXPECT_NEAR(c.u_star, 1.7 * std::log(std::pow(0.97, d) * 0.5), 1e-12);
}

TEST(CentralizedOptimum, EmptyMapNearEuclidean) {
  auto s = open_scenario({{0.3, 0.4}, {2.1, 0.7}, {1.2, 2.2}}, {{0.9, 1.9}, {1.8, 1.1}, {0.6, 0.9}});
  s.agents[1].preference_row = {0.9};
  s.agents[2].preference_row = {0.3};
  s.tasks[1].weight = 2.0;
  const auto g = build_nav_grid(s);
  const auto c = centralized_optimum(s, g);
  Matrix<double> u(3, 3), d(3, 3);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) {
      d(j, i) = distance(s.agents[i].start_position, s.tasks[j].position);
      u(j, i) = std::pow(0.97, d(j, i)) * s.preference(j, i);
    }
  const double euclid_star = oracle::brute_max_eg(u, s.weights());
  // Grid distances exceed Euclidean by at most ~8.3% plus snapping.
  double slack = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    slack += s.tasks[j].weight * -std::log(0.97) * (0.0824 * 3.0 + 0.1);
  EXPECT_LE(c.u_star, euclid_star + 1e-9);
  EXPECT_GE(c.u_star, euclid_star - slack);
}

TEST(RealizedValue, AgentOnTaskContributesLogPreference) {
  const auto v = realized_value(with_utilities({0.5}, {2.0}));
  EXPECT_DOUBLE_EQ(v.value, 2.0 * std::log(0.5));
  EXPECT_FALSE(v.neg_inf());
}

TEST(RealizedValue, EqualsOptimumWhenDistancesMatch) {
  auto s = open_scenario({{0.5, 0.5}, {2.0, 2.0}}, {{1.5, 0.5}, {0.5, 2.0}});
  s.agents[1].preference_row = {0.8};
  const auto g = build_nav_grid(s);
  const auto c = centralized_optimum(s, g);
  EpisodeResult r;
  r.weights = s.weights();
  r.agent_of_task = c.assignment.agent_of_task();
  r.realized_distances.resize(2);
  for (std::size_t j = 0; j < 2; ++j) r.realized_distances[j] = c.utilities.distances(j, r.agent_of_task[j]);
  r.realized_utilities = realized_utilities(s, r.agent_of_task, r.realized_distances);
  EXPECT_EQ(realized_value(r).value, c.u_star);
}

TEST(RealizedValue, LongerDetourLowersValue) {
  auto s = open_scenario({{0.5, 0.5}}, {{1.5, 0.5}});
  const std::vector<std::size_t> agent{0};
  EpisodeResult a = with_utilities(realized_utilities(s, agent, {1.0}), {1.0});
  EpisodeResult b = with_utilities(realized_utilities(s, agent, {1.3}), {1.0});
  EXPECT_LT(realized_value(b).value, realized_value(a).value);
}

TEST(RealizedValue, UnservedTaskIsNegInf) {
  const auto v = realized_value(with_utilities({0.5, 0.0}, {1.0, 1.0}));
  EXPECT_TRUE(v.neg_inf());
  EXPECT_EQ(v.unserved, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(std::isinf(v.value));
}

TEST(Regret, MeanOfGaps) {
  const std::vector<double> same{1.5, 1.5};
  EXPECT_EQ(regret(1.5, same), 0.0);
  const std::vector<double> realized{2.0, 0.0};
  EXPECT_EQ(regret(3.0, realized), 2.0);
  const std::vector<double> stars{1.0, 5.0};
  const std::vector<double> got{0.0, 2.0};
  EXPECT_EQ(regret(stars, got), 2.0);
}

TEST(Describe, SingleValueAndSample) {
  const std::vector<double> one{4.0};
  EXPECT_EQ(describe(one).mean, 4.0);
  EXPECT_EQ(describe(one).stddev, 0.0);
  const std::vector<double> xs{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(describe(xs).stddev, std::sqrt(5.0 / 3.0));
}

TEST(Spearman, MonotoneAndTies) {
  const std::vector<double> k{2, 3, 4, 5};
  const std::vector<double> down{9, 7, 7, 1};
  const std::vector<double> up{1, 2, 5, 9};
  EXPECT_DOUBLE_EQ(spearman(k, up), 1.0);
  // ranks of down: 4, 2.5, 2.5, 1
  const std::vector<double> rk{1, 2, 3, 4}, rd{4, 2.5, 2.5, 1};
  EXPECT_NEAR(spearman(k, down), pearson(rk, rd), 1e-15);
  EXPECT_LT(spearman(k, down), -0.9);
}

TEST(Bootstrap, ConstantSampleIsExact) {
  const std::vector<double> xs(50, 0.25);
  EXPECT_DOUBLE_EQ(bootstrap_mean_percentile(xs, 2.5, 1000, 1), 0.25);
}

TEST(Bootstrap, LowerPercentileBelowMean) {
  Rng rng(8);
  std::vector<double> xs(100);
  for (auto& x : xs) x = rng.uniform(-1.0, 2.0);
  const double lo = bootstrap_mean_percentile(xs, 2.5, 2000, 3);
  const double hi = bootstrap_mean_percentile(xs, 97.5, 2000, 3);
  const double mu = mean(xs);
  EXPECT_LT(lo, mu);
  EXPECT_GT(hi, mu);
  // Normal approximation for the 95% interval half-width.
  const double se = population_stddev(xs) / std::sqrt(100.0);
  EXPECT_NEAR(mu - lo, 1.96 * se, 0.5 * se);
}

}  // namespace
}  // namespace fairtask
