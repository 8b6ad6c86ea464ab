#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "fairtask/assign.hpp"
#include "fairtask/pathfind.hpp"
#include "fairtask/rng.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

struct AssignmentRecord {
  double time = 0.0;
  std::size_t agent = 0;
  std::size_t task = 0;

  bool operator==(const AssignmentRecord&) const = default;
};

struct EpisodeResult {
  std::vector<double> realized_utilities;
  std::vector<double> weights;
  double completion_time = 0.0;
  double total_distance = 0.0;
  std::vector<double> per_agent_distance;
  std::size_t collision_count = 0;
  /// NaN for tasks never discovered.
  std::vector<double> discovery_times;
  std::vector<AssignmentRecord> assignment_log;
  bool incomplete = false;

  /// Path length of the serving agent from assignment to first arrival,
  /// per task. +inf when the agent never arrived.
  std::vector<double> realized_distances;
  /// Agent finally assigned to each task (npos when unassigned).
  std::vector<std::size_t> agent_of_task;
  std::size_t steps = 0;

  bool operator==(const EpisodeResult&) const = default;
};

inline constexpr std::size_t kNoAgent = std::numeric_limits<std::size_t>::max();

/// Realized utility alpha^d * pref of each task from its serving agent's
/// realized distance; 0 for unassigned or never-reached tasks.
inline std::vector<double> realized_utilities(const Scenario& s,
                                              const std::vector<std::size_t>& agent_of_task,
                                              const std::vector<double>& realized_distances) {
  std::vector<double> u(s.tasks.size(), 0.0);
  for (std::size_t j = 0; j < s.tasks.size(); ++j) {
    if (agent_of_task[j] == kNoAgent) continue;
    u[j] = utility_value(s.alpha, realized_distances[j], s.preference(j, agent_of_task[j]));
  }
  return u;
}

inline std::vector<double> rho(const EpisodeResult& r) {
  if (r.realized_utilities.size() != r.weights.size()) {
    throw std::invalid_argument("rho: one weight per task required");
  }
  std::vector<double> out(r.weights.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (!(r.weights[j] > 0.0)) throw std::invalid_argument("rho: weights must be > 0");
    out[j] = r.realized_utilities[j] / r.weights[j];
  }
  return out;
}

inline constexpr double kEqualitySentinel = 1e9;

struct Fairness {
  double value = 0.0;
  /// Set when sigma == 0 and `value` is the sentinel.
  bool exact_equality = false;
};

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double population_stddev(std::span<const double> xs) {
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

/// Reciprocal coefficient of variation mu / sigma (population sigma).
inline Fairness fairness_cv(std::span<const double> rho) {
  if (rho.size() < 2) throw std::invalid_argument("fairness_cv: needs at least two tasks");
  const double sigma = population_stddev(rho);
  if (sigma == 0.0) return {kEqualitySentinel, true};
  return {mean(rho) / sigma, false};
}

inline double jain(std::span<const double> rho) {
  if (rho.empty()) throw std::invalid_argument("jain: empty input");
  double sum = 0.0, sq = 0.0;
  for (double r : rho) {
    sum += r;
    sq += r * r;
  }
  if (sq == 0.0) throw std::invalid_argument("jain: all-zero input");
  return sum * sum / (static_cast<double>(rho.size()) * sq);
}

struct CentralizedOptimum {
  double u_star = 0.0;
  Assignment assignment;
  UtilityMatrix utilities;
};

/// EG optimum over shortest-path distances from the given agent positions.
inline CentralizedOptimum centralized_optimum(const Scenario& s, const NavGrid& g,
                                              const std::vector<Vec2>& agent_positions) {
  const auto d = task_agent_distances(g, s, agent_positions);
  CentralizedOptimum c;
  c.utilities = compute_utility(d, s.preference_matrix(), s.alpha);
  const auto w = s.weights();
  c.assignment = solve_eg(c.utilities, w);
  c.u_star = c.assignment.objective;
  return c;
}

inline CentralizedOptimum centralized_optimum(const Scenario& s, const NavGrid& g) {
  std::vector<Vec2> starts;
  for (const auto& a : s.agents) starts.push_back(a.start_position);
  return centralized_optimum(s, g, starts);
}

struct RealizedValue {
  double value = 0.0;
  /// Tasks with zero realized utility (unserved); value is then -inf.
  std::vector<std::size_t> unserved;
  bool neg_inf() const noexcept { return !unserved.empty(); }
};

inline RealizedValue realized_value(const EpisodeResult& r) {
  RealizedValue v;
  for (std::size_t j = 0; j < r.realized_utilities.size(); ++j) {
    if (r.realized_utilities[j] <= 0.0) {
      v.unserved.push_back(j);
      continue;
    }
    v.value += r.weights[j] * std::log(r.realized_utilities[j]);
  }
  if (v.neg_inf()) v.value = -std::numeric_limits<double>::infinity();
  return v;
}

/// Mean gap between a common optimum and a sample of realized values.
inline double regret(double u_star, std::span<const double> realized) {
  if (realized.empty()) throw std::invalid_argument("regret: empty sample");
  double total = 0.0;
  for (double v : realized) total += u_star - v;
  return total / static_cast<double>(realized.size());
}

/// Mean of per-episode gaps, each episode carrying its own optimum.
inline double regret(std::span<const double> u_star, std::span<const double> realized) {
  if (u_star.size() != realized.size() || realized.empty()) {
    throw std::invalid_argument("regret: paired non-empty samples required");
  }
  double total = 0.0;
  for (std::size_t e = 0; e < realized.size(); ++e) total += u_star[e] - realized[e];
  return total / static_cast<double>(realized.size());
}

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t count = 0;
};

inline Stat describe(std::span<const double> xs) {
  Stat s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.mean = mean(xs);
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

/// Lower percentile of the bootstrap distribution of the mean.
inline double bootstrap_mean_percentile(std::span<const double> xs, double percentile,
                                        std::size_t resamples, std::uint64_t seed) {
  if (xs.empty() || resamples == 0) throw std::invalid_argument("bootstrap: empty input");
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double total = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) total += xs[rng.below(xs.size())];
    m = total / static_cast<double>(xs.size());
  }
  std::sort(means.begin(), means.end());
  const auto idx = static_cast<std::size_t>(
      std::floor(percentile / 100.0 * static_cast<double>(resamples - 1)));
  return means[std::min(idx, resamples - 1)];
}

/// Ranks with ties averaged, 1-based.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi + 1 < order.size() && xs[order[hi + 1]] == xs[order[lo]]) ++hi;
    const double r = (static_cast<double>(lo + hi) / 2.0) + 1.0;
    for (std::size_t k = lo; k <= hi; ++k) ranks[order[k]] = r;
    lo = hi + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: size mismatch");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x), ry = average_ranks(y);
  return pearson(rx, ry);
}

}  // namespace fairtask
