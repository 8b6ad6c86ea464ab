#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairtask/matrix.hpp"

namespace fairtask {

/// Smoothing constant inside log(u + epsilon) of the score matrix.
inline constexpr double kScoreEpsilon = 1e-12;

enum class Rule { EG, Hungarian, MinMax };

inline std::string to_string(Rule r) {
  switch (r) {
    case Rule::EG: return "eg";
    case Rule::Hungarian: return "hungarian";
    case Rule::MinMax: return "minmax";
  }
  return "unknown";
}

/// Distance-discounted utilities u(j, i) = alpha^d(j, i) * pref(j, i),
/// kept together with the inputs that produced them.
struct UtilityMatrix {
  Matrix<double> values;
  double alpha = 0.0;
  Matrix<double> distances;
  Matrix<double> preferences;

  std::size_t tasks() const noexcept { return values.rows(); }
  std::size_t agents() const noexcept { return values.cols(); }
};

struct ScoreMatrix {
  Matrix<double> scores;
  double epsilon = kScoreEpsilon;
};

/// One-to-one allocation. `task_of_agent[i]` is the task served by agent i.
struct Assignment {
  std::vector<std::size_t> task_of_agent;
  double objective = 0.0;
  Rule rule = Rule::EG;
  /// Tasks whose selected utility is zero; the EG objective is then -inf.
  std::vector<std::size_t> zero_utility_tasks;

  std::vector<std::size_t> agent_of_task() const {
    std::vector<std::size_t> inv(task_of_agent.size());
    for (std::size_t i = 0; i < task_of_agent.size(); ++i) inv[task_of_agent[i]] = i;
    return inv;
  }
  bool objective_is_neg_inf() const noexcept { return !zero_utility_tasks.empty(); }
};

/// Single utility entry. Infinite distance (disconnected pair) yields 0.
inline double utility_value(double alpha, double distance, double preference) {
  if (std::isinf(distance)) return 0.0;
  return std::pow(alpha, distance) * preference;
}

inline UtilityMatrix compute_utility(const Matrix<double>& distances,
                                     const Matrix<double>& preferences, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("compute_utility: alpha must lie in (0,1)");
  }
  if (distances.rows() != preferences.rows() || distances.cols() != preferences.cols()) {
    throw std::invalid_argument("compute_utility: shape mismatch");
  }
  UtilityMatrix u{Matrix<double>(distances.rows(), distances.cols()), alpha, distances,
                  preferences};
  for (std::size_t j = 0; j < distances.rows(); ++j) {
    for (std::size_t i = 0; i < distances.cols(); ++i) {
      const double d = distances(j, i);
      const double p = preferences(j, i);
      if (d < 0.0 || p < 0.0 || std::isnan(d) || std::isnan(p)) {
        throw std::invalid_argument("compute_utility: negative or NaN input");
      }
      u.values(j, i) = utility_value(alpha, d, p);
    }
  }
  return u;
}

inline ScoreMatrix eg_score_matrix(const UtilityMatrix& u, std::span<const double> weights,
                                   double epsilon = kScoreEpsilon) {
  if (weights.size() != u.tasks()) {
    throw std::invalid_argument("eg_score_matrix: one weight per task required");
  }
  ScoreMatrix s{Matrix<double>(u.tasks(), u.agents()), epsilon};
  for (std::size_t j = 0; j < u.tasks(); ++j) {
    if (!(weights[j] > 0.0)) throw std::invalid_argument("eg_score_matrix: weights must be > 0");
    for (std::size_t i = 0; i < u.agents(); ++i) {
      s.scores(j, i) = weights[j] * std::log(u.values(j, i) + epsilon);
    }
  }
  return s;
}

namespace detail {

// Shortest augmenting path Kuhn-Munkres on a square cost matrix (minimization).
// Returns the column assigned to each row.
inline std::vector<std::size_t> hungarian_min(const Matrix<double>& cost) {
  const std::size_t n = cost.rows();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    p[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

inline void require_square_finite(const Matrix<double>& m, const char* who) {
  if (!m.square()) {
    throw std::invalid_argument(std::string(who) + ": one-to-one assignment needs a square matrix");
  }
  for (double x : m.data()) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(who) + ": non-finite entry");
  }
}

// Kuhn's augmenting-path matching over edges cost(j, i) <= threshold.
inline bool has_perfect_matching(const Matrix<double>& cost, double threshold) {
  const std::size_t n = cost.rows();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> row_of_col(n, none);
  std::vector<char> seen(n);
  auto augment = [&](auto&& self, std::size_t row) -> bool {
    for (std::size_t c = 0; c < n; ++c) {
      if (cost(row, c) > threshold || seen[c]) continue;
      seen[c] = 1;
      if (row_of_col[c] == none || self(self, row_of_col[c])) {
        row_of_col[c] = row;
        return true;
      }
    }
    return false;
  };
  for (std::size_t r = 0; r < n; ++r) {
    std::fill(seen.begin(), seen.end(), 0);
    if (!augment(augment, r)) return false;
  }
  return true;
}

}  // namespace detail

/// Permutation maximizing sum_j scores(j, agent_of_task(j)).
/// Rows are tasks, columns agents.
inline Assignment solve_hungarian_max(const Matrix<double>& scores) {
  detail::require_square_finite(scores, "solve_hungarian_max");
  const std::size_t n = scores.rows();
  Matrix<double> cost(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) cost(j, i) = -scores(j, i);

  const auto agent_of_task = detail::hungarian_min(cost);
  Assignment a;
  a.rule = Rule::Hungarian;
  a.task_of_agent.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    a.task_of_agent[agent_of_task[j]] = j;
    a.objective += scores(j, agent_of_task[j]);
  }
  return a;
}

/// Weighted log objective sum_j w_j log(u(j, agent_of_task(j))), without
/// smoothing. Any zero selected utility makes the value -inf and is listed
/// in `zero_tasks` when provided.
inline double eg_objective(std::span<const std::size_t> task_of_agent, const UtilityMatrix& u,
                           std::span<const double> weights,
                           std::vector<std::size_t>* zero_tasks = nullptr) {
  if (task_of_agent.size() != u.agents() || weights.size() != u.tasks() ||
      u.agents() != u.tasks()) {
    throw std::invalid_argument("eg_objective: shape mismatch");
  }
  std::vector<std::size_t> agent_of_task(u.tasks(), u.agents());
  for (std::size_t i = 0; i < task_of_agent.size(); ++i) {
    if (task_of_agent[i] >= u.tasks() || agent_of_task[task_of_agent[i]] != u.agents()) {
      throw std::invalid_argument("eg_objective: not a one-to-one assignment");
    }
    agent_of_task[task_of_agent[i]] = i;
  }
  double total = 0.0;
  bool neg_inf = false;
  for (std::size_t j = 0; j < u.tasks(); ++j) {
    const double value = u.values(j, agent_of_task[j]);
    if (value <= 0.0) {
      neg_inf = true;
      if (zero_tasks) zero_tasks->push_back(j);
      continue;
    }
    total += weights[j] * std::log(value);
  }
  return neg_inf ? -std::numeric_limits<double>::infinity() : total;
}

inline double eg_objective(const Assignment& a, const UtilityMatrix& u,
                           std::span<const double> weights) {
  return eg_objective(a.task_of_agent, u, weights);
}

/// One-to-one Eisenberg-Gale allocation, solved as a linear assignment over
/// the score matrix w_j log(u + eps).
inline Assignment solve_eg(const UtilityMatrix& u, std::span<const double> weights) {
  if (!u.values.square()) {
    throw std::invalid_argument("solve_eg: one-to-one assignment needs m == n");
  }
  const ScoreMatrix s = eg_score_matrix(u, weights);
  Assignment a = solve_hungarian_max(s.scores);
  a.rule = Rule::EG;
  a.zero_utility_tasks.clear();
  a.objective = eg_objective(a.task_of_agent, u, weights, &a.zero_utility_tasks);
  return a;
}

/// Bottleneck assignment: minimizes the largest selected cost, then total
/// cost among bottleneck-optimal permutations. Objective is the bottleneck.
inline Assignment solve_minmax(const Matrix<double>& costs) {
  detail::require_square_finite(costs, "solve_minmax");
  for (double c : costs.data()) {
    if (c < 0.0) throw std::invalid_argument("solve_minmax: costs must be >= 0");
  }
  const std::size_t n = costs.rows();
  Assignment a;
  a.rule = Rule::MinMax;
  if (n == 0) return a;

  std::vector<double> levels = costs.data();
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (detail::has_perfect_matching(costs, levels[mid])) hi = mid; else lo = mid + 1;
  }
  const double bottleneck = levels[lo];

  // Edges above the bottleneck get a penalty larger than any feasible total.
  const double penalty = (static_cast<double>(n) + 1.0) * (levels.back() + 1.0);
  Matrix<double> restricted(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      restricted(j, i) = costs(j, i) <= bottleneck ? costs(j, i) : costs(j, i) + penalty;

  const auto agent_of_task = detail::hungarian_min(restricted);
  a.task_of_agent.resize(n);
  for (std::size_t j = 0; j < n; ++j) a.task_of_agent[agent_of_task[j]] = j;
  a.objective = bottleneck;
  return a;
}

/// Realized utility of each task under `a`.
inline std::vector<double> task_utilities(const Assignment& a, const UtilityMatrix& u) {
  std::vector<double> out(u.tasks(), 0.0);
  for (std::size_t i = 0; i < a.task_of_agent.size(); ++i) {
    out[a.task_of_agent[i]] = u.values(a.task_of_agent[i], i);
  }
  return out;
}

/// True iff every task is at least as well off under `a` as under `b`, and
/// at least one is strictly better.
inline bool pareto_dominates(const Assignment& a, const Assignment& b, const UtilityMatrix& u) {
  const auto ua = task_utilities(a, u);
  const auto ub = task_utilities(b, u);
  bool strict = false;
  for (std::size_t j = 0; j < ua.size(); ++j) {
    if (ua[j] < ub[j]) return false;
    if (ua[j] > ub[j]) strict = true;
  }
  return strict;
}

}  // namespace fairtask
