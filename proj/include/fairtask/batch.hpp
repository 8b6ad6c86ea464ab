#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fairtask/engine.hpp"
#include "fairtask/metrics.hpp"
#include "fairtask/online.hpp"
#include "fairtask/rng.hpp"
#include "fairtask/scenario_gen.hpp"

namespace fairtask {

enum class Algorithm { EG, Hungarian, MinMax, Online };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::EG: return "eg";
    case Algorithm::Hungarian: return "hungarian";
    case Algorithm::MinMax: return "minmax";
    case Algorithm::Online: return "online";
  }
  return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::EG, Algorithm::Hungarian, Algorithm::MinMax, Algorithm::Online})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

struct BatchConfig {
  /// Fixed scenario for every episode; otherwise one is generated per episode.
  std::optional<Scenario> scenario;
  GeneratorParams generator{};
  Algorithm algorithm = Algorithm::EG;
  std::size_t k = 0;  // online only
  std::size_t episodes = 100;
  std::uint64_t root_seed = 0;
  EpisodeOptions episode{};
  double explore_speed = 0.5;
  unsigned parallel = 1;
};

struct EpisodeRow {
  std::size_t episode = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::EG;
  std::size_t k = 0;
  double T = 0.0;
  double D = 0.0;
  double F_rho = 0.0;
  bool F_exact_equality = false;
  double jain = 0.0;
  double U_star = 0.0;
  double U_pi = 0.0;
  double regret = 0.0;
  std::size_t collisions = 0;
  bool incomplete = false;
  EpisodeResult result;
  /// Online runs: every assignment phase.
  std::vector<PhaseRecord> phases;
};

struct BatchSummary {
  std::size_t episodes = 0;
  std::size_t incomplete = 0;
  Stat T, D, F_rho, jain, regret;
};

struct BatchOutput {
  std::vector<EpisodeRow> rows;
  BatchSummary summary;
};

inline Scenario episode_scenario(const BatchConfig& c, std::uint64_t episode_seed) {
  if (c.scenario) return *c.scenario;
  return generate_scenario(c.generator, episode_seed);
}

inline EpisodeRow run_episode(const BatchConfig& c, std::size_t index) {
  EpisodeRow row;
  row.episode = index;
  row.seed = derive_seed(c.root_seed, index);
  row.algorithm = c.algorithm;
  row.k = c.algorithm == Algorithm::Online ? c.k : 0;
  const Scenario s = episode_scenario(c, row.seed);

  switch (c.algorithm) {
    case Algorithm::EG:
    case Algorithm::Hungarian:
    case Algorithm::MinMax: {
      const Rule rule = c.algorithm == Algorithm::EG        ? Rule::EG
                        : c.algorithm == Algorithm::MinMax ? Rule::MinMax
                                                           : Rule::Hungarian;
      auto e = run_centralized_episode(s, rule, c.episode);
      row.result = std::move(e.result);
      row.U_star = e.u_star;
      break;
    }
    case Algorithm::Online: {
      Rng rng(derive_seed(row.seed, 1));
      OnlineOptions opts;
      opts.episode = c.episode;
      opts.explore_speed = c.explore_speed;
      auto e = run_online_episode(s, c.k, rng, opts);
      row.result = std::move(e.result);
      row.U_star = e.u_star;
      row.phases = std::move(e.phases);
      break;
    }
  }

  const auto& r = row.result;
  row.T = r.completion_time;
  row.D = r.total_distance;
  row.collisions = r.collision_count;
  row.incomplete = r.incomplete;
  const auto p = rho(r);
  const bool any_served = std::any_of(p.begin(), p.end(), [](double v) { return v > 0.0; });
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (p.size() >= 2) {
    const auto f = fairness_cv(p);
    row.F_rho = f.value;
    row.F_exact_equality = f.exact_equality;
  } else {
    row.F_rho = nan;
  }
  row.jain = any_served ? jain(p) : nan;
  row.U_pi = realized_value(r).value;
  row.regret = row.U_star - row.U_pi;
  return row;
}

inline BatchSummary summarize(const std::vector<EpisodeRow>& rows) {
  BatchSummary s;
  s.episodes = rows.size();
  std::vector<double> T, D, F, J, R;
  for (const auto& r : rows) {
    if (r.incomplete) ++s.incomplete;
    T.push_back(r.T);
    D.push_back(r.D);
    if (std::isfinite(r.F_rho)) F.push_back(r.F_rho);
    if (std::isfinite(r.jain)) J.push_back(r.jain);
    // A capped episode has no defined realized value.
    if (!r.incomplete && std::isfinite(r.regret)) R.push_back(r.regret);
  }
  s.T = describe(T);
  s.D = describe(D);
  s.F_rho = describe(F);
  s.jain = describe(J);
  s.regret = describe(R);
  return s;
}

inline void validate(const BatchConfig& c) {
  if (c.episodes == 0) throw std::invalid_argument("episodes must be >= 1");
  const std::size_t n = c.scenario ? c.scenario->agents.size() : c.generator.num_agents;
  if (c.algorithm == Algorithm::Online) {
    if (c.k < 1 || c.k > n) throw std::invalid_argument("k must lie in [1, N]");
  } else if (c.k != 0) {
    throw std::invalid_argument("k applies to the online algorithm only");
  }
  if (c.scenario) fairtask::validate(*c.scenario); else c.generator.validate();
  c.episode.rewards.validate();
}

/// Runs every episode (optionally on several threads); rows come back in
/// episode order whatever the schedule.
inline BatchOutput batch_run(const BatchConfig& c) {
  validate(c);
  BatchOutput out;
  out.rows.resize(c.episodes);
  const unsigned workers = std::max(1u, std::min<unsigned>(c.parallel, static_cast<unsigned>(c.episodes)));
  if (workers == 1) {
    for (std::size_t e = 0; e < c.episodes; ++e) out.rows[e] = run_episode(c, e);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t e = next++; e < c.episodes; e = next++) {
          try {
            out.rows[e] = run_episode(c, e);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  out.summary = summarize(out.rows);
  return out;
}

}  // namespace fairtask
