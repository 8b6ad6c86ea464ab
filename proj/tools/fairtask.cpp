#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairtask/batch.hpp"
#include "fairtask/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace fairtask;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kOutEnv = "FAIRTASK_OUT_DIR";
constexpr const char* kDefaultOut = "fairtask_out";

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Anything that goes wrong after the configuration was accepted.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Fn>
auto at_runtime(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw RuntimeFailure(e.what());
  }
}

struct Options {
  std::string scenario;
  std::string generate;
  std::string algorithm = "eg";
  std::optional<std::size_t> k;
  std::size_t episodes = 100;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
  std::string out;
  unsigned parallel = 1;
  std::string reward_constants;
  std::size_t step_cap = kDefaultStepCap;
  bool json_dump = false;
};

void add_common(CLI::App* cmd, Options& o) {
  auto* scen = cmd->add_option("--scenario", o.scenario, "Scenario file (JSON)");
  auto* gen = cmd->add_option("--generate", o.generate,
                              "Generator parameters, e.g. N=7,map=2.7,obstacles=2,walls=1");
  scen->excludes(gen);
  gen->excludes(scen);
  cmd->add_option("--episodes", o.episodes, "Episodes per algorithm")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Root seed");
  cmd->add_option("--alpha", o.alpha, "Distance discount in (0,1)");
  cmd->add_option("--out", o.out, std::string("Output directory (default: $") + kOutEnv + " or " +
                                      kDefaultOut + ")");
  cmd->add_option("--parallel", o.parallel, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--reward-constants", o.reward_constants, "Reward constants file (JSON)");
  cmd->add_option("--step-cap", o.step_cap, "Step cap per episode")->check(CLI::PositiveNumber);
  cmd->add_flag("--json-dump", o.json_dump, "Also write full-precision per-episode JSON");
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("--generate: " + key + " needs a number, got \"" + text + "\"");
  }
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ConfigError("--generate: " + key + " needs a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

GeneratorParams parse_generate(const std::string& spec) {
  GeneratorParams p;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--generate: expected key=value, got \"" + item + "\"");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "N") p.num_agents = parse_count(key, value);
    else if (key == "map") p.map_size = parse_number(key, value);
    else if (key == "obstacles") p.num_obstacles = parse_count(key, value);
    else if (key == "walls") p.num_walls = parse_count(key, value);
    else if (key == "pref_min") p.preference_min = parse_number(key, value);
    else if (key == "pref_max") p.preference_max = parse_number(key, value);
    else throw ConfigError("--generate: unknown key \"" + key + "\"");
  }
  return p;
}

/// Everything a command needs, validated before any episode runs.
BatchConfig make_config(const Options& o, Algorithm algorithm, std::optional<std::size_t> k) {
  BatchConfig c;
  if (!o.scenario.empty()) {
    c.scenario = load_scenario(o.scenario);
    if (o.alpha) c.scenario->alpha = *o.alpha;
  } else {
    c.generator = parse_generate(o.generate);
    if (o.alpha) c.generator.alpha = *o.alpha;
  }
  if (o.alpha && !(*o.alpha > 0.0 && *o.alpha < 1.0)) throw ConfigError("--alpha must lie in (0,1)");
  c.algorithm = algorithm;
  if (algorithm == Algorithm::Online && !k) throw ConfigError("algorithm online requires --k");
  if (algorithm != Algorithm::Online && k) throw ConfigError("--k applies to the online algorithm only");
  c.k = k.value_or(0);
  c.episodes = o.episodes;
  c.root_seed = o.seed;
  c.parallel = o.parallel;
  c.episode.step_cap = o.step_cap;
  if (!o.reward_constants.empty()) {
    c.episode.rewards = reward_constants_from_json(parse_json_file(o.reward_constants));
  }
  validate(c);
  if (c.scenario) build_nav_grid(*c.scenario);  // rejects agents or tasks in blocked cells
  return c;
}

Algorithm algorithm_from(const std::string& name) {
  const auto a = parse_algorithm(name);
  if (!a) throw ConfigError("unknown algorithm \"" + name + "\" (eg, hungarian, minmax, online)");
  return *a;
}

std::size_t num_agents(const BatchConfig& c) {
  return c.scenario ? c.scenario->agents.size() : c.generator.num_agents;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

fs::path output_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return kDefaultOut;
}

/// Writes through a temporary file so a failed run leaves nothing behind.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) write_file(dir / name, content);
}

const char* kEpisodeHeader = "episode,seed,algorithm,k,T,D,F_rho,jain,U_star,U_pi,regret,collisions,incomplete\n";

std::string episode_csv(const std::vector<EpisodeRow>& rows) {
  std::string out = kEpisodeHeader;
  for (const auto& r : rows) {
    out += std::to_string(r.episode) + ',' + std::to_string(r.seed) + ',' + to_string(r.algorithm) + ',' +
           (r.algorithm == Algorithm::Online ? std::to_string(r.k) : std::string()) + ',' + fmt(r.T) +
           ',' + fmt(r.D) + ',' + fmt(r.F_rho) + ',' + fmt(r.jain) + ',' + fmt(r.U_star) + ',' +
           fmt(r.U_pi) + ',' + fmt(r.regret) + ',' + std::to_string(r.collisions) + ',' +
           (r.incomplete ? "1" : "0") + '\n';
  }
  return out;
}

nlohmann::json stat_json(const Stat& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}, {"count", s.count}};
}

nlohmann::json summary_json(const BatchConfig& c, const BatchSummary& s) {
  nlohmann::json j;
  j["algorithm"] = to_string(c.algorithm);
  if (c.algorithm == Algorithm::Online) j["k"] = c.k;
  j["root_seed"] = c.root_seed;
  j["episodes"] = s.episodes;
  j["incomplete"] = s.incomplete;
  j["T"] = stat_json(s.T);
  j["D"] = stat_json(s.D);
  j["F_rho"] = stat_json(s.F_rho);
  j["jain"] = stat_json(s.jain);
  j["regret"] = stat_json(s.regret);
  return j;
}

nlohmann::json episodes_json(const std::vector<EpisodeRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"episode", r.episode},
                   {"seed", r.seed},
                   {"algorithm", to_string(r.algorithm)},
                   {"k", r.k},
                   {"T", r.T},
                   {"D", r.D},
                   {"F_rho", r.F_rho},
                   {"jain", r.jain},
                   {"U_star", r.U_star},
                   {"U_pi", r.U_pi},
                   {"regret", r.regret},
                   {"collisions", r.collisions},
                   {"incomplete", r.incomplete},
                   {"realized_utilities", r.result.realized_utilities},
                   {"realized_distances", r.result.realized_distances},
                   {"per_agent_distance", r.result.per_agent_distance}});
  }
  return arr;
}

void print_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::cout << (c ? "  " : "") << cells[c] << std::string(width[c] - cells[c].size(), ' ');
    }
    std::cout << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

int run_command(const Options& o) {
  const BatchConfig c = make_config(o, algorithm_from(o.algorithm), o.k);
  const auto out = at_runtime([&] { return batch_run(c); });
  std::vector<std::pair<std::string, std::string>> files{
      {"episodes.csv", episode_csv(out.rows)},
      {"summary.json", summary_json(c, out.summary).dump(2) + "\n"}};
  if (o.json_dump) files.emplace_back("episodes.json", episodes_json(out.rows).dump(2) + "\n");
  at_runtime([&] { write_outputs(output_dir(o), files); });
  std::cout << to_string(c.algorithm) << ": " << out.summary.episodes << " episodes, "
            << out.summary.incomplete << " incomplete, mean T " << fmt(out.summary.T.mean)
            << ", mean F_rho " << fmt(out.summary.F_rho.mean) << '\n';
  return kExitOk;
}

int compare_command(const Options& o, const std::vector<std::string>& names) {
  if (names.size() < 2) throw ConfigError("compare needs at least two algorithms");
  std::vector<BatchConfig> configs;
  for (const auto& name : names) {
    const Algorithm a = algorithm_from(name);
    configs.push_back(make_config(o, a, a == Algorithm::Online ? o.k : std::nullopt));
  }
  for (const auto& c : configs)
    if (num_agents(c) != num_agents(configs.front())) throw ConfigError("scenario families differ in N");

  std::string csv = "algorithm,k,T,D,F_rho,jain\n";
  nlohmann::json summary = nlohmann::json::array();
  std::vector<std::vector<std::string>> table;
  for (const auto& c : configs) {
    const auto out = at_runtime([&] { return batch_run(c); });
    const auto& s = out.summary;
    const std::string k = c.algorithm == Algorithm::Online ? std::to_string(c.k) : "";
    csv += to_string(c.algorithm) + ',' + k + ',' + fmt(s.T.mean) + ',' + fmt(s.D.mean) + ',' +
           fmt(s.F_rho.mean) + ',' + fmt(s.jain.mean) + '\n';
    summary.push_back(summary_json(c, s));
    table.push_back({to_string(c.algorithm), k, fmt(s.T.mean), fmt(s.D.mean), fmt(s.F_rho.mean),
                     fmt(s.jain.mean)});
  }
  at_runtime([&] {
    write_outputs(output_dir(o), {{"compare.csv", csv}, {"compare_summary.json", summary.dump(2) + "\n"}});
  });
  print_table({"algorithm", "k", "T", "D", "F_rho", "jain"}, table);
  return kExitOk;
}

int sweep_command(const Options& o, const std::vector<std::size_t>& ks) {
  if (o.algorithm != "online") throw ConfigError("sweep-k runs the online algorithm only");
  if (ks.empty()) throw ConfigError("sweep-k needs --k-values");
  std::vector<BatchConfig> configs;
  for (auto k : ks) configs.push_back(make_config(o, Algorithm::Online, k));

  std::string csv = "k,regret,T,D,F_rho,jain,incomplete\n";
  nlohmann::json summary = nlohmann::json::array();
  std::vector<std::vector<std::string>> table;
  for (const auto& c : configs) {
    const auto out = at_runtime([&] { return batch_run(c); });
    const auto& s = out.summary;
    csv += std::to_string(c.k) + ',' + fmt(s.regret.mean) + ',' + fmt(s.T.mean) + ',' + fmt(s.D.mean) +
           ',' + fmt(s.F_rho.mean) + ',' + fmt(s.jain.mean) + ',' + std::to_string(s.incomplete) + '\n';
    summary.push_back(summary_json(c, s));
    table.push_back({std::to_string(c.k), fmt(s.regret.mean), fmt(s.T.mean), fmt(s.D.mean),
                     fmt(s.F_rho.mean), fmt(s.jain.mean)});
  }
  at_runtime([&] {
    write_outputs(output_dir(o), {{"sweep_k.csv", csv}, {"sweep_k_summary.json", summary.dump(2) + "\n"}});
  });
  print_table({"k", "regret", "T", "D", "F_rho", "jain"}, table);
  return kExitOk;
}

int export_command(const Options& o, const std::string& path) {
  const GeneratorParams p = parse_generate(o.generate);
  at_runtime([&] { save_scenario(generate_scenario(p, o.seed), path); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair multi-agent task assignment experiments"};
  app.require_subcommand(1);

  Options run_opts, cmp_opts, sweep_opts, export_opts;
  std::vector<std::string> algorithms;
  std::vector<std::size_t> k_values;
  std::string export_path;

  auto* run = app.add_subcommand("run", "Run one algorithm over a seeded episode family");
  add_common(run, run_opts);
  run->add_option("--algorithm", run_opts.algorithm, "eg | hungarian | minmax | online");
  run->add_option("--k", run_opts.k, "Discovery threshold (online only)");

  auto* cmp = app.add_subcommand("compare", "Compare algorithms on the same episode family");
  add_common(cmp, cmp_opts);
  cmp->add_option("--algorithms", algorithms, "Comma-separated algorithms")->delimiter(',')->required();
  cmp->add_option("--k", cmp_opts.k, "Discovery threshold when online is listed");

  auto* sweep = app.add_subcommand("sweep-k", "Online algorithm over several discovery thresholds");
  add_common(sweep, sweep_opts);
  sweep_opts.algorithm = "online";
  sweep->add_option("--algorithm", sweep_opts.algorithm, "Must be online");
  sweep->add_option("--k-values", k_values, "Comma-separated k values")->delimiter(',')->required();

  auto* exp = app.add_subcommand("export-scenario", "Write one generated scenario to a file");
  exp->add_option("--generate", export_opts.generate, "Generator parameters");
  exp->add_option("--seed", export_opts.seed, "Scenario seed");
  exp->add_option("file", export_path, "Destination")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return run_command(run_opts);
    if (*cmp) return compare_command(cmp_opts, algorithms);
    if (*sweep) return sweep_command(sweep_opts, k_values);
    if (*exp) return export_command(export_opts, export_path);
  } catch (const RuntimeFailure& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    // Config, format and scenario-validation errors all derive from this.
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
