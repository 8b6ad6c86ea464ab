#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fairtask/rewards.hpp"
#include "fairtask/world.hpp"

namespace fairtask {

inline constexpr int kScenarioFormatVersion = 1;

/// Malformed or unsupported input document.
struct FormatError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline nlohmann::json to_json(Vec2 p) { return nlohmann::json::array({p.x, p.y}); }

inline Vec2 vec2_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("expected a [x, y] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  json j;
  j["version"] = kScenarioFormatVersion;
  j["workspace_size"] = s.workspace_size;
  j["dt"] = s.dt;
  j["alpha"] = s.alpha;
  j["seed"] = s.seed;
  j["walls"] = json::array();
  for (const auto& w : s.walls) j["walls"].push_back({detail::to_json(w.a), detail::to_json(w.b)});
  j["obstacles"] = json::array();
  for (const auto& d : s.obstacles)
    j["obstacles"].push_back({{"center", detail::to_json(d.center)}, {"radius", d.radius}});
  j["agents"] = json::array();
  for (const auto& a : s.agents) {
    j["agents"].push_back({{"position", detail::to_json(a.start_position)},
                           {"type", a.agent_type},
                           {"sensing_radius", a.sensing_radius},
                           {"max_speed", a.max_speed},
                           {"preferences", a.preference_row}});
  }
  j["tasks"] = json::array();
  for (const auto& t : s.tasks) {
    j["tasks"].push_back({{"position", detail::to_json(t.position)},
                          {"type", t.task_type},
                          {"workload", t.workload},
                          {"weight", t.weight}});
  }
  return j;
}

/// Parses and validates a scenario document. Throws FormatError for
/// malformed documents and std::invalid_argument for invalid scenarios.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    if (!j.is_object()) throw FormatError("scenario must be an object");
    if (!j.contains("version")) throw FormatError("missing \"version\"");
    if (j.at("version").get<int>() != kScenarioFormatVersion) {
      throw FormatError("unsupported scenario version " + j.at("version").dump());
    }
    s.workspace_size = j.at("workspace_size").get<double>();
    s.dt = j.value("dt", s.dt);
    s.alpha = j.value("alpha", s.alpha);
    s.seed = j.value("seed", std::uint64_t{0});
    for (const auto& w : j.value("walls", nlohmann::json::array())) {
      if (!w.is_array() || w.size() != 2) throw FormatError("wall must be [[x,y],[x,y]]");
      s.walls.push_back({detail::vec2_from(w.at(0)), detail::vec2_from(w.at(1))});
    }
    for (const auto& d : j.value("obstacles", nlohmann::json::array()))
      s.obstacles.push_back({detail::vec2_from(d.at("center")), d.at("radius").get<double>()});
    for (const auto& a : j.at("agents")) {
      AgentSpec spec;
      spec.id = s.agents.size();
      spec.start_position = detail::vec2_from(a.at("position"));
      spec.agent_type = a.value("type", std::size_t{0});
      spec.sensing_radius = a.value("sensing_radius", spec.sensing_radius);
      spec.max_speed = a.value("max_speed", spec.max_speed);
      spec.preference_row = a.at("preferences").get<std::vector<double>>();
      s.agents.push_back(std::move(spec));
    }
    for (const auto& t : j.at("tasks")) {
      TaskSpec spec;
      spec.id = s.tasks.size();
      spec.position = detail::vec2_from(t.at("position"));
      spec.task_type = t.value("type", std::size_t{0});
      spec.workload = t.at("workload").get<double>();
      spec.weight = t.at("weight").get<double>();
      s.tasks.push_back(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

inline nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) { return scenario_from_json(parse_json_file(path)); }

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << scenario_to_json(s).dump(2) << '\n';
}

/// Reward constants; missing keys keep their defaults, unknown keys fail.
inline RewardConstants reward_constants_from_json(const nlohmann::json& j) {
  RewardConstants c;
  if (!j.is_object()) throw FormatError("reward constants must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw FormatError("reward constant " + key + " must be a number");
    const double v = value.get<double>();
    if (key == "eta0") c.eta0 = v;
    else if (key == "gamma_decay") c.gamma_decay = v;
    else if (key == "kappa") c.kappa = v;
    else if (key == "arrival_bonus") c.arrival_bonus = v;
    else if (key == "completion_bonus") c.completion_bonus = v;
    else if (key == "collision_penalty") c.collision_penalty = v;
    else throw FormatError("unknown reward constant \"" + key + "\"");
  }
  c.validate();
  return c;
}

}  // namespace fairtask
