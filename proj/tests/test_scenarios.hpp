#pragma once

#include <vector>

#include "fairtask/world.hpp"

namespace fixtures {

using fairtask::AgentSpec;
using fairtask::Scenario;
using fairtask::TaskSpec;
using fairtask::Vec2;

/// Open square workspace with one agent/task pair per entry.
inline Scenario open_scenario(const std::vector<Vec2>& agents, const std::vector<Vec2>& tasks,
                              double size = 2.5, double dt = 0.1) {
  Scenario s;
  s.workspace_size = size;
  s.dt = dt;
  s.alpha = 0.97;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentSpec a;
    a.id = i;
    a.start_position = agents[i];
    a.agent_type = 0;
    a.sensing_radius = 0.5;
    a.max_speed = 1.0;
    a.preference_row = {0.5};
    s.agents.push_back(a);
  }
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    TaskSpec t;
    t.id = j;
    t.position = tasks[j];
    t.task_type = 0;
    t.workload = 1.0;
    t.weight = 1.0;
    s.tasks.push_back(t);
  }
  return s;
}

}  // namespace fixtures
