// SPDX-License-Identifier: Apache-2.0
//
// Scenario documents: JSON key-value files describing one experiment. Unknown
// keys are rejected; every omitted key gets a documented default. parse and
// emit round-trip exactly.
#pragma once

#include <stdexcept>
#include <string>

#include "mecp/sim.hpp"

namespace mecp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  SimParams params;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir{"out"};
  bool trace_enabled{true};

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);
std::string emit_scenario(const ScenarioConfig& cfg);
void validate_scenario(const ScenarioConfig& cfg);

}  // namespace mecp
