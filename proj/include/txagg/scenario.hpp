// Copyright 2026 The txagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Scenario files: the JSON input format of the CLI, with referential
// validation and stable-order re-serialization.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "txagg/core.hpp"
#include "txagg/exec.hpp"
#include "txagg/protocol.hpp"

namespace txagg::scenario {

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what)
      : std::runtime_error("invalid scenario: " + what) {}
};

struct ScenarioFile {
  core::Topology topology;
  std::vector<core::Transaction> txns;  // scenario order
  protocol::ProtocolConfig config;
  exec::StrategyMap adversary;
  std::string solver_name;  // brute | dp | dp-bounded | greedy
  std::optional<core::Amount> radius;
  std::string seed_hex;     // 64 hex chars
};

solver::SolverKind solver_kind_from_name(const std::string& name);
std::string strategy_to_string(const exec::AdversaryStrategy& s);
exec::AdversaryStrategy strategy_from_string(const std::string& s);

sharing::Seed parse_seed_hex(const std::string& hex);

// Throws ScenarioError on malformed structure, broken referential
// integrity, out-of-range fees, bad seeds, or pad_to below the longest
// submitted per-user list.
ScenarioFile parse_scenario(const nlohmann::json& j);
ScenarioFile load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const ScenarioFile& sc);

}  // namespace txagg::scenario
