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
// Report files: the deterministic JSON output of the solve/simulate
// commands, and the verifier that re-derives everything derivable from
// the scenario.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "txagg/core.hpp"
#include "txagg/exec.hpp"
#include "txagg/protocol.hpp"
#include "txagg/scenario.hpp"
#include "txagg/solver.hpp"

namespace txagg::report {

struct ReportParts {
  solver::Solution solution;
  std::vector<protocol::RejectedUser> rejected;
  core::FeeReport fees;
  core::SequentialOutcome baseline;  // sequential run of the selected list
  std::optional<exec::ExecutionOutcome> execution;
  std::map<core::NodeId, std::string> local_validation;  // user -> "ok"|reason
};

nlohmann::json build_report(const ReportParts& parts);

// Stable text form: two-space indentation, alphabetical keys, trailing
// newline. Byte-identical across runs except for solver_stats.wall_ms.
std::string render_report(const nlohmann::json& report);

// Strips the fields excluded from determinism comparisons.
nlohmann::json normalized_for_comparison(nlohmann::json report);

struct VerifyResult {
  bool ok = true;
  std::string failed_check;  // named check on failure
};

// Re-derives the verifiable content of a report against its scenario:
// per-user local validation of the flow and selection, fee and baseline
// recomputation, structural flow checks, rejected-user recomputation and
// deterministic re-execution of the adversary schedule when an execution
// section is present. solver_stats is diagnostic and not re-derived.
VerifyResult verify_report(const scenario::ScenarioFile& sc,
                           const nlohmann::json& report);

}  // namespace txagg::report
