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

#include "txagg/report.hpp"

#include <algorithm>
#include <set>

namespace txagg::report {

namespace {

nlohmann::json flow_to_json(const core::Flow& flow) {
  nlohmann::json j;
  j["client_net"] = nlohmann::json::object();
  for (const auto& [c, net] : flow.client_net) j["client_net"][c] = net;
  j["factory_demand"] = flow.factory_demand;
  return j;
}

nlohmann::json fees_to_json(const core::FeeReport& fees) {
  nlohmann::json j;
  j["per_channel"] = nlohmann::json::object();
  for (const auto& [c, fee] : fees.per_channel) j["per_channel"][c] = fee;
  j["factory"] = fees.factory;
  j["total"] = fees.total;
  return j;
}

nlohmann::json events_to_json(const std::vector<exec::LedgerEvent>& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const exec::LedgerEvent& e : events) {
    arr.push_back({{"height", e.height},
                   {"party", e.party},
                   {"kind", e.kind},
                   {"detail", e.detail}});
  }
  return arr;
}

struct CheckFailure {
  std::string name;
};

#define REPORT_CHECK(cond, check_name)         \
  do {                                         \
    if (!(cond)) throw CheckFailure{check_name}; \
  } while (0)

}  // namespace

nlohmann::json build_report(const ReportParts& parts) {
  nlohmann::json j;
  j["selected_txn_ids"] = parts.solution.selected;
  j["throughput"] = parts.solution.throughput;
  j["flow"] = flow_to_json(parts.solution.flow);
  j["fees"] = fees_to_json(parts.fees);
  nlohmann::json baseline;
  baseline["feasible"] = parts.baseline.feasible;
  if (parts.baseline.feasible) {
    baseline["total_fee"] = parts.baseline.fees.total;
  } else {
    baseline["failed_at_index"] = parts.baseline.failed_index;
  }
  j["sequential_baseline"] = baseline;
  if (parts.execution.has_value()) {
    nlohmann::json ex;
    ex["committed"] = parts.execution->committed;
    ex["events"] = events_to_json(parts.execution->events);
    ex["local_validation"] = nlohmann::json::object();
    for (const auto& [user, verdict] : parts.local_validation) {
      ex["local_validation"][user] = verdict;
    }
    j["execution"] = ex;
  } else {
    j["execution"] = nullptr;
  }
  j["rejected_users"] = nlohmann::json::array();
  for (const protocol::RejectedUser& r : parts.rejected) {
    j["rejected_users"].push_back({{"user", r.user}, {"reason", r.reason}});
  }
  j["solver_stats"] = {{"states_explored", parts.solution.stats.states_explored},
                       {"pruned", parts.solution.stats.pruned},
                       {"wall_ms", parts.solution.stats.wall_ms}};
  return j;
}

std::string render_report(const nlohmann::json& report) {
  return report.dump(2) + "\n";
}

nlohmann::json normalized_for_comparison(nlohmann::json report) {
  if (report.contains("solver_stats") && report["solver_stats"].is_object()) {
    report["solver_stats"]["wall_ms"] = 0.0;
  }
  return report;
}

VerifyResult verify_report(const scenario::ScenarioFile& sc,
                           const nlohmann::json& report) {
  const core::Topology& topo = sc.topology;
  try {
    REPORT_CHECK(report.is_object(), "Structure");
    for (const char* key :
         {"selected_txn_ids", "throughput", "flow", "fees",
          "sequential_baseline", "execution", "rejected_users",
          "solver_stats"}) {
      REPORT_CHECK(report.contains(key), "Structure");
    }

    // Selection: known ids, unique, sorted, throughput = sum of amounts.
    REPORT_CHECK(report["selected_txn_ids"].is_array(), "Structure");
    std::vector<std::string> selected;
    for (const auto& id : report["selected_txn_ids"]) {
      REPORT_CHECK(id.is_string(), "Structure");
      selected.push_back(id.get<std::string>());
    }
    REPORT_CHECK(std::is_sorted(selected.begin(), selected.end()),
                 "SelectionOrder");
    REPORT_CHECK(std::adjacent_find(selected.begin(), selected.end()) ==
                     selected.end(),
                 "SelectionOrder");
    std::map<std::string, const core::Transaction*> by_id;
    for (const core::Transaction& t : sc.txns) by_id.emplace(t.id, &t);
    std::vector<core::Transaction> selected_txns;
    core::Amount total = 0;
    for (const std::string& id : selected) {
      auto it = by_id.find(id);
      REPORT_CHECK(it != by_id.end(), "NotSubmitted");
      selected_txns.push_back(*it->second);
      total += it->second->amount;
    }
    REPORT_CHECK(report["throughput"].is_number_unsigned(), "Structure");
    REPORT_CHECK(report["throughput"].get<core::Amount>() == total,
                 "Throughput");

    // Flow: canonical, zero-sum, feasible on the scenario topology.
    const nlohmann::json& jflow = report["flow"];
    REPORT_CHECK(jflow.is_object() && jflow.contains("client_net") &&
                     jflow.contains("factory_demand"),
                 "Structure");
    core::Flow flow;
    REPORT_CHECK(jflow["client_net"].is_object(), "Structure");
    for (const auto& [c, v] : jflow["client_net"].items()) {
      REPORT_CHECK(topo.clients.count(c) > 0, "FlowStructure");
      REPORT_CHECK(v.is_number_integer(), "Structure");
      const std::int64_t net = v.get<std::int64_t>();
      REPORT_CHECK(net != 0, "FlowStructure");
      flow.client_net[c] = net;
    }
    REPORT_CHECK(jflow["factory_demand"].is_array() &&
                     jflow["factory_demand"].size() ==
                         topo.factory.hubs.size(),
                 "FlowStructure");
    std::int64_t factory_sum = 0;
    for (const auto& v : jflow["factory_demand"]) {
      REPORT_CHECK(v.is_number_integer(), "Structure");
      flow.factory_demand.push_back(v.get<std::int64_t>());
      factory_sum += flow.factory_demand.back();
    }
    REPORT_CHECK(factory_sum == 0, "FlowStructure");
    REPORT_CHECK(core::check_flow_feasible(topo, flow), "FlowFeasibility");

    // Local validation for every user against the derived views.
    const auto views = protocol::build_views(topo, selected_txns, flow);
    for (const auto& [user, view] : views) {
      std::vector<core::Transaction> own;
      for (const core::Transaction& t : sc.txns) {
        if (t.sender == user) own.push_back(t);
      }
      const protocol::PeerData peers =
          protocol::gather_peer_data(topo, user, views);
      const protocol::LocalValidation lv =
          protocol::local_validate(user, view, own, peers);
      REPORT_CHECK(lv.ok, protocol::to_string(lv.reason));
    }

    // Fees of the aggregate transition.
    const core::Topology after = core::apply_flow(topo, flow);
    const core::FeeReport fees = core::transition_fee(topo, after);
    REPORT_CHECK(report["fees"] == fees_to_json(fees), "Fees");

    // Sequential baseline of the selected list in scenario order.
    std::vector<core::Transaction> baseline_order;
    const std::set<std::string> selected_set(selected.begin(),
                                             selected.end());
    for (const core::Transaction& t : sc.txns) {
      if (selected_set.count(t.id)) baseline_order.push_back(t);
    }
    const core::SequentialOutcome baseline =
        core::sequential_execute(topo, baseline_order);
    const nlohmann::json& jbase = report["sequential_baseline"];
    REPORT_CHECK(jbase.is_object() && jbase.contains("feasible") &&
                     jbase["feasible"].is_boolean(),
                 "Structure");
    REPORT_CHECK(jbase["feasible"].get<bool>() == baseline.feasible,
                 "SequentialBaseline");
    if (baseline.feasible) {
      REPORT_CHECK(jbase.contains("total_fee") &&
                       jbase["total_fee"].is_number_unsigned() &&
                       jbase["total_fee"].get<core::Amount>() ==
                           baseline.fees.total,
                   "SequentialBaseline");
    } else {
      REPORT_CHECK(jbase.contains("failed_at_index") &&
                       jbase["failed_at_index"].is_number_unsigned() &&
                       jbase["failed_at_index"].get<std::size_t>() ==
                           baseline.failed_index,
                   "SequentialBaseline");
    }

    // Rejections re-derived from the scenario transactions; a rejected
    // direction must not contribute to the selection.
    const protocol::ValidationResult validated =
        protocol::validate_inputs(topo, sc.txns);
    nlohmann::json expected_rejected = nlohmann::json::array();
    for (const protocol::RejectedUser& r : validated.rejected) {
      expected_rejected.push_back({{"user", r.user}, {"reason", r.reason}});
    }
    REPORT_CHECK(report["rejected_users"] == expected_rejected,
                 "RejectedUsers");
    for (const protocol::RejectedUser& r : validated.rejected) {
      for (const core::Transaction& t : selected_txns) {
        const bool dropped =
            (r.reason == "outgoing-capacity" && t.sender == r.user) ||
            (r.reason == "incoming-capacity" && t.recipient == r.user);
        REPORT_CHECK(!dropped, "RejectedConsistency");
      }
    }

    // Execution section: deterministic replay of the adversary schedule.
    if (!report["execution"].is_null()) {
      REPORT_CHECK(report["execution"].is_object(), "Structure");
      const nlohmann::json& jex = report["execution"];
      REPORT_CHECK(jex.contains("committed") &&
                       jex["committed"].is_boolean() &&
                       jex.contains("events") && jex["events"].is_array(),
                   "Structure");
      const exec::ExecutionOutcome outcome = exec::execute_atomic(
          topo, flow, sc.adversary, sc.config.timeout,
          sc.config.epsilon_output);
      REPORT_CHECK(jex["committed"].get<bool>() == outcome.committed,
                   "ExecutionReplay");
      REPORT_CHECK(jex["events"] == events_to_json(outcome.events),
                   "ExecutionReplay");
      if (jex.contains("local_validation")) {
        REPORT_CHECK(jex["local_validation"].is_object(), "Structure");
        for (const auto& [user, verdict] : jex["local_validation"].items()) {
          REPORT_CHECK(views.count(user) > 0 && verdict.is_string() &&
                           verdict.get<std::string>() == "ok",
                       "LocalValidationRecord");
        }
        REPORT_CHECK(jex["local_validation"].size() == views.size(),
                     "LocalValidationRecord");
      }
    }

    // solver_stats is diagnostic: shape only.
    const nlohmann::json& stats = report["solver_stats"];
    REPORT_CHECK(stats.is_object() && stats.contains("states_explored") &&
                     stats.contains("pruned") && stats.contains("wall_ms"),
                 "Structure");
  } catch (const CheckFailure& f) {
    return {false, f.name};
  }
  return {};
}

}  // namespace txagg::report
