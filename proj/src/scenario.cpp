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

#include "txagg/scenario.hpp"

#include <fstream>
#include <map>
#include <set>

namespace txagg::scenario {

namespace {

std::uint64_t require_uint(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw ScenarioError("missing or non-unsigned field '" + key + "'");
  }
  return j[key].get<std::uint64_t>();
}

std::string require_string(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ScenarioError("missing or non-string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

std::uint32_t require_ppm(const nlohmann::json& j, const std::string& key) {
  const std::uint64_t v = require_uint(j, key);
  if (v >= core::kPpmDenominator) {
    throw ScenarioError("'" + key + "' must be below 1000000");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

solver::SolverKind solver_kind_from_name(const std::string& name) {
  if (name == "brute") return solver::SolverKind::kBrute;
  if (name == "dp") return solver::SolverKind::kDp;
  if (name == "dp-bounded") return solver::SolverKind::kDpBounded;
  if (name == "greedy") return solver::SolverKind::kGreedy;
  throw ScenarioError("unknown solver '" + name + "'");
}

std::string strategy_to_string(const exec::AdversaryStrategy& s) {
  switch (s.kind) {
    case exec::StrategyKind::kHonest:
      return "honest";
    case exec::StrategyKind::kWithholdSenderSignature:
      return "withhold-signature";
    case exec::StrategyKind::kWithholdAllEpochPosts:
      return "withhold-epoch-posts";
    case exec::StrategyKind::kReceiverNoSpend:
      return "receiver-no-spend";
    case exec::StrategyKind::kCrashAtPhase:
      return "crash-at-phase-" + std::to_string(s.crash_phase);
  }
  return "honest";
}

exec::AdversaryStrategy strategy_from_string(const std::string& s) {
  if (s == "honest") return {exec::StrategyKind::kHonest, 0};
  if (s == "withhold-signature") {
    return {exec::StrategyKind::kWithholdSenderSignature, 0};
  }
  if (s == "withhold-epoch-posts") {
    return {exec::StrategyKind::kWithholdAllEpochPosts, 0};
  }
  if (s == "receiver-no-spend") {
    return {exec::StrategyKind::kReceiverNoSpend, 0};
  }
  const std::string prefix = "crash-at-phase-";
  if (s.rfind(prefix, 0) == 0) {
    const std::string digits = s.substr(prefix.size());
    if (digits.empty() || digits.size() > 1 || digits[0] < '1' ||
        digits[0] > '5') {
      throw ScenarioError("crash phase must be 1..5 in '" + s + "'");
    }
    return {exec::StrategyKind::kCrashAtPhase,
            static_cast<std::size_t>(digits[0] - '0')};
  }
  throw ScenarioError("unknown adversary strategy '" + s + "'");
}

sharing::Seed parse_seed_hex(const std::string& hex) {
  if (hex.size() != 64) {
    throw ScenarioError("seed_hex must be 64 hex characters");
  }
  sharing::Seed seed{};
  for (std::size_t i = 0; i < 32; ++i) {
    auto nibble = [&](char c) -> std::uint8_t {
      if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
      if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
      if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
      throw ScenarioError("seed_hex holds a non-hex character");
    };
    seed[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) |
                                        nibble(hex[2 * i + 1]));
  }
  return seed;
}

ScenarioFile parse_scenario(const nlohmann::json& j) {
  if (!j.is_object()) throw ScenarioError("top level must be an object");
  for (const char* key : {"hubs", "clients", "transactions", "config"}) {
    if (!j.contains(key)) {
      throw ScenarioError(std::string("missing '") + key + "'");
    }
  }

  ScenarioFile sc;
  if (!j["hubs"].is_array() || j["hubs"].empty()) {
    throw ScenarioError("'hubs' must be a nonempty array");
  }
  for (const auto& h : j["hubs"]) {
    sc.topology.factory.hubs.push_back(require_string(h, "id"));
    sc.topology.factory.balances.push_back(require_uint(h, "factory_balance"));
    sc.topology.factory.fee_base.push_back(require_uint(h, "fee_base"));
    sc.topology.factory.fee_prop_ppm.push_back(
        require_ppm(h, "fee_prop_ppm"));
  }
  if (!j["clients"].is_array()) {
    throw ScenarioError("'clients' must be an array");
  }
  for (const auto& c : j["clients"]) {
    core::ChannelState ch;
    ch.client = require_string(c, "id");
    ch.hub = require_string(c, "hub");
    ch.cap_out = require_uint(c, "cap_out");
    ch.cap_in = require_uint(c, "cap_in");
    ch.fee_base = require_uint(c, "fee_base");
    ch.fee_prop_ppm = require_ppm(c, "fee_prop_ppm");
    if (!sc.topology.clients.emplace(ch.client, ch).second) {
      throw ScenarioError("duplicate client id " + ch.client);
    }
  }
  try {
    sc.topology.check();
  } catch (const core::StructureMismatchError& e) {
    throw ScenarioError(e.what());
  }

  if (!j["transactions"].is_array()) {
    throw ScenarioError("'transactions' must be an array");
  }
  std::set<std::string> txn_ids;
  std::map<core::NodeId, std::size_t> per_user;
  for (const auto& t : j["transactions"]) {
    const std::string id = require_string(t, "id");
    const std::string sender = require_string(t, "sender");
    const std::string recipient = require_string(t, "recipient");
    const core::Amount amount = require_uint(t, "amount");
    if (id.rfind("pad-", 0) == 0) {
      throw ScenarioError("transaction ids must not start with 'pad-': " + id);
    }
    if (!txn_ids.insert(id).second) {
      throw ScenarioError("duplicate transaction id " + id);
    }
    if (!sc.topology.has_node(sender)) {
      throw ScenarioError("transaction " + id + " has unknown sender " +
                          sender);
    }
    if (!sc.topology.has_node(recipient)) {
      throw ScenarioError("transaction " + id + " has unknown recipient " +
                          recipient);
    }
    if (sender == recipient) {
      throw ScenarioError("transaction " + id + " pays its own sender");
    }
    sc.txns.push_back(core::Transaction{id, sender, recipient, amount});
    ++per_user[sender];
  }

  const nlohmann::json& cfg = j["config"];
  sc.config.num_delegates = require_uint(cfg, "num_delegates");
  if (sc.config.num_delegates < 1 ||
      sc.config.num_delegates > sc.topology.factory.hubs.size()) {
    throw ScenarioError("num_delegates must be in 1..|hubs|");
  }
  sc.seed_hex = require_string(cfg, "seed_hex");
  sc.config.randomness_seed = parse_seed_hex(sc.seed_hex);
  sc.config.pad_to = require_uint(cfg, "pad_to");
  for (const auto& [user, count] : per_user) {
    if (count > sc.config.pad_to) {
      throw ScenarioError("pad_to " + std::to_string(sc.config.pad_to) +
                          " is below the " + std::to_string(count) +
                          " transactions submitted by " + user);
    }
  }
  sc.solver_name = require_string(cfg, "solver");
  sc.config.solver_choice.kind = solver_kind_from_name(sc.solver_name);
  if (cfg.contains("radius")) {
    if (!cfg["radius"].is_number_unsigned()) {
      throw ScenarioError("'radius' must be unsigned");
    }
    sc.radius = cfg["radius"].get<core::Amount>();
    sc.config.solver_choice.radius = *sc.radius;
  }
  sc.config.timeout = require_uint(cfg, "timeout");
  if (sc.config.timeout == 0) throw ScenarioError("timeout must be positive");
  sc.config.epsilon_output = require_uint(cfg, "epsilon");

  if (j.contains("adversary")) {
    if (!j["adversary"].is_object()) {
      throw ScenarioError("'adversary' must be an object");
    }
    for (const auto& [party, strategy] : j["adversary"].items()) {
      if (!sc.topology.has_node(party)) {
        throw ScenarioError("adversary entry for unknown node " + party);
      }
      if (!strategy.is_string()) {
        throw ScenarioError("adversary strategies must be strings");
      }
      sc.adversary[party] =
          strategy_from_string(strategy.get<std::string>());
    }
  }
  return sc;
}

ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("json parse failure: ") + e.what());
  }
  return parse_scenario(j);
}

nlohmann::json scenario_to_json(const ScenarioFile& sc) {
  nlohmann::json j;
  j["hubs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < sc.topology.factory.hubs.size(); ++i) {
    j["hubs"].push_back({{"id", sc.topology.factory.hubs[i]},
                         {"factory_balance", sc.topology.factory.balances[i]},
                         {"fee_base", sc.topology.factory.fee_base[i]},
                         {"fee_prop_ppm", sc.topology.factory.fee_prop_ppm[i]}});
  }
  j["clients"] = nlohmann::json::array();
  for (const auto& [id, ch] : sc.topology.clients) {
    j["clients"].push_back({{"id", ch.client},
                            {"hub", ch.hub},
                            {"cap_out", ch.cap_out},
                            {"cap_in", ch.cap_in},
                            {"fee_base", ch.fee_base},
                            {"fee_prop_ppm", ch.fee_prop_ppm}});
  }
  j["transactions"] = nlohmann::json::array();
  for (const core::Transaction& t : sc.txns) {
    j["transactions"].push_back({{"id", t.id},
                                 {"sender", t.sender},
                                 {"recipient", t.recipient},
                                 {"amount", t.amount}});
  }
  j["config"] = {{"num_delegates", sc.config.num_delegates},
                 {"seed_hex", sc.seed_hex},
                 {"pad_to", sc.config.pad_to},
                 {"solver", sc.solver_name},
                 {"timeout", sc.config.timeout},
                 {"epsilon", sc.config.epsilon_output}};
  if (sc.radius.has_value()) j["config"]["radius"] = *sc.radius;
  if (!sc.adversary.empty()) {
    j["adversary"] = nlohmann::json::object();
    for (const auto& [party, strategy] : sc.adversary) {
      j["adversary"][party] = strategy_to_string(strategy);
    }
  }
  return j;
}

}  // namespace txagg::scenario
