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
// The aggregation pipeline: delegate selection from common randomness,
// per-user padding and (k,k) secret sharing, input validation, oracle
// invocation, per-user output restriction, local validation, and the
// privacy experiment over corrupted views.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "txagg/core.hpp"
#include "txagg/exec.hpp"
#include "txagg/sharing.hpp"
#include "txagg/solver.hpp"

namespace txagg::protocol {

struct ProtocolConfig {
  std::size_t num_delegates = 1;
  sharing::Seed randomness_seed{};  // stand-in for the agreed block header
  std::size_t pad_to = 1;           // public per-user list length
  solver::SolverChoice solver_choice;
  std::uint64_t timeout = 10;       // execution timeout T, ledger heights
  core::Amount epsilon_output = 1;  // dust output per receiver
};

struct ViewTxn {
  std::string txn_id;
  core::Amount amount = 0;
  // Role of the other endpoint; the user's own role is the complement.
  std::string counterparty_role;  // "sender" | "recipient"

  bool operator==(const ViewTxn&) const = default;
};

// What one user observes: its own selected transactions, the flow on its
// incident edges only (clients: their channel, keyed by the client id;
// hubs: their clients' channels plus every factory entry, keyed
// "factory:<hub>"), and the involved-user count.
struct UserView {
  core::NodeId user;
  std::vector<ViewTxn> restricted_txns;  // sorted by txn id
  std::map<std::string, std::int64_t> incident_flow;
  std::size_t involved_count = 0;

  bool operator==(const UserView&) const = default;
  std::string canonical_string() const;
};

struct RejectedUser {
  core::NodeId user;
  std::string reason;  // "outgoing-capacity" | "incoming-capacity"

  bool operator==(const RejectedUser&) const = default;
};

// One user's contribution to the flow computation: the padded outgoing
// list plus the balances of the user's adjacent channels (own side).
struct UserInput {
  core::NodeId user;
  std::vector<core::Transaction> padded_txns;
  std::vector<core::Amount> balances;
};

// Serializes the input to ring words and additively shares it to the k_d
// delegates; reconstruct_input demands every share index.
std::vector<sharing::Share> share_input(const UserInput& input,
                                        std::size_t k_d, SplitMix64& rng);
UserInput reconstruct_input(const std::vector<sharing::Share>& shares,
                            std::size_t k_d);

struct ValidationResult {
  std::vector<core::Transaction> kept;  // input order preserved
  std::vector<RejectedUser> rejected;   // sorted by (user, reason)
};

// Capacity validation iterated to a fixed point: drop every client whose
// outgoing total reaches its cap_out (all their outgoing transactions),
// recompute, then drop every client whose incoming total reaches cap_in,
// and repeat until stable. Comparisons are the strict >= of the protocol;
// dropped transactions stay dropped.
ValidationResult validate_inputs(const core::Topology& topo,
                                 const std::vector<core::Transaction>& txns);

struct FlowComputationResult {
  solver::Solution solution;  // protocol padding stripped
  std::map<core::NodeId, UserView> views;
  std::vector<RejectedUser> rejected;
  std::vector<core::Transaction> kept;  // post-validation, without padding
  std::vector<std::string> delegates;   // committee, in selection order
};

// The flow computation phase: pad per-user lists to pad_to, share to the
// delegates chosen from the seed, reconstruct inside the simulated
// committee, validate, solve, route, and restrict the output per user.
// Deterministic in (topo, txns, config).
FlowComputationResult run_flow_computation(
    const core::Topology& topo, const std::vector<core::Transaction>& txns,
    const ProtocolConfig& config);

// Restriction of a solution to per-user views: selected transactions
// touching the user, the flow on the user's incident edges, and the
// involved count. Shared by the pipeline and report verification.
std::map<core::NodeId, UserView> build_views(
    const core::Topology& topo,
    const std::vector<core::Transaction>& selected_txns,
    const core::Flow& flow);

enum class AbortReason {
  kNotSubmitted,
  kEndpointMismatch,
  kFlowMismatch,
  kNetFlowViolation,
};

std::string to_string(AbortReason reason);

struct LocalValidation {
  bool ok = true;
  AbortReason reason = AbortReason::kNotSubmitted;
  std::string detail;
};

// Counterparty confirmations assembled outside the view: per transaction,
// whether the other endpoint's view lists it; per shared edge, the value
// the counterparty reports.
struct PeerData {
  std::map<std::string, bool> counterparty_has_txn;
  std::map<std::string, std::int64_t> edge_copies;
};

PeerData gather_peer_data(const core::Topology& topo, const core::NodeId& user,
                          const std::map<core::NodeId, UserView>& views);

// The four checks a user runs before executing: own transactions were
// submitted, both endpoints agree on each transaction, incident flow
// matches the counterparty copies, and the net incident flow equals the
// aggregate demand of the restricted list.
LocalValidation local_validate(
    const core::NodeId& user, const UserView& view,
    const std::vector<core::Transaction>& own_submitted, const PeerData& peers);

struct ProtocolReport {
  solver::Solution accepted;
  std::vector<RejectedUser> rejected_users;
  std::map<core::NodeId, UserView> views;
  core::FeeReport fees;
  exec::ExecutionOutcome outcome;
};

// Flow computation followed by fee pricing of the aggregate transition
// and the atomic execution under the given strategies.
ProtocolReport run_protocol(const core::Topology& topo,
                            const std::vector<core::Transaction>& txns,
                            const ProtocolConfig& config,
                            const exec::StrategyMap& strategies);

struct PrivacyOutcome {
  bool constraints_ok = false;
  bool views_equal = false;
};

// The indistinguishability experiment: corrupted nodes plus their incident
// edges form the corrupted subgraph (all hubs and their incident edges
// when any hub is corrupted). constraints_ok demands identical restricted
// flows and identical involved-user sets across the two transaction lists;
// views_equal is byte-identity of every corrupted user's view.
PrivacyOutcome privacy_experiment(const core::Topology& topo,
                                  const std::set<core::NodeId>& corrupted,
                                  const std::vector<core::Transaction>& t0,
                                  const std::vector<core::Transaction>& t1,
                                  const ProtocolConfig& config);

}  // namespace txagg::protocol
