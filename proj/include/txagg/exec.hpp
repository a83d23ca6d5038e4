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
// Atomic multi-channel update state machine over a simulated ledger:
// either every channel update in the flow's support applies, or none.
// Receivers create epoch transactions with one dust output per receiver;
// senders sign them; payments keyed to a posted epoch must be spent before
// the timeout or everyone is refunded. Signatures are acknowledgement
// events, not cryptography; the machine enforces the same dependency
// structure.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "txagg/core.hpp"

namespace txagg::exec {

struct MissingStrategyError : std::runtime_error {
  explicit MissingStrategyError(const std::string& what)
      : std::runtime_error("strategy for unknown party: " + what) {}
};

enum class StrategyKind {
  kHonest,
  kWithholdSenderSignature,
  kWithholdAllEpochPosts,
  kReceiverNoSpend,
  kCrashAtPhase,
};

struct AdversaryStrategy {
  StrategyKind kind = StrategyKind::kHonest;
  std::size_t crash_phase = 0;  // 1..5, used by kCrashAtPhase
};

// Parties not present act honestly.
using StrategyMap = std::map<core::NodeId, AdversaryStrategy>;

struct LedgerEvent {
  std::uint64_t height = 0;
  std::string party;  // per-run pseudonymous alias, p1, p2, ...
  std::string kind;
  std::string detail;
};

// Discrete-height append-only ledger.
struct Ledger {
  std::uint64_t height = 0;
  std::vector<LedgerEvent> posted;
};

inline Ledger advance_ledger(Ledger ledger, std::uint64_t delta) {
  ledger.height += delta;
  return ledger;
}

struct ChannelUpdate {
  std::string id;  // client id, or "factory" for factory-internal edges
  core::NodeId sender;    // party whose balance decreases
  core::NodeId receiver;  // party whose balance increases
  core::Amount amount = 0;
  std::pair<core::Amount, core::Amount> before;  // (sender side, receiver side)
  std::pair<core::Amount, core::Amount> after;
};

struct ChannelUpdateSet {
  std::vector<ChannelUpdate> updates;
  std::uint64_t timeout = 10;  // T, in ledger heights
  core::Amount epsilon = 1;    // dust output per receiver
};

// Derives the update set from a feasible flow: one update per client
// channel in the support, and the factory transition decomposed into
// sender-to-receiver edges by matching decreasing against increasing hub
// balances in hub order.
ChannelUpdateSet plan_updates(const core::Topology& topo,
                              const core::Flow& flow, std::uint64_t timeout,
                              core::Amount epsilon);

struct ExecutionOutcome {
  bool committed = false;
  core::Topology final_topology;
  std::vector<LedgerEvent> events;
  bool refunds_issued = false;
};

// The phased execution engine. The phase list is fixed; its length does
// not depend on the number of channels being updated.
class Engine {
 public:
  static constexpr std::size_t kPhaseCount = 6;

  Engine(core::Topology topo, core::Flow flow, StrategyMap strategies,
         std::uint64_t timeout, core::Amount epsilon);

  // Runs the off-chain phases (create, sign, prepare, post, spend) at the
  // current height and commits immediately when everything is in place.
  void run_phases();

  // Advances the ledger; at start + timeout an unresolved execution
  // refunds everyone.
  void advance(std::uint64_t delta);

  bool resolved() const { return committed_ || refunded_; }
  ExecutionOutcome outcome() const;
  const Ledger& ledger() const { return ledger_; }

 private:
  struct EpochTx {
    core::NodeId creator;
    bool created = false;
    std::set<core::NodeId> signatures;
    bool posted = false;
  };

  bool active(const core::NodeId& party, std::size_t phase) const;
  AdversaryStrategy strategy(const core::NodeId& party) const;
  const std::string& alias(const core::NodeId& party);
  void emit(const core::NodeId& party, std::string kind, std::string detail);
  void check_conservation() const;
  bool fully_signed(const EpochTx& epoch) const;
  void try_commit();
  void refund();

  core::Topology initial_;
  core::Flow flow_;
  StrategyMap strategies_;
  std::uint64_t timeout_;
  core::Amount epsilon_;
  std::uint64_t start_height_ = 0;

  ChannelUpdateSet plan_;
  std::vector<core::NodeId> senders_;    // unique, sorted
  std::vector<core::NodeId> receivers_;  // unique, sorted
  std::vector<EpochTx> epochs_;          // one per receiver
  std::vector<bool> payment_ready_;      // per update
  std::vector<bool> payment_spent_;      // per update
  std::map<core::NodeId, core::Amount> wallets_;
  std::map<core::NodeId, core::Amount> escrow_;
  core::Amount initial_total_ = 0;

  Ledger ledger_;
  std::map<core::NodeId, std::string> aliases_;
  bool phases_run_ = false;
  bool committed_ = false;
  bool refunded_ = false;
};

// Full run: pre-checks the flow, runs the phases, resolves by advancing to
// the timeout when necessary. Throws InfeasibleFlowError for flows that do
// not fit the topology and MissingStrategyError when the strategy map
// names a party outside the topology.
ExecutionOutcome execute_atomic(const core::Topology& topo,
                                const core::Flow& flow,
                                const StrategyMap& strategies,
                                std::uint64_t timeout, core::Amount epsilon);

}  // namespace txagg::exec
