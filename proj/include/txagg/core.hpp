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
// Domain model for the restricted hub/client payment channel network:
// channels, the inter-hub channel factory, demand vectors, flows,
// feasibility checks and fee accounting. Everything here is exact integer
// arithmetic on value types; all operations are pure functions.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace txagg::core {

// All balances, capacities and transaction amounts are non-negative
// integers ("coins"). No floating point anywhere in the core.
using Amount = std::uint64_t;
using NodeId = std::string;

inline constexpr std::uint32_t kPpmDenominator = 1'000'000;

struct UnknownNodeError : std::runtime_error {
  explicit UnknownNodeError(const std::string& node)
      : std::runtime_error("unknown node: " + node) {}
};

struct StructureMismatchError : std::runtime_error {
  explicit StructureMismatchError(const std::string& what)
      : std::runtime_error("topology structure mismatch: " + what) {}
};

struct InfeasibleFlowError : std::runtime_error {
  explicit InfeasibleFlowError(const std::string& what)
      : std::runtime_error("infeasible flow: " + what) {}
};

// One client<->hub payment channel. cap_out is the client's balance
// (client->hub direction), cap_in the hub's balance (hub->client).
// cap_out + cap_in is conserved by every update.
struct ChannelState {
  NodeId client;
  NodeId hub;
  Amount cap_out = 0;
  Amount cap_in = 0;
  Amount fee_base = 0;
  std::uint32_t fee_prop_ppm = 0;  // < 1,000,000
};

// The inter-hub channel factory. Total capacity sum(balances) is invariant
// under any state transition; a zero-sum demand (d_1..d_h) is routable iff
// d_i <= balances[i] for every hub.
struct FactoryState {
  std::vector<NodeId> hubs;
  std::vector<Amount> balances;
  std::vector<Amount> fee_base;
  std::vector<std::uint32_t> fee_prop_ppm;

  std::optional<std::size_t> index_of(const NodeId& hub) const;
};

struct Topology {
  FactoryState factory;
  std::map<NodeId, ChannelState> clients;  // keyed by client id

  bool has_node(const NodeId& id) const;
  bool is_hub(const NodeId& id) const;
  // The hub a node hangs off: the node itself for hubs, the channel's hub
  // for clients. Throws UnknownNodeError otherwise.
  const NodeId& hub_of(const NodeId& id) const;
  // Structural invariants: clients map to existing hubs, key == client id,
  // factory vectors aligned. Throws StructureMismatchError.
  void check() const;
  Amount total_coins() const;
};

struct Transaction {
  std::string id;
  NodeId sender;
  NodeId recipient;
  Amount amount = 0;  // zero permitted (protocol padding), contributes 0
};

// Throws std::invalid_argument on sender == recipient.
Transaction make_transaction(std::string id, NodeId sender, NodeId recipient,
                             Amount amount);

// Per-node signed net of a transaction list; zero entries are not stored
// and the stored entries always sum to zero.
struct DemandVector {
  std::map<NodeId, std::int64_t> entries;

  std::int64_t at(const NodeId& id) const;
  void add(const NodeId& id, std::int64_t delta);
  DemandVector& operator+=(const DemandVector& other);
  bool operator==(const DemandVector& other) const = default;
};

// Canonical netted flow: each client channel carries flow in one direction
// only (positive = client sends to its hub), and factory_demand holds the
// per-hub net factory outflow, summing to zero. Zero client entries are
// not stored.
struct Flow {
  std::map<NodeId, std::int64_t> client_net;
  std::vector<std::int64_t> factory_demand;  // aligned with factory.hubs

  bool is_zero() const;
  bool operator==(const Flow& other) const = default;
};

struct FeeReport {
  std::map<NodeId, Amount> per_channel;  // keyed by client id, hub side only
  Amount factory = 0;
  Amount total = 0;
};

// Infeasibility as a value: carries the first violated constraint.
struct Infeasible {
  std::string constraint;
};

using RouteResult = std::variant<Flow, Infeasible>;

inline const Flow* flow_of(const RouteResult& r) {
  return std::get_if<Flow>(&r);
}
inline const Infeasible* infeasible_of(const RouteResult& r) {
  return std::get_if<Infeasible>(&r);
}

// Signed net per node: +amount at the sender, -amount at the recipient.
DemandVector aggregate_demand(const std::vector<Transaction>& txns);

// Routes d through the restricted topology. The flow is unique here:
// client_net(v) = d(v) for clients, factory_demand(h) = d(h) + sum of d
// over h's clients. Returns Infeasible with the first violated constraint;
// throws UnknownNodeError for nodes outside topo. d must sum to zero.
RouteResult route_demand(const Topology& topo, const DemandVector& d);

// True iff every client entry fits the directed channel capacity and every
// factory entry is at most that hub's balance.
bool check_flow_feasible(const Topology& topo, const Flow& f);

// New topology with balances shifted by f. Channel totals and the factory
// total are unchanged. Throws InfeasibleFlowError if f does not fit.
Topology apply_flow(const Topology& topo, const Flow& f);

// Fee for the state transition before -> after. Forwarding fees accrue to
// the party whose service balance decreases: the hub side (cap_in) of each
// client channel and each factory hub with a balance decrease d > 0 charge
// fee_base + ceil(fee_prop_ppm * d / 1e6); zero decrease means zero fee.
// This family satisfies F(a,c) <= F(a,b) + F(b,c), which the property
// suite re-verifies under the ceiling rounding rather than assuming.
FeeReport transition_fee(const Topology& before, const Topology& after);

struct SequentialOutcome {
  bool feasible = false;
  Topology final_topology;
  FeeReport fees;
  std::size_t failed_index = 0;  // meaningful when !feasible
};

// Routes and applies each transaction one at a time, accumulating
// transition fees; on failure reports the first infeasible index.
SequentialOutcome sequential_execute(const Topology& topo,
                                     const std::vector<Transaction>& txns);

// ceil(ppm * amount / 1e6) exactly.
Amount prop_fee_ceil(std::uint32_t ppm, Amount amount);

}  // namespace txagg::core
