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

#include "txagg/core.hpp"

#include <algorithm>
#include <numeric>

namespace txagg::core {

namespace {

std::string fmt_signed(std::int64_t v) { return std::to_string(v); }

}  // namespace

std::optional<std::size_t> FactoryState::index_of(const NodeId& hub) const {
  for (std::size_t i = 0; i < hubs.size(); ++i) {
    if (hubs[i] == hub) return i;
  }
  return std::nullopt;
}

bool Topology::has_node(const NodeId& id) const {
  return is_hub(id) || clients.count(id) > 0;
}

bool Topology::is_hub(const NodeId& id) const {
  return factory.index_of(id).has_value();
}

const NodeId& Topology::hub_of(const NodeId& id) const {
  if (is_hub(id)) {
    return factory.hubs[*factory.index_of(id)];
  }
  auto it = clients.find(id);
  if (it == clients.end()) throw UnknownNodeError(id);
  return it->second.hub;
}

void Topology::check() const {
  const std::size_t h = factory.hubs.size();
  if (factory.balances.size() != h || factory.fee_base.size() != h ||
      factory.fee_prop_ppm.size() != h) {
    throw StructureMismatchError("factory vectors not aligned with hubs");
  }
  for (std::size_t i = 0; i < h; ++i) {
    if (factory.fee_prop_ppm[i] >= kPpmDenominator) {
      throw StructureMismatchError("factory fee_prop_ppm out of range at " +
                                   factory.hubs[i]);
    }
    for (std::size_t j = i + 1; j < h; ++j) {
      if (factory.hubs[i] == factory.hubs[j]) {
        throw StructureMismatchError("duplicate hub id " + factory.hubs[i]);
      }
    }
  }
  for (const auto& [id, ch] : clients) {
    if (ch.client != id) {
      throw StructureMismatchError("client map key " + id +
                                   " does not match channel client " +
                                   ch.client);
    }
    if (is_hub(id)) {
      throw StructureMismatchError("node " + id + " is both hub and client");
    }
    if (!is_hub(ch.hub)) {
      throw StructureMismatchError("client " + id + " attached to unknown hub " +
                                   ch.hub);
    }
    if (ch.fee_prop_ppm >= kPpmDenominator) {
      throw StructureMismatchError("channel fee_prop_ppm out of range at " + id);
    }
  }
}

Amount Topology::total_coins() const {
  Amount total = std::accumulate(factory.balances.begin(),
                                 factory.balances.end(), Amount{0});
  for (const auto& [id, ch] : clients) total += ch.cap_out + ch.cap_in;
  return total;
}

Transaction make_transaction(std::string id, NodeId sender, NodeId recipient,
                             Amount amount) {
  if (sender == recipient) {
    throw std::invalid_argument("transaction " + id +
                                ": sender equals recipient");
  }
  return Transaction{std::move(id), std::move(sender), std::move(recipient),
                     amount};
}

std::int64_t DemandVector::at(const NodeId& id) const {
  auto it = entries.find(id);
  return it == entries.end() ? 0 : it->second;
}

void DemandVector::add(const NodeId& id, std::int64_t delta) {
  if (delta == 0) return;
  auto [it, inserted] = entries.try_emplace(id, delta);
  if (!inserted) {
    it->second += delta;
    if (it->second == 0) entries.erase(it);
  }
}

DemandVector& DemandVector::operator+=(const DemandVector& other) {
  for (const auto& [id, v] : other.entries) add(id, v);
  return *this;
}

bool Flow::is_zero() const {
  if (!client_net.empty()) return false;
  return std::all_of(factory_demand.begin(), factory_demand.end(),
                     [](std::int64_t v) { return v == 0; });
}

DemandVector aggregate_demand(const std::vector<Transaction>& txns) {
  DemandVector d;
  for (const Transaction& t : txns) {
    d.add(t.sender, static_cast<std::int64_t>(t.amount));
    d.add(t.recipient, -static_cast<std::int64_t>(t.amount));
  }
  return d;
}

RouteResult route_demand(const Topology& topo, const DemandVector& d) {
  std::int64_t sum = 0;
  for (const auto& [id, v] : d.entries) {
    if (!topo.has_node(id)) throw UnknownNodeError(id);
    sum += v;
  }
  if (sum != 0) {
    throw std::invalid_argument("demand vector does not sum to zero");
  }

  Flow f;
  f.factory_demand.assign(topo.factory.hubs.size(), 0);
  for (std::size_t i = 0; i < topo.factory.hubs.size(); ++i) {
    f.factory_demand[i] = d.at(topo.factory.hubs[i]);
  }
  for (const auto& [id, ch] : topo.clients) {
    const std::int64_t net = d.at(id);
    if (net == 0) continue;
    if (net > 0 && static_cast<Amount>(net) > ch.cap_out) {
      return Infeasible{"client " + id + " net " + fmt_signed(net) +
                        " exceeds cap_out " + std::to_string(ch.cap_out)};
    }
    if (net < 0 && static_cast<Amount>(-net) > ch.cap_in) {
      return Infeasible{"client " + id + " net " + fmt_signed(net) +
                        " exceeds cap_in " + std::to_string(ch.cap_in)};
    }
    f.client_net.emplace(id, net);
    f.factory_demand[*topo.factory.index_of(ch.hub)] += net;
  }
  for (std::size_t i = 0; i < f.factory_demand.size(); ++i) {
    if (f.factory_demand[i] > 0 &&
        static_cast<Amount>(f.factory_demand[i]) > topo.factory.balances[i]) {
      return Infeasible{"factory hub " + topo.factory.hubs[i] + " demand " +
                        fmt_signed(f.factory_demand[i]) + " exceeds balance " +
                        std::to_string(topo.factory.balances[i])};
    }
  }
  return f;
}

bool check_flow_feasible(const Topology& topo, const Flow& f) {
  if (f.factory_demand.size() != topo.factory.hubs.size()) return false;
  for (const auto& [id, net] : f.client_net) {
    auto it = topo.clients.find(id);
    if (it == topo.clients.end()) throw UnknownNodeError(id);
    const ChannelState& ch = it->second;
    if (net > 0 && static_cast<Amount>(net) > ch.cap_out) return false;
    if (net < 0 && static_cast<Amount>(-net) > ch.cap_in) return false;
  }
  for (std::size_t i = 0; i < f.factory_demand.size(); ++i) {
    if (f.factory_demand[i] > 0 &&
        static_cast<Amount>(f.factory_demand[i]) > topo.factory.balances[i]) {
      return false;
    }
  }
  return true;
}

Topology apply_flow(const Topology& topo, const Flow& f) {
  if (!check_flow_feasible(topo, f)) {
    throw InfeasibleFlowError("apply_flow called with an infeasible flow");
  }
  Topology next = topo;
  for (const auto& [id, net] : f.client_net) {
    ChannelState& ch = next.clients.at(id);
    if (net > 0) {
      ch.cap_out -= static_cast<Amount>(net);
      ch.cap_in += static_cast<Amount>(net);
    } else {
      ch.cap_in -= static_cast<Amount>(-net);
      ch.cap_out += static_cast<Amount>(-net);
    }
  }
  for (std::size_t i = 0; i < f.factory_demand.size(); ++i) {
    const std::int64_t dem = f.factory_demand[i];
    if (dem > 0) {
      next.factory.balances[i] -= static_cast<Amount>(dem);
    } else {
      next.factory.balances[i] += static_cast<Amount>(-dem);
    }
  }
  return next;
}

Amount prop_fee_ceil(std::uint32_t ppm, Amount amount) {
  const unsigned __int128 num =
      static_cast<unsigned __int128>(ppm) * amount + (kPpmDenominator - 1);
  return static_cast<Amount>(num / kPpmDenominator);
}

FeeReport transition_fee(const Topology& before, const Topology& after) {
  if (before.factory.hubs != after.factory.hubs ||
      before.clients.size() != after.clients.size()) {
    throw StructureMismatchError("before/after disagree on nodes");
  }
  FeeReport report;
  for (const auto& [id, ch] : before.clients) {
    auto it = after.clients.find(id);
    if (it == after.clients.end()) throw StructureMismatchError("client " + id);
    const ChannelState& ach = it->second;
    if (ch.cap_out + ch.cap_in != ach.cap_out + ach.cap_in) {
      throw StructureMismatchError("channel total changed at " + id);
    }
    // Hub-side decrease only: the hub charges for forwarding out of its
    // balance; a client spending its own cap_out is not a service.
    if (ach.cap_in < ch.cap_in) {
      const Amount delta = ch.cap_in - ach.cap_in;
      const Amount fee = ch.fee_base + prop_fee_ceil(ch.fee_prop_ppm, delta);
      report.per_channel.emplace(id, fee);
      report.total += fee;
    }
  }
  Amount before_total = 0;
  Amount after_total = 0;
  for (std::size_t i = 0; i < before.factory.hubs.size(); ++i) {
    before_total += before.factory.balances[i];
    after_total += after.factory.balances[i];
    if (after.factory.balances[i] < before.factory.balances[i]) {
      const Amount delta =
          before.factory.balances[i] - after.factory.balances[i];
      report.factory += before.factory.fee_base[i] +
                        prop_fee_ceil(before.factory.fee_prop_ppm[i], delta);
    }
  }
  if (before_total != after_total) {
    throw StructureMismatchError("factory total changed");
  }
  report.total += report.factory;
  return report;
}

SequentialOutcome sequential_execute(const Topology& topo,
                                     const std::vector<Transaction>& txns) {
  SequentialOutcome out;
  out.final_topology = topo;
  for (std::size_t i = 0; i < txns.size(); ++i) {
    const RouteResult routed =
        route_demand(out.final_topology, aggregate_demand({txns[i]}));
    const Flow* f = flow_of(routed);
    if (f == nullptr) {
      out.feasible = false;
      out.failed_index = i;
      out.final_topology = topo;
      out.fees = FeeReport{};
      return out;
    }
    Topology next = apply_flow(out.final_topology, *f);
    const FeeReport step = transition_fee(out.final_topology, next);
    for (const auto& [id, fee] : step.per_channel) {
      out.fees.per_channel[id] += fee;
    }
    out.fees.factory += step.factory;
    out.fees.total += step.total;
    out.final_topology = std::move(next);
  }
  out.feasible = true;
  return out;
}

}  // namespace txagg::core
