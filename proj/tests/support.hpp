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
// Builders and seeded generators shared by the test suites.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "txagg/core.hpp"
#include "txagg/protocol.hpp"
#include "txagg/rng.hpp"
#include "txagg/solver.hpp"

namespace txagg::test {

struct ClientSpec {
  std::string id;
  std::string hub;
  core::Amount cap_out = 100;
  core::Amount cap_in = 100;
  core::Amount fee_base = 0;
  std::uint32_t fee_prop_ppm = 0;
};

inline core::Topology make_topology(
    const std::vector<std::pair<std::string, core::Amount>>& hubs,
    const std::vector<ClientSpec>& clients, core::Amount hub_fee_base = 0,
    std::uint32_t hub_fee_ppm = 0) {
  core::Topology topo;
  for (const auto& [id, balance] : hubs) {
    topo.factory.hubs.push_back(id);
    topo.factory.balances.push_back(balance);
    topo.factory.fee_base.push_back(hub_fee_base);
    topo.factory.fee_prop_ppm.push_back(hub_fee_ppm);
  }
  for (const ClientSpec& c : clients) {
    topo.clients.emplace(c.id, core::ChannelState{c.id, c.hub, c.cap_out,
                                                  c.cap_in, c.fee_base,
                                                  c.fee_prop_ppm});
  }
  topo.check();
  return topo;
}

// The worked two-channel-factory example: three 10-coin transactions on a
// two-hub topology with empty factory balances, where only a netted pair
// is feasible.
inline core::Topology netting_topology() {
  return make_topology({{"v3", 0}, {"v6", 0}},
                       {{"v1", "v6", 100, 100, 1, 10000},
                        {"v2", "v3", 10, 10, 1, 10000},
                        {"v4", "v3", 100, 100, 1, 10000},
                        {"v5", "v6", 10, 10, 1, 10000}},
                       /*hub_fee_base=*/1, /*hub_fee_ppm=*/10000);
}

inline std::vector<core::Transaction> netting_txns() {
  return {core::make_transaction("t1", "v1", "v3", 10),
          core::make_transaction("t2", "v1", "v3", 10),
          core::make_transaction("t3", "v4", "v6", 10)};
}

// Raw instance with columns in id order; sender/recipient given as hub row
// indices (equal rows make a zero column).
inline solver::IlpInstance make_instance(
    std::size_t num_hubs, const std::vector<core::Amount>& cover,
    const std::vector<std::tuple<std::string, std::size_t, std::size_t,
                                 core::Amount>>& txns) {
  solver::IlpInstance inst;
  inst.num_hubs = num_hubs;
  inst.num_txns = txns.size();
  inst.matrix.assign(num_hubs, std::vector<std::int64_t>(txns.size(), 0));
  inst.cover = cover;
  inst.upper.assign(txns.size(), 1);
  for (std::size_t j = 0; j < txns.size(); ++j) {
    const auto& [id, s, r, w] = txns[j];
    if (s != r) {
      inst.matrix[s][j] += static_cast<std::int64_t>(w);
      inst.matrix[r][j] -= static_cast<std::int64_t>(w);
      inst.delta = std::max(inst.delta, w);
    }
    inst.weights.push_back(w);
    inst.txn_ids.push_back(id);
  }
  return inst;
}

inline std::string padded_index(std::size_t i, std::size_t width = 3) {
  std::string s = std::to_string(i);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

// Random raw instance in the oracle-equivalence regime: ids are zero-padded
// in input order, so column order equals id order.
inline solver::IlpInstance random_instance(SplitMix64& rng,
                                           std::size_t max_hubs = 4,
                                           std::size_t max_txns = 14,
                                           core::Amount max_amount = 9,
                                           core::Amount max_balance = 30) {
  const std::size_t h = 2 + rng.below(max_hubs - 1);
  const std::size_t k = rng.below(max_txns + 1);
  std::vector<core::Amount> cover(h);
  for (auto& b : cover) b = rng.below(max_balance + 1);
  std::vector<std::tuple<std::string, std::size_t, std::size_t, core::Amount>>
      txns;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t s = rng.below(h);
    std::size_t r = rng.below(h);
    // Mostly inter-hub columns, with occasional zero columns (intra-hub)
    // and occasional zero amounts to exercise the forced-inclusion rule.
    core::Amount w = rng.below(10) == 0 ? 0 : 1 + rng.below(max_amount);
    txns.emplace_back("t" + padded_index(j), s, r, w);
  }
  return make_instance(h, cover, txns);
}

struct RandomScenario {
  core::Topology topology;
  std::vector<core::Transaction> txns;
};

// Random hub/client scenario; amounts are small against the client caps so
// input validation keeps everything unless `tight` is requested.
inline RandomScenario random_scenario(SplitMix64& rng, std::size_t max_hubs = 4,
                                      std::size_t max_txns = 10,
                                      core::Amount max_amount = 9,
                                      core::Amount max_balance = 30,
                                      bool tight_clients = false) {
  RandomScenario sc;
  const std::size_t h = 2 + rng.below(max_hubs - 1);
  std::vector<std::pair<std::string, core::Amount>> hubs;
  for (std::size_t i = 0; i < h; ++i) {
    hubs.emplace_back("h" + std::to_string(i + 1), rng.below(max_balance + 1));
  }
  std::vector<ClientSpec> clients;
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < h; ++i) {
    const std::size_t n = 1 + rng.below(3);
    for (std::size_t c = 0; c < n; ++c) {
      ClientSpec spec;
      spec.id = "c" + std::to_string(i + 1) + std::to_string(c + 1);
      spec.hub = hubs[i].first;
      spec.cap_out = tight_clients ? 5 + rng.below(20) : 200 + rng.below(200);
      spec.cap_in = tight_clients ? 5 + rng.below(20) : 200 + rng.below(200);
      spec.fee_base = rng.below(3);
      spec.fee_prop_ppm = static_cast<std::uint32_t>(rng.below(200000));
      clients.push_back(spec);
      nodes.push_back(spec.id);
    }
  }
  sc.topology = make_topology(hubs, clients, rng.below(3),
                              static_cast<std::uint32_t>(rng.below(200000)));
  const std::size_t k = rng.below(max_txns + 1);
  for (std::size_t j = 0; j < k; ++j) {
    const std::string& s = nodes[rng.below(nodes.size())];
    std::string r = nodes[rng.below(nodes.size())];
    if (r == s) r = sc.topology.clients.at(s).hub;
    const core::Amount w = rng.below(10) == 0 ? 0 : 1 + rng.below(max_amount);
    sc.txns.push_back(
        core::make_transaction("t" + padded_index(j), s, r, w));
  }
  return sc;
}

struct PrivacyPair {
  core::Topology topology;
  std::set<core::NodeId> corrupted;
  std::vector<core::Transaction> t0;
  std::vector<core::Transaction> t1;
  protocol::ProtocolConfig config;
};

// An admissible game pair: generous capacities keep every transaction
// selected, and t1 differs from t0 only by splitting transactions whose
// endpoints are both uncorrupted, which preserves the aggregate flow, the
// involved-user set and every corrupted user's own transactions.
inline PrivacyPair random_privacy_pair(SplitMix64& rng) {
  PrivacyPair pair;
  const std::size_t h = 2 + rng.below(3);
  std::vector<std::pair<std::string, core::Amount>> hubs;
  for (std::size_t i = 0; i < h; ++i) {
    hubs.emplace_back("h" + std::to_string(i + 1), 1000);
  }
  std::vector<ClientSpec> clients;
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      ClientSpec spec;
      spec.id = "c" + std::to_string(i + 1) + std::to_string(c + 1);
      spec.hub = hubs[i].first;
      spec.cap_out = 2000;
      spec.cap_in = 2000;
      clients.push_back(spec);
      nodes.push_back(spec.id);
    }
  }
  pair.topology = make_topology(hubs, clients, rng.below(3),
                                static_cast<std::uint32_t>(rng.below(100000)));

  const std::size_t corrupt_count = 1 + rng.below(2);
  for (std::size_t i = 0; i < corrupt_count; ++i) {
    if (rng.below(3) == 0) {
      pair.corrupted.insert(hubs[rng.below(h)].first);
    } else {
      pair.corrupted.insert(nodes[rng.below(nodes.size())]);
    }
  }

  const std::size_t k = 3 + rng.below(5);
  for (std::size_t j = 0; j < k; ++j) {
    const std::string& s = nodes[rng.below(nodes.size())];
    std::string r = nodes[rng.below(nodes.size())];
    if (r == s) r = pair.topology.clients.at(s).hub;
    pair.t0.push_back(core::make_transaction("s" + padded_index(j), s, r,
                                             2 + rng.below(8)));
  }

  pair.t1 = pair.t0;
  bool changed = false;
  std::vector<core::Transaction> transformed;
  for (const core::Transaction& t : pair.t1) {
    const bool touchable = !pair.corrupted.count(t.sender) &&
                           !pair.corrupted.count(t.recipient) &&
                           t.amount >= 2;
    if (touchable && (rng.coin() || !changed)) {
      const core::Amount first = 1 + rng.below(t.amount - 1);
      transformed.push_back(core::make_transaction(t.id + "-a", t.sender,
                                                   t.recipient, first));
      transformed.push_back(core::make_transaction(
          t.id + "-b", t.sender, t.recipient, t.amount - first));
      changed = true;
    } else {
      transformed.push_back(t);
    }
  }
  pair.t1 = std::move(transformed);

  pair.config.num_delegates = 1 + rng.below(h);
  pair.config.pad_to = 2 * k + 2;
  pair.config.solver_choice.kind = solver::SolverKind::kDp;
  for (std::size_t i = 0; i < pair.config.randomness_seed.size(); ++i) {
    pair.config.randomness_seed[i] = static_cast<std::uint8_t>(rng.below(256));
  }
  return pair;
}

}  // namespace txagg::test
