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

#include "txagg/protocol.hpp"

#include <algorithm>
#include <sstream>

namespace txagg::protocol {

namespace {

constexpr const char* kPadPrefix = "pad-";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t x = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    x = (x ^ c) * 0x100000001b3ULL;
  }
  return x;
}

std::uint64_t fold_seed(const sharing::Seed& seed) {
  std::uint64_t x = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : seed) {
    x = (x ^ b) * 0x100000001b3ULL;
  }
  return x;
}

std::vector<core::NodeId> all_users(const core::Topology& topo) {
  std::vector<core::NodeId> users;
  for (const auto& [id, ch] : topo.clients) users.push_back(id);
  for (const auto& hub : topo.factory.hubs) users.push_back(hub);
  std::sort(users.begin(), users.end());
  return users;
}

// Deterministic padding counterparty: clients pad toward their hub, hubs
// toward the next hub in factory order (or their first client when the
// factory has a single hub).
std::optional<core::NodeId> pad_recipient(const core::Topology& topo,
                                          const core::NodeId& user) {
  if (!topo.is_hub(user)) return topo.clients.at(user).hub;
  if (topo.factory.hubs.size() > 1) {
    const std::size_t i = *topo.factory.index_of(user);
    return topo.factory.hubs[(i + 1) % topo.factory.hubs.size()];
  }
  for (const auto& [id, ch] : topo.clients) {
    if (ch.hub == user) return id;
  }
  return std::nullopt;
}

std::vector<std::uint64_t> serialize_input(const UserInput& input) {
  std::vector<std::uint64_t> words;
  sharing::append_string(words, input.user);
  sharing::append_word(words, input.padded_txns.size());
  for (const core::Transaction& t : input.padded_txns) {
    sharing::append_string(words, t.id);
    sharing::append_string(words, t.recipient);
    sharing::append_word(words, t.amount);
  }
  sharing::append_word(words, input.balances.size());
  for (core::Amount b : input.balances) sharing::append_word(words, b);
  return words;
}

UserInput parse_input(const std::vector<std::uint64_t>& words) {
  sharing::WordReader reader{words};
  UserInput input;
  input.user = reader.take_string();
  const std::uint64_t count = reader.take();
  input.padded_txns.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string id = reader.take_string();
    const std::string recipient = reader.take_string();
    const core::Amount amount = reader.take();
    input.padded_txns.push_back(
        core::make_transaction(id, input.user, recipient, amount));
  }
  const std::uint64_t balance_count = reader.take();
  for (std::uint64_t i = 0; i < balance_count; ++i) {
    input.balances.push_back(reader.take());
  }
  if (!reader.done()) {
    throw std::logic_error("committee reconstruction left trailing words");
  }
  return input;
}

std::vector<core::Amount> adjacent_balances(const core::Topology& topo,
                                            const core::NodeId& user) {
  if (topo.is_hub(user)) {
    return {topo.factory.balances[*topo.factory.index_of(user)]};
  }
  const core::ChannelState& ch = topo.clients.at(user);
  return {ch.cap_out, ch.cap_in};
}

}  // namespace

std::vector<sharing::Share> share_input(const UserInput& input,
                                        std::size_t k_d, SplitMix64& rng) {
  return sharing::share_words(input.user, serialize_input(input), k_d, rng);
}

UserInput reconstruct_input(const std::vector<sharing::Share>& shares,
                            std::size_t k_d) {
  return parse_input(sharing::reconstruct_words(shares, k_d));
}

std::string to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::kNotSubmitted:
      return "NotSubmitted";
    case AbortReason::kEndpointMismatch:
      return "EndpointMismatch";
    case AbortReason::kFlowMismatch:
      return "FlowMismatch";
    case AbortReason::kNetFlowViolation:
      return "NetFlowViolation";
  }
  return "Unknown";
}

std::string UserView::canonical_string() const {
  std::ostringstream out;
  out << "user=" << user << "\n";
  out << "txns=";
  for (const ViewTxn& t : restricted_txns) {
    out << t.txn_id << ":" << t.amount << ":" << t.counterparty_role << ";";
  }
  out << "\nflow=";
  for (const auto& [edge, value] : incident_flow) {
    out << edge << "=" << value << ";";
  }
  out << "\ninvolved=" << involved_count << "\n";
  return out.str();
}

ValidationResult validate_inputs(const core::Topology& topo,
                                 const std::vector<core::Transaction>& txns) {
  ValidationResult result;
  result.kept = txns;
  std::set<std::pair<core::NodeId, std::string>> rejected;

  bool changed = true;
  while (changed) {
    changed = false;

    // Outgoing pass: totals over the current list, drops applied at once.
    std::map<core::NodeId, core::Amount> out_sum;
    for (const core::Transaction& t : result.kept) {
      if (!topo.is_hub(t.sender)) out_sum[t.sender] += t.amount;
    }
    std::set<core::NodeId> drop_out;
    for (const auto& [client, sum] : out_sum) {
      // All-zero direction sums never reject: protocol padding must not
      // change validation outcomes, even against a zero-capacity channel.
      if (sum == 0) continue;
      if (sum >= topo.clients.at(client).cap_out) {
        drop_out.insert(client);
        if (rejected.emplace(client, "outgoing-capacity").second) {
          changed = true;
        }
      }
    }
    if (!drop_out.empty()) {
      std::erase_if(result.kept, [&](const core::Transaction& t) {
        return drop_out.count(t.sender) > 0;
      });
    }

    // Incoming pass over the reduced list.
    std::map<core::NodeId, core::Amount> in_sum;
    for (const core::Transaction& t : result.kept) {
      if (!topo.is_hub(t.recipient)) in_sum[t.recipient] += t.amount;
    }
    std::set<core::NodeId> drop_in;
    for (const auto& [client, sum] : in_sum) {
      if (sum == 0) continue;
      if (sum >= topo.clients.at(client).cap_in) {
        drop_in.insert(client);
        if (rejected.emplace(client, "incoming-capacity").second) {
          changed = true;
        }
      }
    }
    if (!drop_in.empty()) {
      std::erase_if(result.kept, [&](const core::Transaction& t) {
        return drop_in.count(t.recipient) > 0;
      });
    }
  }

  for (const auto& [user, reason] : rejected) {
    result.rejected.push_back(RejectedUser{user, reason});
  }
  return result;
}

FlowComputationResult run_flow_computation(
    const core::Topology& topo, const std::vector<core::Transaction>& txns,
    const ProtocolConfig& config) {
  topo.check();
  FlowComputationResult result;
  const std::vector<core::NodeId> users = all_users(topo);

  std::map<core::NodeId, std::vector<core::Transaction>> per_user;
  for (const core::NodeId& u : users) per_user[u];
  for (const core::Transaction& t : txns) {
    if (t.id.rfind(kPadPrefix, 0) == 0) {
      throw std::invalid_argument("transaction ids must not use the padding "
                                  "prefix: " +
                                  t.id);
    }
    auto it = per_user.find(t.sender);
    if (it == per_user.end()) throw core::UnknownNodeError(t.sender);
    it->second.push_back(t);
  }

  std::set<std::string> pad_ids;
  for (auto& [user, list] : per_user) {
    if (list.size() > config.pad_to) {
      throw std::invalid_argument("user " + user + " submitted " +
                                  std::to_string(list.size()) +
                                  " transactions, pad_to is " +
                                  std::to_string(config.pad_to));
    }
    const auto filler = pad_recipient(topo, user);
    std::size_t n = 0;
    while (list.size() < config.pad_to && filler.has_value()) {
      std::string id = std::string(kPadPrefix) + user + "-" +
                       std::to_string(n++);
      pad_ids.insert(id);
      list.push_back(core::make_transaction(std::move(id), user, *filler, 0));
    }
  }

  // Sharing phase: each user shares its serialized padded input to the
  // delegate committee; the committee reconstructs and recomputes.
  result.delegates = sharing::select_delegates(
      topo.factory.hubs, config.num_delegates, config.randomness_seed);

  const std::uint64_t seed_word = fold_seed(config.randomness_seed);
  std::vector<core::Transaction> reconstructed;
  for (const core::NodeId& u : users) {
    const UserInput input{u, per_user[u], adjacent_balances(topo, u)};
    SplitMix64 rng(seed_word ^ fnv1a(u));
    const std::vector<sharing::Share> shares =
        share_input(input, config.num_delegates, rng);
    UserInput rebuilt = reconstruct_input(shares, config.num_delegates);
    if (rebuilt.user != input.user ||
        rebuilt.balances != input.balances ||
        rebuilt.padded_txns.size() != input.padded_txns.size()) {
      throw std::logic_error("share reconstruction mismatch for " + u);
    }
    for (std::size_t i = 0; i < rebuilt.padded_txns.size(); ++i) {
      const core::Transaction& a = rebuilt.padded_txns[i];
      const core::Transaction& b = input.padded_txns[i];
      if (a.id != b.id || a.recipient != b.recipient ||
          a.amount != b.amount) {
        throw std::logic_error("share reconstruction mismatch for " + u);
      }
    }
    for (core::Transaction& t : rebuilt.padded_txns) {
      reconstructed.push_back(std::move(t));
    }
  }

  ValidationResult validated = validate_inputs(topo, reconstructed);

  result.rejected = std::move(validated.rejected);
  result.solution = solver::solve_on_topology(topo, validated.kept,
                                              config.solver_choice);

  // Padding is pipeline plumbing: it must never surface in the reported
  // selection or the user views.
  std::erase_if(result.solution.selected, [&](const std::string& id) {
    return pad_ids.count(id) > 0;
  });
  for (const core::Transaction& t : validated.kept) {
    if (!pad_ids.count(t.id)) result.kept.push_back(t);
  }

  std::vector<core::Transaction> selected_txns;
  {
    std::map<std::string, const core::Transaction*> by_id;
    for (const core::Transaction& t : result.kept) by_id.emplace(t.id, &t);
    for (const std::string& id : result.solution.selected) {
      selected_txns.push_back(*by_id.at(id));
    }
  }
  result.views = build_views(topo, selected_txns, result.solution.flow);
  return result;
}

std::map<core::NodeId, UserView> build_views(
    const core::Topology& topo,
    const std::vector<core::Transaction>& selected_txns,
    const core::Flow& flow) {
  auto client_net = [&](const core::NodeId& c) -> std::int64_t {
    auto it = flow.client_net.find(c);
    return it == flow.client_net.end() ? 0 : it->second;
  };

  std::map<core::NodeId, std::vector<ViewTxn>> restricted;
  for (const core::Transaction& t : selected_txns) {
    restricted[t.sender].push_back(ViewTxn{t.id, t.amount, "recipient"});
    restricted[t.recipient].push_back(ViewTxn{t.id, t.amount, "sender"});
  }

  std::set<core::NodeId> involved;
  for (const auto& [u, list] : restricted) {
    if (!list.empty()) involved.insert(u);
  }
  for (const auto& [c, net] : flow.client_net) {
    if (net != 0) {
      involved.insert(c);
      involved.insert(topo.clients.at(c).hub);
    }
  }
  for (std::size_t i = 0; i < flow.factory_demand.size(); ++i) {
    if (flow.factory_demand[i] != 0) involved.insert(topo.factory.hubs[i]);
  }

  std::map<core::NodeId, UserView> views;
  for (const core::NodeId& u : all_users(topo)) {
    UserView view;
    view.user = u;
    view.restricted_txns = restricted.count(u) ? restricted.at(u)
                                               : std::vector<ViewTxn>{};
    std::sort(view.restricted_txns.begin(), view.restricted_txns.end(),
              [](const ViewTxn& a, const ViewTxn& b) {
                return a.txn_id < b.txn_id;
              });
    if (topo.is_hub(u)) {
      for (const auto& [c, ch] : topo.clients) {
        if (ch.hub == u) view.incident_flow[c] = client_net(c);
      }
      for (std::size_t i = 0; i < topo.factory.hubs.size(); ++i) {
        view.incident_flow["factory:" + topo.factory.hubs[i]] =
            flow.factory_demand[i];
      }
    } else {
      view.incident_flow[u] = client_net(u);
    }
    view.involved_count = involved.count(u) ? involved.size() : 0;
    views.emplace(u, std::move(view));
  }
  return views;
}

PeerData gather_peer_data(const core::Topology& topo, const core::NodeId& user,
                          const std::map<core::NodeId, UserView>& views) {
  PeerData peers;
  const UserView& own = views.at(user);
  for (const ViewTxn& t : own.restricted_txns) {
    bool counterparty_listed = false;
    for (const auto& [other, view] : views) {
      if (other == user) continue;
      for (const ViewTxn& vt : view.restricted_txns) {
        if (vt.txn_id == t.txn_id) {
          counterparty_listed = true;
          break;
        }
      }
      if (counterparty_listed) break;
    }
    peers.counterparty_has_txn[t.txn_id] = counterparty_listed;
  }

  if (topo.is_hub(user)) {
    for (const auto& [c, ch] : topo.clients) {
      if (ch.hub != user) continue;
      const UserView& cv = views.at(c);
      auto it = cv.incident_flow.find(c);
      if (it != cv.incident_flow.end()) peers.edge_copies[c] = it->second;
    }
    for (const core::NodeId& h : topo.factory.hubs) {
      const core::NodeId source =
          h != user ? h
                    : (topo.factory.hubs.size() > 1
                           ? (topo.factory.hubs[0] != user
                                  ? topo.factory.hubs[0]
                                  : topo.factory.hubs[1])
                           : user);
      const UserView& hv = views.at(source);
      auto it = hv.incident_flow.find("factory:" + h);
      if (it != hv.incident_flow.end()) {
        peers.edge_copies["factory:" + h] = it->second;
      }
    }
  } else {
    const core::NodeId& hub = topo.clients.at(user).hub;
    const UserView& hv = views.at(hub);
    auto it = hv.incident_flow.find(user);
    if (it != hv.incident_flow.end()) peers.edge_copies[user] = it->second;
  }
  return peers;
}

LocalValidation local_validate(
    const core::NodeId& user, const UserView& view,
    const std::vector<core::Transaction>& own_submitted,
    const PeerData& peers) {
  // (1) every outgoing transaction in the view must have been submitted.
  for (const ViewTxn& t : view.restricted_txns) {
    if (t.counterparty_role != "recipient") continue;  // user is the sender
    const bool submitted = std::any_of(
        own_submitted.begin(), own_submitted.end(),
        [&](const core::Transaction& s) {
          return s.id == t.txn_id && s.amount == t.amount && s.sender == user;
        });
    if (!submitted) {
      return {false, AbortReason::kNotSubmitted, t.txn_id};
    }
  }

  // (2) each transaction appears in both endpoint views.
  for (const ViewTxn& t : view.restricted_txns) {
    auto it = peers.counterparty_has_txn.find(t.txn_id);
    if (it == peers.counterparty_has_txn.end() || !it->second) {
      return {false, AbortReason::kEndpointMismatch, t.txn_id};
    }
  }

  // (3) incident flow entries match the counterparty copies.
  for (const auto& [edge, copy] : peers.edge_copies) {
    auto it = view.incident_flow.find(edge);
    if (it == view.incident_flow.end() || it->second != copy) {
      return {false, AbortReason::kFlowMismatch, edge};
    }
  }

  // (4) the net incident flow equals the aggregate demand of the
  // restricted list.
  std::int64_t demand = 0;
  for (const ViewTxn& t : view.restricted_txns) {
    demand += t.counterparty_role == "recipient"
                  ? static_cast<std::int64_t>(t.amount)
                  : -static_cast<std::int64_t>(t.amount);
  }
  const std::string own_factory = "factory:" + user;
  std::int64_t net = 0;
  if (view.incident_flow.count(own_factory)) {
    net = view.incident_flow.at(own_factory);
    for (const auto& [edge, value] : view.incident_flow) {
      if (edge.rfind("factory:", 0) != 0) net -= value;
    }
  } else {
    auto it = view.incident_flow.find(user);
    if (it == view.incident_flow.end()) {
      return {false, AbortReason::kNetFlowViolation, "missing own channel"};
    }
    net = it->second;
  }
  if (net != demand) {
    return {false, AbortReason::kNetFlowViolation,
            "net " + std::to_string(net) + " vs demand " +
                std::to_string(demand)};
  }
  return {};
}

ProtocolReport run_protocol(const core::Topology& topo,
                            const std::vector<core::Transaction>& txns,
                            const ProtocolConfig& config,
                            const exec::StrategyMap& strategies) {
  FlowComputationResult fc = run_flow_computation(topo, txns, config);
  ProtocolReport report;
  report.fees = core::transition_fee(
      topo, core::apply_flow(topo, fc.solution.flow));
  report.outcome =
      exec::execute_atomic(topo, fc.solution.flow, strategies,
                           config.timeout, config.epsilon_output);
  report.accepted = std::move(fc.solution);
  report.rejected_users = std::move(fc.rejected);
  report.views = std::move(fc.views);
  return report;
}

PrivacyOutcome privacy_experiment(const core::Topology& topo,
                                  const std::set<core::NodeId>& corrupted,
                                  const std::vector<core::Transaction>& t0,
                                  const std::vector<core::Transaction>& t1,
                                  const ProtocolConfig& config) {
  const FlowComputationResult run0 = run_flow_computation(topo, t0, config);
  const FlowComputationResult run1 = run_flow_computation(topo, t1, config);

  // The corrupted subgraph's edge set.
  bool hub_corrupted = false;
  std::set<std::string> edges;
  for (const core::NodeId& c : corrupted) {
    if (!topo.has_node(c)) throw core::UnknownNodeError(c);
    if (topo.is_hub(c)) {
      hub_corrupted = true;
    } else {
      edges.insert(c);
    }
  }
  if (hub_corrupted) {
    for (const auto& [c, ch] : topo.clients) edges.insert(c);
    for (const core::NodeId& h : topo.factory.hubs) {
      edges.insert("factory:" + h);
    }
  }

  auto edge_value = [&](const FlowComputationResult& run,
                        const std::string& edge) -> std::int64_t {
    if (edge.rfind("factory:", 0) == 0) {
      const core::NodeId hub = edge.substr(8);
      return run.solution.flow.factory_demand[*topo.factory.index_of(hub)];
    }
    auto it = run.solution.flow.client_net.find(edge);
    return it == run.solution.flow.client_net.end() ? 0 : it->second;
  };

  PrivacyOutcome out;
  out.constraints_ok = true;
  for (const std::string& e : edges) {
    if (edge_value(run0, e) != edge_value(run1, e)) {
      out.constraints_ok = false;
      break;
    }
  }
  if (out.constraints_ok) {
    std::set<core::NodeId> involved0;
    std::set<core::NodeId> involved1;
    for (const auto& [u, v] : run0.views) {
      if (v.involved_count > 0) involved0.insert(u);
    }
    for (const auto& [u, v] : run1.views) {
      if (v.involved_count > 0) involved1.insert(u);
    }
    out.constraints_ok = involved0 == involved1;
  }

  out.views_equal = true;
  for (const core::NodeId& c : corrupted) {
    if (run0.views.at(c).canonical_string() !=
        run1.views.at(c).canonical_string()) {
      out.views_equal = false;
      break;
    }
  }
  return out;
}

}  // namespace txagg::protocol
