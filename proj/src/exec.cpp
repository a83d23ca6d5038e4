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

#include "txagg/exec.hpp"

#include <algorithm>

namespace txagg::exec {

namespace {

// Phase numbers used by CrashAtPhase.
constexpr std::size_t kPhaseCreate = 1;
constexpr std::size_t kPhaseSign = 2;
constexpr std::size_t kPhasePrepare = 3;
constexpr std::size_t kPhasePost = 4;
constexpr std::size_t kPhaseSpend = 5;

}  // namespace

ChannelUpdateSet plan_updates(const core::Topology& topo,
                              const core::Flow& flow, std::uint64_t timeout,
                              core::Amount epsilon) {
  ChannelUpdateSet plan;
  plan.timeout = timeout;
  plan.epsilon = epsilon;
  for (const auto& [client, net] : flow.client_net) {
    if (net == 0) continue;
    const core::ChannelState& ch = topo.clients.at(client);
    ChannelUpdate u;
    u.id = client;
    u.amount = static_cast<core::Amount>(net > 0 ? net : -net);
    if (net > 0) {
      u.sender = client;
      u.receiver = ch.hub;
      u.before = {ch.cap_out, ch.cap_in};
      u.after = {ch.cap_out - u.amount, ch.cap_in + u.amount};
    } else {
      u.sender = ch.hub;
      u.receiver = client;
      u.before = {ch.cap_in, ch.cap_out};
      u.after = {ch.cap_in - u.amount, ch.cap_out + u.amount};
    }
    plan.updates.push_back(std::move(u));
  }
  // Decompose the factory transition into sender->receiver edges by
  // matching decreasing balances against increasing ones in hub order.
  std::vector<std::pair<std::size_t, core::Amount>> give;
  std::vector<std::pair<std::size_t, core::Amount>> get;
  for (std::size_t i = 0; i < flow.factory_demand.size(); ++i) {
    const std::int64_t d = flow.factory_demand[i];
    if (d > 0) give.emplace_back(i, static_cast<core::Amount>(d));
    if (d < 0) get.emplace_back(i, static_cast<core::Amount>(-d));
  }
  std::vector<core::Amount> running = topo.factory.balances;
  std::size_t gi = 0;
  std::size_t ri = 0;
  while (gi < give.size() && ri < get.size()) {
    const core::Amount moved = std::min(give[gi].second, get[ri].second);
    const std::size_t s = give[gi].first;
    const std::size_t r = get[ri].first;
    ChannelUpdate u;
    u.id = "factory";
    u.sender = topo.factory.hubs[s];
    u.receiver = topo.factory.hubs[r];
    u.amount = moved;
    u.before = {running[s], running[r]};
    running[s] -= moved;
    running[r] += moved;
    u.after = {running[s], running[r]};
    plan.updates.push_back(std::move(u));
    give[gi].second -= moved;
    get[ri].second -= moved;
    if (give[gi].second == 0) ++gi;
    if (get[ri].second == 0) ++ri;
  }
  return plan;
}

Engine::Engine(core::Topology topo, core::Flow flow, StrategyMap strategies,
               std::uint64_t timeout, core::Amount epsilon)
    : initial_(std::move(topo)),
      flow_(std::move(flow)),
      strategies_(std::move(strategies)),
      timeout_(timeout),
      epsilon_(epsilon) {
  if (timeout_ == 0) {
    throw std::invalid_argument("timeout must be positive");
  }
  if (!core::check_flow_feasible(initial_, flow_)) {
    throw core::InfeasibleFlowError("execution plan does not fit");
  }
  for (const auto& [party, s] : strategies_) {
    if (!initial_.has_node(party)) throw MissingStrategyError(party);
  }
  plan_ = plan_updates(initial_, flow_, timeout_, epsilon_);
  std::set<core::NodeId> senders;
  std::set<core::NodeId> receivers;
  for (const ChannelUpdate& u : plan_.updates) {
    senders.insert(u.sender);
    receivers.insert(u.receiver);
  }
  senders_.assign(senders.begin(), senders.end());
  receivers_.assign(receivers.begin(), receivers.end());
  for (const core::NodeId& r : receivers_) {
    epochs_.push_back(EpochTx{r, false, {}, false});
  }
  payment_ready_.assign(plan_.updates.size(), false);
  payment_spent_.assign(plan_.updates.size(), false);
  // On-chain wallets fund the dust outputs; sized so every receiver can
  // always cover its own output.
  for (const core::NodeId& p : senders_) wallets_.emplace(p, epsilon_ * 2);
  for (const core::NodeId& p : receivers_) wallets_.emplace(p, epsilon_ * 2);
  initial_total_ = initial_.total_coins();
  for (const auto& [p, w] : wallets_) initial_total_ += w;
}

AdversaryStrategy Engine::strategy(const core::NodeId& party) const {
  auto it = strategies_.find(party);
  return it == strategies_.end() ? AdversaryStrategy{} : it->second;
}

bool Engine::active(const core::NodeId& party, std::size_t phase) const {
  const AdversaryStrategy s = strategy(party);
  return s.kind != StrategyKind::kCrashAtPhase || phase < s.crash_phase;
}

const std::string& Engine::alias(const core::NodeId& party) {
  auto it = aliases_.find(party);
  if (it == aliases_.end()) {
    it = aliases_
             .emplace(party, "p" + std::to_string(aliases_.size() + 1))
             .first;
  }
  return it->second;
}

void Engine::emit(const core::NodeId& party, std::string kind,
                  std::string detail) {
  ledger_.posted.push_back(LedgerEvent{ledger_.height, alias(party),
                                       std::move(kind), std::move(detail)});
  check_conservation();
}

void Engine::check_conservation() const {
  // Channel updates conserve channel totals, so the committed and pending
  // states contribute the same amount; wallets and escrow must account
  // for the rest.
  core::Amount total = initial_.total_coins();
  for (const auto& [p, w] : wallets_) total += w;
  for (const auto& [p, e] : escrow_) total += e;
  if (total != initial_total_) {
    throw std::logic_error("conservation violated in the execution engine");
  }
}

bool Engine::fully_signed(const EpochTx& epoch) const {
  if (!epoch.created) return false;
  for (const core::NodeId& s : senders_) {
    if (!epoch.signatures.count(s)) return false;
  }
  return true;
}

void Engine::run_phases() {
  if (phases_run_ || resolved()) return;
  phases_run_ = true;
  start_height_ = ledger_.height;

  if (plan_.updates.empty()) {
    // Nothing to update: the empty set commits trivially.
    committed_ = true;
    return;
  }

  // Phase 1: each receiver creates and signs its epoch transaction with
  // one dust output per receiver.
  for (std::size_t e = 0; e < epochs_.size(); ++e) {
    if (!active(epochs_[e].creator, kPhaseCreate)) continue;
    epochs_[e].created = true;
    emit(epochs_[e].creator, "epoch-created",
         "epoch" + std::to_string(e) + " outputs=" +
             std::to_string(receivers_.size()));
  }

  // Phase 2: every sender signs every created epoch transaction.
  for (const core::NodeId& s : senders_) {
    const AdversaryStrategy st = strategy(s);
    if (st.kind == StrategyKind::kWithholdSenderSignature) continue;
    if (!active(s, kPhaseSign)) continue;
    std::size_t signed_count = 0;
    for (EpochTx& epoch : epochs_) {
      if (epoch.created) {
        epoch.signatures.insert(s);
        ++signed_count;
      }
    }
    if (signed_count > 0) {
      emit(s, "sender-signed", "epochs=" + std::to_string(signed_count));
    }
  }

  // Phase 3: senders create the channel-update and payment transactions,
  // keyed to an epoch output and spendable before start + T.
  for (std::size_t u = 0; u < plan_.updates.size(); ++u) {
    const core::NodeId& s = plan_.updates[u].sender;
    if (strategy(s).kind == StrategyKind::kWithholdSenderSignature) continue;
    if (!active(s, kPhasePrepare)) continue;
    payment_ready_[u] = true;
    emit(s, "payment-prepared", "u" + std::to_string(u));
  }

  // Phase 4: any receiver may post any fully-signed epoch transaction;
  // one suffices. Posting escrows the dust output of every receiver that
  // is still participating.
  std::size_t postable = epochs_.size();
  for (std::size_t e = 0; e < epochs_.size(); ++e) {
    if (fully_signed(epochs_[e])) {
      postable = e;
      break;
    }
  }
  if (postable < epochs_.size()) {
    for (const core::NodeId& r : receivers_) {
      const AdversaryStrategy st = strategy(r);
      if (st.kind == StrategyKind::kWithholdAllEpochPosts) continue;
      if (!active(r, kPhasePost)) continue;
      epochs_[postable].posted = true;
      emit(r, "epoch-posted", "epoch" + std::to_string(postable));
      break;
    }
    if (epochs_[postable].posted) {
      for (const core::NodeId& r : receivers_) {
        if (!active(r, kPhasePost)) continue;
        wallets_[r] -= epsilon_;
        escrow_[r] += epsilon_;
        emit(r, "epsilon-escrowed", std::to_string(epsilon_));
      }
    }
  }

  // Phase 5: receivers spend their payments (consuming their dust output)
  // while the epoch is on the ledger.
  const bool posted = std::any_of(epochs_.begin(), epochs_.end(),
                                  [](const EpochTx& e) { return e.posted; });
  if (posted) {
    for (std::size_t u = 0; u < plan_.updates.size(); ++u) {
      const core::NodeId& r = plan_.updates[u].receiver;
      const AdversaryStrategy st = strategy(r);
      if (st.kind == StrategyKind::kReceiverNoSpend) continue;
      if (!active(r, kPhaseSpend)) continue;
      if (!payment_ready_[u]) continue;
      payment_spent_[u] = true;
      emit(r, "payment-spent", "u" + std::to_string(u));
    }
  }

  try_commit();
}

void Engine::try_commit() {
  if (resolved()) return;
  const bool posted = std::any_of(epochs_.begin(), epochs_.end(),
                                  [](const EpochTx& e) { return e.posted; });
  const bool all_spent = std::all_of(payment_spent_.begin(),
                                     payment_spent_.end(),
                                     [](bool b) { return b; });
  if (!posted || !all_spent) return;
  committed_ = true;
  for (std::size_t u = 0; u < plan_.updates.size(); ++u) {
    emit(plan_.updates[u].sender, "channel-updated",
         "u" + std::to_string(u) + " amount=" +
             std::to_string(plan_.updates[u].amount));
  }
  // Dust outputs return to the receivers that funded them.
  for (auto& [party, amount] : escrow_) {
    if (amount == 0) continue;
    wallets_[party] += amount;
    amount = 0;
    emit(party, "epsilon-returned", std::to_string(epsilon_));
  }
  emit(plan_.updates.front().sender, "committed", "");
}

void Engine::refund() {
  refunded_ = true;
  for (std::size_t u = 0; u < plan_.updates.size(); ++u) {
    emit(plan_.updates[u].sender, "refund-issued",
         "u" + std::to_string(u) + " amount=" +
             std::to_string(plan_.updates[u].amount));
  }
  for (auto& [party, amount] : escrow_) {
    if (amount == 0) continue;
    wallets_[party] += amount;
    amount = 0;
    emit(party, "epsilon-returned", std::to_string(epsilon_));
  }
}

void Engine::advance(std::uint64_t delta) {
  ledger_.height += delta;
  if (resolved()) return;
  if (!phases_run_) return;
  if (ledger_.height >= start_height_ + timeout_) {
    refund();
  }
}

ExecutionOutcome Engine::outcome() const {
  ExecutionOutcome out;
  out.committed = committed_;
  out.final_topology =
      committed_ ? core::apply_flow(initial_, flow_) : initial_;
  out.events = ledger_.posted;
  out.refunds_issued = refunded_ && !plan_.updates.empty();
  return out;
}

ExecutionOutcome execute_atomic(const core::Topology& topo,
                                const core::Flow& flow,
                                const StrategyMap& strategies,
                                std::uint64_t timeout, core::Amount epsilon) {
  Engine engine(topo, flow, strategies, timeout, epsilon);
  engine.run_phases();
  if (!engine.resolved()) {
    engine.advance(timeout);
  }
  return engine.outcome();
}

}  // namespace txagg::exec
