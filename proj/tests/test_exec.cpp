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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "support.hpp"
#include "txagg/core.hpp"
#include "txagg/exec.hpp"
#include "txagg/rng.hpp"

using namespace txagg;
using core::Amount;
using core::Flow;
using core::Topology;
using exec::AdversaryStrategy;
using exec::ExecutionOutcome;
using exec::StrategyKind;
using exec::StrategyMap;

namespace {

struct Setup {
  Topology topo;
  Flow flow;
};

// Two client channels on different hubs plus a factory edge: parties
// c1, c5, h1, h2.
Setup cross_hub_setup() {
  Setup s;
  s.topo = test::make_topology({{"h1", 50}, {"h2", 50}},
                               {{"c1", "h1"}, {"c5", "h2"}});
  const auto routed = core::route_demand(
      s.topo,
      core::aggregate_demand({core::make_transaction("t", "c1", "c5", 4)}));
  s.flow = *core::flow_of(routed);
  return s;
}

bool topologies_equal(const Topology& a, const Topology& b) {
  if (a.factory.balances != b.factory.balances) return false;
  for (const auto& [id, ch] : a.clients) {
    const auto& other = b.clients.at(id);
    if (ch.cap_out != other.cap_out || ch.cap_in != other.cap_in) {
      return false;
    }
  }
  return true;
}

bool has_event(const ExecutionOutcome& out, const std::string& kind) {
  return std::any_of(out.events.begin(), out.events.end(),
                     [&](const exec::LedgerEvent& e) { return e.kind == kind; });
}

}  // namespace

TEST_CASE("all-honest execution commits and applies the flow") {
  const Setup s = cross_hub_setup();
  const ExecutionOutcome out = exec::execute_atomic(s.topo, s.flow, {}, 10, 1);
  CHECK(out.committed);
  CHECK_FALSE(out.refunds_issued);
  CHECK(topologies_equal(out.final_topology, core::apply_flow(s.topo, s.flow)));
  CHECK(has_event(out, "committed"));
  CHECK_FALSE(has_event(out, "refund-issued"));
}

TEST_CASE("a withheld sender signature refunds everyone") {
  const Setup s = cross_hub_setup();
  StrategyMap strategies;
  strategies["c1"] = {StrategyKind::kWithholdSenderSignature, 0};
  const ExecutionOutcome out =
      exec::execute_atomic(s.topo, s.flow, strategies, 10, 1);
  CHECK_FALSE(out.committed);
  CHECK(out.refunds_issued);
  CHECK(topologies_equal(out.final_topology, s.topo));
  CHECK_FALSE(has_event(out, "epoch-posted"));
}

TEST_CASE("a receiver that never spends voids every update") {
  const Setup s = cross_hub_setup();
  StrategyMap strategies;
  strategies["c5"] = {StrategyKind::kReceiverNoSpend, 0};
  const ExecutionOutcome out =
      exec::execute_atomic(s.topo, s.flow, strategies, 10, 1);
  CHECK_FALSE(out.committed);
  CHECK(out.refunds_issued);
  CHECK(topologies_equal(out.final_topology, s.topo));
  // The epoch went up and other receivers spent; atomicity still voids it.
  CHECK(has_event(out, "epoch-posted"));
}

TEST_CASE("posting survives a single withholding receiver") {
  const Setup s = cross_hub_setup();
  StrategyMap strategies;
  strategies["c5"] = {StrategyKind::kWithholdAllEpochPosts, 0};
  const ExecutionOutcome out =
      exec::execute_atomic(s.topo, s.flow, strategies, 10, 1);
  CHECK(out.committed);
}

TEST_CASE("withholding all posts times out into refunds") {
  const Setup s = cross_hub_setup();
  StrategyMap strategies;
  for (const auto& receiver : {"c5", "h1", "h2"}) {
    strategies[receiver] = {StrategyKind::kWithholdAllEpochPosts, 0};
  }
  const ExecutionOutcome out =
      exec::execute_atomic(s.topo, s.flow, strategies, 10, 1);
  CHECK_FALSE(out.committed);
  CHECK(out.refunds_issued);
  CHECK(topologies_equal(out.final_topology, s.topo));
}

TEST_CASE("crashes at any phase never leave a partial state") {
  const Setup s = cross_hub_setup();
  for (std::size_t phase = 1; phase <= 5; ++phase) {
    for (const auto& party : {"c1", "c5", "h1", "h2"}) {
      StrategyMap strategies;
      strategies[party] = {StrategyKind::kCrashAtPhase, phase};
      const ExecutionOutcome out =
          exec::execute_atomic(s.topo, s.flow, strategies, 10, 1);
      const bool initial = topologies_equal(out.final_topology, s.topo);
      const bool applied = topologies_equal(
          out.final_topology, core::apply_flow(s.topo, s.flow));
      REQUIRE((initial || applied));
      REQUIRE(out.committed == applied);
      if (!out.committed) REQUIRE(initial);
    }
  }
}

TEST_CASE("the ledger advances without side effects when idle") {
  exec::Ledger ledger;
  ledger.height = 3;
  const exec::Ledger same = exec::advance_ledger(ledger, 0);
  CHECK(same.height == 3);
  CHECK(same.posted.empty());
  CHECK(exec::advance_ledger(ledger, 4).height == 7);
}

TEST_CASE("advancing past the timeout without a post refunds") {
  const Setup s = cross_hub_setup();
  StrategyMap strategies;
  for (const auto& receiver : {"c5", "h1", "h2"}) {
    strategies[receiver] = {StrategyKind::kWithholdAllEpochPosts, 0};
  }
  exec::Engine engine(s.topo, s.flow, strategies, 5, 1);
  engine.run_phases();
  CHECK_FALSE(engine.resolved());
  engine.advance(4);
  CHECK_FALSE(engine.resolved());  // still before start + T
  engine.advance(1);
  CHECK(engine.resolved());
  const ExecutionOutcome out = engine.outcome();
  CHECK_FALSE(out.committed);
  CHECK(out.refunds_issued);
}

TEST_CASE("advancing after a commit appends nothing") {
  const Setup s = cross_hub_setup();
  exec::Engine engine(s.topo, s.flow, {}, 5, 1);
  engine.run_phases();
  CHECK(engine.resolved());
  const std::size_t events = engine.ledger().posted.size();
  engine.advance(10);
  CHECK(engine.ledger().posted.size() == events);
  CHECK(engine.outcome().committed);
}

TEST_CASE("the phase count is a constant of the machine") {
  CHECK(exec::Engine::kPhaseCount == 6);
}

TEST_CASE("the empty flow commits with no ceremony") {
  const Setup s = cross_hub_setup();
  Flow zero;
  zero.factory_demand = {0, 0};
  const ExecutionOutcome out = exec::execute_atomic(s.topo, zero, {}, 10, 1);
  CHECK(out.committed);
  CHECK_FALSE(out.refunds_issued);
  CHECK(out.events.empty());
  CHECK(topologies_equal(out.final_topology, s.topo));
}

TEST_CASE("bad inputs are rejected up front") {
  const Setup s = cross_hub_setup();
  StrategyMap unknown;
  unknown["nobody"] = {StrategyKind::kHonest, 0};
  CHECK_THROWS_AS(
      (void)exec::execute_atomic(s.topo, s.flow, unknown, 10, 1),
      exec::MissingStrategyError);

  Flow oversized;
  oversized.client_net["c1"] = 200;
  oversized.factory_demand = {200, -200};
  CHECK_THROWS_AS((void)exec::execute_atomic(s.topo, oversized, {}, 10, 1),
                  core::InfeasibleFlowError);

  CHECK_THROWS_AS((void)exec::execute_atomic(s.topo, s.flow, {}, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("exhaustive small strategy spaces never reach partial states") {
  const Setup s = cross_hub_setup();
  const std::vector<core::NodeId> parties = {"c1", "c5", "h1", "h2"};
  std::vector<AdversaryStrategy> kinds = {
      {StrategyKind::kHonest, 0},
      {StrategyKind::kWithholdSenderSignature, 0},
      {StrategyKind::kWithholdAllEpochPosts, 0},
      {StrategyKind::kReceiverNoSpend, 0},
      {StrategyKind::kCrashAtPhase, 1},
      {StrategyKind::kCrashAtPhase, 2},
      {StrategyKind::kCrashAtPhase, 3},
      {StrategyKind::kCrashAtPhase, 4},
      {StrategyKind::kCrashAtPhase, 5},
  };
  const Topology applied = core::apply_flow(s.topo, s.flow);
  std::size_t commits = 0;
  std::size_t runs = 0;
  for (std::size_t a = 0; a < kinds.size(); ++a) {
    for (std::size_t b = 0; b < kinds.size(); ++b) {
      for (std::size_t c = 0; c < kinds.size(); ++c) {
        for (std::size_t d = 0; d < kinds.size(); ++d) {
          StrategyMap strategies;
          strategies[parties[0]] = kinds[a];
          strategies[parties[1]] = kinds[b];
          strategies[parties[2]] = kinds[c];
          strategies[parties[3]] = kinds[d];
          const ExecutionOutcome out =
              exec::execute_atomic(s.topo, s.flow, strategies, 10, 1);
          const bool initial = topologies_equal(out.final_topology, s.topo);
          const bool final_applied =
              topologies_equal(out.final_topology, applied);
          REQUIRE((initial || final_applied));
          REQUIRE(out.committed == final_applied);
          commits += out.committed ? 1 : 0;
          ++runs;
        }
      }
    }
  }
  CHECK(runs == 6561);
  CHECK(commits > 0);       // the all-honest corner commits
  CHECK(commits < runs);    // sabotage works
}

TEST_CASE("random larger flows stay atomic under random strategies") {
  SplitMix64 rng(0xaaaa);
  int checked = 0;
  while (checked < 120) {
    const auto sc = test::random_scenario(rng, 4, 8);
    const auto routed =
        core::route_demand(sc.topology, core::aggregate_demand(sc.txns));
    const Flow* flow = core::flow_of(routed);
    if (flow == nullptr || flow->is_zero()) continue;

    std::vector<core::NodeId> parties;
    for (const auto& [c, net] : flow->client_net) {
      parties.push_back(c);
      parties.push_back(sc.topology.clients.at(c).hub);
    }
    StrategyMap strategies;
    for (const core::NodeId& p : parties) {
      switch (rng.below(6)) {
        case 0:
          strategies[p] = {StrategyKind::kWithholdSenderSignature, 0};
          break;
        case 1:
          strategies[p] = {StrategyKind::kWithholdAllEpochPosts, 0};
          break;
        case 2:
          strategies[p] = {StrategyKind::kReceiverNoSpend, 0};
          break;
        case 3:
          strategies[p] = {StrategyKind::kCrashAtPhase,
                           1 + rng.below(5)};
          break;
        default:
          break;  // honest
      }
    }
    const ExecutionOutcome out =
        exec::execute_atomic(sc.topology, *flow, strategies, 10, 1);
    const bool initial = topologies_equal(out.final_topology, sc.topology);
    const bool applied = topologies_equal(
        out.final_topology, core::apply_flow(sc.topology, *flow));
    REQUIRE((initial || applied));
    REQUIRE(out.committed == applied);
    ++checked;
  }
}

TEST_CASE("all-honest runs commit for every feasible flow") {
  SplitMix64 rng(0xbbbb);
  int checked = 0;
  while (checked < 80) {
    const auto sc = test::random_scenario(rng, 4, 8);
    const auto routed =
        core::route_demand(sc.topology, core::aggregate_demand(sc.txns));
    const Flow* flow = core::flow_of(routed);
    if (flow == nullptr) continue;
    const ExecutionOutcome out =
        exec::execute_atomic(sc.topology, *flow, {}, 10, 1);
    REQUIRE(out.committed);
    REQUIRE(topologies_equal(out.final_topology,
                             core::apply_flow(sc.topology, *flow)));
    ++checked;
  }
}
