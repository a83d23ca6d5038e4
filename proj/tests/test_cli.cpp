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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "support.hpp"
#include "txagg/cli.hpp"
#include "txagg/report.hpp"
#include "txagg/scenario.hpp"

using namespace txagg;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliResult result;
  result.exit_code = cli::run(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string fixture(const std::string& name) {
  return std::string(TXAGG_FIXTURE_DIR) + "/" + name;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("txagg_test_" + name);
}

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = temp_path(name);
  std::ofstream f(path);
  f << content;
  return path.string();
}

json netting_scenario() {
  std::ifstream in(fixture("netting_pair.json"));
  json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("solve reproduces the netting scenario") {
  const CliResult r = run_cli({"solve", fixture("netting_pair.json")});
  REQUIRE(r.exit_code == cli::kOk);
  const json report = json::parse(r.out);
  CHECK(report["throughput"] == 20);
  CHECK(report["selected_txn_ids"] == json::array({"t1", "t3"}));
  CHECK(report["flow"]["client_net"] == json({{"v1", 10}, {"v4", 10}}));
  CHECK(report["flow"]["factory_demand"] == json::array({0, 0}));
  CHECK(report["sequential_baseline"]["feasible"] == false);
  CHECK(report["sequential_baseline"]["failed_at_index"] == 0);
  CHECK(report["execution"].is_null());
}

TEST_CASE("solve clears the three-transaction two-hub batch") {
  const CliResult r = run_cli({"solve", fixture("two_hub_three_txns.json")});
  REQUIRE(r.exit_code == cli::kOk);
  const json report = json::parse(r.out);
  CHECK(report["throughput"] == 18);
  CHECK(report["selected_txn_ids"] == json::array({"t1", "t2", "t3"}));
  // Net factory movement is +8 from h1 toward h2, feasible in one shot,
  // while the sequential walk depletes h1 after the first hop.
  CHECK(report["flow"]["factory_demand"] == json::array({8, -8}));
  CHECK(report["sequential_baseline"]["feasible"] == false);
  CHECK(report["sequential_baseline"]["failed_at_index"] == 1);

  const std::string path = write_temp("three_txns_report.json", r.out);
  CHECK(run_cli({"verify", fixture("two_hub_three_txns.json"), path})
            .exit_code == cli::kOk);
}

TEST_CASE("zero-amount submissions are selected and verify cleanly") {
  json sc = netting_scenario();
  sc["transactions"].push_back({{"id", "z1"},
                                {"sender", "v2"},
                                {"recipient", "v3"},
                                {"amount", 0}});
  const std::string path = write_temp("zero_amount.json", sc.dump());
  const CliResult r = run_cli({"solve", path});
  REQUIRE(r.exit_code == cli::kOk);
  const json report = json::parse(r.out);
  CHECK(report["throughput"] == 20);
  CHECK(report["selected_txn_ids"] == json::array({"t1", "t3", "z1"}));
  const std::string report_path = write_temp("zero_amount_report.json", r.out);
  CHECK(run_cli({"verify", path, report_path}).exit_code == cli::kOk);
}

TEST_CASE("random scenarios survive the serialize/parse round trip") {
  SplitMix64 rng(0x5c5c);
  for (int iter = 0; iter < 40; ++iter) {
    const auto generated = test::random_scenario(rng, 4, 8);
    scenario::ScenarioFile sc;
    sc.topology = generated.topology;
    sc.txns = generated.txns;
    sc.config.num_delegates = 1 + rng.below(sc.topology.factory.hubs.size());
    sc.config.pad_to = 16;
    sc.solver_name = "dp";
    sc.config.solver_choice.kind = solver::SolverKind::kDp;
    sc.config.timeout = 1 + rng.below(20);
    sc.config.epsilon_output = 1 + rng.below(3);
    std::ostringstream hex;
    for (int i = 0; i < 64; ++i) hex << "0123456789abcdef"[rng.below(16)];
    sc.seed_hex = hex.str();
    sc.config.randomness_seed = scenario::parse_seed_hex(sc.seed_hex);
    if (rng.coin() && !sc.txns.empty()) {
      sc.adversary[sc.txns[0].sender] = {
          exec::StrategyKind::kCrashAtPhase, 1 + rng.below(5)};
    }
    const json emitted = scenario::scenario_to_json(sc);
    CHECK(scenario::scenario_to_json(scenario::parse_scenario(emitted)) ==
          emitted);
  }
}

TEST_CASE("solve handles an empty transaction list") {
  json sc = netting_scenario();
  sc["transactions"] = json::array();
  const std::string path = write_temp("empty.json", sc.dump());
  const CliResult r = run_cli({"solve", path});
  REQUIRE(r.exit_code == cli::kOk);
  const json report = json::parse(r.out);
  CHECK(report["throughput"] == 0);
  CHECK(report["selected_txn_ids"].empty());
  CHECK(report["flow"]["client_net"].empty());
}

TEST_CASE("solver flags select the oracle") {
  for (const std::string solver : {"brute", "dp"}) {
    const CliResult r =
        run_cli({"solve", fixture("netting_pair.json"), "--solver", solver});
    REQUIRE(r.exit_code == cli::kOk);
    CHECK(json::parse(r.out)["throughput"] == 20);
  }
  // Greedy cannot discover the canceling pair: each transaction alone
  // violates the empty factory balances.
  const CliResult greedy =
      run_cli({"solve", fixture("netting_pair.json"), "--solver", "greedy"});
  REQUIRE(greedy.exit_code == cli::kOk);
  CHECK(json::parse(greedy.out)["throughput"] == 0);
  const CliResult bounded = run_cli({"solve", fixture("netting_pair.json"),
                                     "--solver", "dp-bounded", "--radius",
                                     "100"});
  REQUIRE(bounded.exit_code == cli::kOk);
  CHECK(json::parse(bounded.out)["throughput"] == 20);

  const CliResult no_radius =
      run_cli({"solve", fixture("netting_pair.json"), "--solver", "dp-bounded"});
  CHECK(no_radius.exit_code == cli::kInvalidInput);
}

TEST_CASE("invalid scenarios exit with code 3") {
  json sc = netting_scenario();
  SUBCASE("bad seed") {
    sc["config"]["seed_hex"] = "zz";
    const std::string path = write_temp("bad_seed.json", sc.dump());
    CHECK(run_cli({"solve", path}).exit_code == cli::kInvalidInput);
  }
  SUBCASE("unknown transaction endpoint") {
    sc["transactions"][0]["sender"] = "ghost";
    const std::string path = write_temp("bad_sender.json", sc.dump());
    CHECK(run_cli({"solve", path}).exit_code == cli::kInvalidInput);
  }
  SUBCASE("pad_to below the longest list") {
    sc["config"]["pad_to"] = 1;  // v1 submits two transactions
    const std::string path = write_temp("bad_pad.json", sc.dump());
    CHECK(run_cli({"solve", path}).exit_code == cli::kInvalidInput);
  }
  SUBCASE("fee ppm out of range") {
    sc["hubs"][0]["fee_prop_ppm"] = 1000000;
    const std::string path = write_temp("bad_ppm.json", sc.dump());
    CHECK(run_cli({"solve", path}).exit_code == cli::kInvalidInput);
  }
  SUBCASE("unparseable json") {
    const std::string path = write_temp("broken.json", "{nope");
    CHECK(run_cli({"solve", path}).exit_code == cli::kInvalidInput);
  }
  SUBCASE("adversary for unknown node") {
    sc["adversary"] = {{"ghost", "honest"}};
    const std::string path = write_temp("bad_adv.json", sc.dump());
    CHECK(run_cli({"simulate", path}).exit_code == cli::kInvalidInput);
  }
  SUBCASE("a node cannot be both hub and client") {
    sc["clients"].push_back({{"id", "v3"},
                             {"hub", "v6"},
                             {"cap_out", 5},
                             {"cap_in", 5},
                             {"fee_base", 0},
                             {"fee_prop_ppm", 0}});
    const std::string path = write_temp("hub_client.json", sc.dump());
    CHECK(run_cli({"solve", path}).exit_code == cli::kInvalidInput);
  }
}

TEST_CASE("scenario files round-trip through parse and serialize") {
  const json original = netting_scenario();
  const scenario::ScenarioFile sc = scenario::parse_scenario(original);
  const json emitted = scenario::scenario_to_json(sc);
  CHECK(emitted == original);
  // And the emitted form re-parses to the same emission.
  CHECK(scenario::scenario_to_json(scenario::parse_scenario(emitted)) ==
        emitted);
}

TEST_CASE("simulate commits honestly and reports the execution") {
  const std::string out_path = temp_path("sim_report.json").string();
  const CliResult r =
      run_cli({"simulate", fixture("netting_pair.json"), "--output", out_path});
  REQUIRE(r.exit_code == cli::kOk);
  std::ifstream in(out_path);
  json report;
  in >> report;
  CHECK(report["execution"]["committed"] == true);
  CHECK(report["selected_txn_ids"] == json::array({"t1", "t3"}));
  for (const auto& [user, verdict] :
       report["execution"]["local_validation"].items()) {
    CHECK(verdict == "ok");
  }
}

TEST_CASE("an adversarial sender forces the refund exit code") {
  json sc = netting_scenario();
  sc["adversary"] = {{"v1", "withhold-signature"}};
  const std::string path = write_temp("adv.json", sc.dump());
  const CliResult r = run_cli({"simulate", path});
  CHECK(r.exit_code == cli::kInfeasible);
  const json report = json::parse(r.out);
  CHECK(report["execution"]["committed"] == false);
}

TEST_CASE("replays are byte-identical modulo wall_ms") {
  const CliResult a = run_cli({"simulate", fixture("netting_pair.json")});
  const CliResult b = run_cli({"simulate", fixture("netting_pair.json")});
  REQUIRE(a.exit_code == cli::kOk);
  const json ja = report::normalized_for_comparison(json::parse(a.out));
  const json jb = report::normalized_for_comparison(json::parse(b.out));
  CHECK(ja.dump() == jb.dump());
}

TEST_CASE("verify accepts both report kinds and rejects tampering") {
  const std::string solve_path = temp_path("verify_solve.json").string();
  REQUIRE(run_cli({"solve", fixture("netting_pair.json"), "--output", solve_path})
              .exit_code == cli::kOk);
  CHECK(run_cli({"verify", fixture("netting_pair.json"), solve_path}).exit_code ==
        cli::kOk);

  const std::string sim_path = temp_path("verify_sim.json").string();
  REQUIRE(run_cli({"simulate", fixture("netting_pair.json"), "--output", sim_path})
              .exit_code == cli::kOk);
  CHECK(run_cli({"verify", fixture("netting_pair.json"), sim_path}).exit_code ==
        cli::kOk);

  SUBCASE("an incremented flow entry is a net-flow violation") {
    json report;
    std::ifstream(solve_path) >> report;
    report["flow"]["client_net"]["v1"] = 11;
    const std::string tampered =
        write_temp("tampered_flow.json", report.dump());
    const CliResult r = run_cli({"verify", fixture("netting_pair.json"), tampered});
    CHECK(r.exit_code == cli::kVerifyFailure);
    CHECK(r.err.find("NetFlowViolation") != std::string::npos);
  }
  SUBCASE("an unknown selected id is NotSubmitted") {
    json report;
    std::ifstream(solve_path) >> report;
    report["selected_txn_ids"] = json::array({"t1", "t3", "tx"});
    const std::string tampered =
        write_temp("tampered_sel.json", report.dump());
    const CliResult r = run_cli({"verify", fixture("netting_pair.json"), tampered});
    CHECK(r.exit_code == cli::kVerifyFailure);
    CHECK(r.err.find("NotSubmitted") != std::string::npos);
  }
  SUBCASE("garbage reports exit 3") {
    const std::string garbage = write_temp("garbage.json", "{nope");
    CHECK(run_cli({"verify", fixture("netting_pair.json"), garbage}).exit_code ==
          cli::kInvalidInput);
  }
}

TEST_CASE("the subset-sum reduction decides membership end to end") {
  struct Case {
    core::Amount target;
    std::vector<std::string> items;
    core::Amount expected_throughput;
  };
  const std::vector<Case> cases = {{5, {"2", "3"}, 10},
                                   {5, {"2"}, 0},
                                   {4, {"2", "2", "3"}, 8}};
  for (const Case& c : cases) {
    std::vector<std::string> args = {"reduce-subset-sum",
                                     std::to_string(c.target)};
    args.insert(args.end(), c.items.begin(), c.items.end());
    const CliResult reduced = run_cli(args);
    REQUIRE(reduced.exit_code == cli::kOk);
    const std::string path = write_temp("reduction.json", reduced.out);
    const CliResult solved = run_cli({"solve", path});
    REQUIRE(solved.exit_code == cli::kOk);
    CHECK(json::parse(solved.out)["throughput"] == c.expected_throughput);
  }
  CHECK(run_cli({"reduce-subset-sum", "0", "2"}).exit_code ==
        cli::kInvalidInput);
}

TEST_CASE("bench emits deterministic csv") {
  const CliResult a = run_cli({"bench", "--k-list", "20,40", "--hubs", "3",
                               "--delta", "5", "--seeds", "2"});
  REQUIRE(a.exit_code == cli::kOk);
  std::istringstream lines(a.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "k,seed,solver,wall_ms,states");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 4);

  const CliResult b = run_cli({"bench", "--k-list", "20,40", "--hubs", "3",
                               "--delta", "5", "--seeds", "2"});
  auto states_of = [](const std::string& csv) {
    std::vector<std::string> states;
    std::istringstream in(csv);
    std::string row;
    std::getline(in, row);  // header
    while (std::getline(in, row)) {
      states.push_back(row.substr(row.rfind(',') + 1));
    }
    return states;
  };
  CHECK(states_of(a.out) == states_of(b.out));

  CHECK(run_cli({"bench", "--k-list", "10", "--hubs", "6"}).exit_code ==
        cli::kInvalidInput);
  const CliResult zero = run_cli({"bench", "--k-list", "0"});
  REQUIRE(zero.exit_code == cli::kOk);
  CHECK(zero.out.find("0,0,dp-bounded") != std::string::npos);
}

TEST_CASE("pruned results exit 2 unless a fallback is requested") {
  // Radius 1 prunes every state shift of the 10-coin transactions; the
  // surviving selection is empty and flagged pruned.
  const CliResult pruned = run_cli({"solve", fixture("netting_pair.json"),
                                    "--solver", "dp-bounded", "--radius",
                                    "1"});
  CHECK(pruned.exit_code == cli::kInfeasible);
  CHECK(pruned.err.find("pruned") != std::string::npos);

  const CliResult fallback = run_cli({"solve", fixture("netting_pair.json"),
                                      "--solver", "dp-bounded", "--radius",
                                      "1", "--fallback", "greedy"});
  CHECK(fallback.exit_code == cli::kOk);
  const json report = json::parse(fallback.out);
  CHECK(report["throughput"] == 0);
}

TEST_CASE("state explosions surface as exit 2 with a hint") {
  const CliResult r = run_cli({"bench", "--k-list", "700", "--hubs", "3",
                               "--delta", "5", "--seeds", "1", "--solver",
                               "dp"});
  CHECK(r.exit_code == cli::kInfeasible);
  CHECK(r.err.find("state explosion") != std::string::npos);
  CHECK(r.err.find("--radius") != std::string::npos);
}

TEST_CASE("emitted reports re-parse to the same value") {
  const CliResult r = run_cli({"simulate", fixture("netting_pair.json")});
  REQUIRE(r.exit_code == cli::kOk);
  const json parsed = json::parse(r.out);
  CHECK(json::parse(report::render_report(parsed)) == parsed);
}

TEST_CASE("missing subcommands and bad flags exit 3") {
  CHECK(run_cli({}).exit_code == cli::kInvalidInput);
  CHECK(run_cli({"solve"}).exit_code == cli::kInvalidInput);
  CHECK(run_cli({"frobnicate", "x"}).exit_code == cli::kInvalidInput);
  CHECK(run_cli({"solve", fixture("netting_pair.json"), "--solver", "magic"})
            .exit_code == cli::kInvalidInput);
}

TEST_CASE("help is reachable and exits cleanly") {
  const CliResult r = run_cli({"--help"});
  CHECK(r.exit_code == cli::kOk);
  CHECK(r.out.find("solve") != std::string::npos);
  CHECK(r.out.find("bench") != std::string::npos);
}
