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

#include "txagg/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "txagg/bench.hpp"
#include "txagg/report.hpp"
#include "txagg/scenario.hpp"

namespace txagg::cli {

namespace {

struct CommonFlags {
  std::string scenario_path;
  std::string solver;
  std::optional<core::Amount> radius;
  std::string seed_hex;
  std::string output;
  std::string fallback;  // "" | "greedy"
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("scenario", flags->scenario_path, "scenario JSON file")
      ->required();
  cmd->add_option("--solver", flags->solver,
                  "override the scenario solver: brute|dp|dp-bounded|greedy");
  std::function<void(const std::string&)> radius_cb =
      [flags](const std::string& v) {
        flags->radius = static_cast<core::Amount>(std::stoull(v));
      };
  cmd->add_option_function<std::string>("--radius", radius_cb,
                                        "radius for dp-bounded")
      ->check(CLI::Number);
  cmd->add_option("--seed", flags->seed_hex,
                  "override the 64-hex-char randomness seed");
  cmd->add_option("--output", flags->output, "write the report to a file");
  cmd->add_option("--fallback", flags->fallback,
                  "fall back to this solver on state explosion or pruning")
      ->check(CLI::IsMember({"greedy"}));
}

scenario::ScenarioFile load_with_overrides(const CommonFlags& flags) {
  scenario::ScenarioFile sc = scenario::load_scenario(flags.scenario_path);
  if (!flags.solver.empty()) {
    sc.solver_name = flags.solver;
    sc.config.solver_choice.kind =
        scenario::solver_kind_from_name(flags.solver);
  }
  if (flags.radius.has_value()) {
    sc.radius = flags.radius;
    sc.config.solver_choice.radius = *flags.radius;
  }
  if (!flags.seed_hex.empty()) {
    sc.config.randomness_seed = scenario::parse_seed_hex(flags.seed_hex);
    sc.seed_hex = flags.seed_hex;
  }
  if (sc.config.solver_choice.kind == solver::SolverKind::kDpBounded &&
      !sc.radius.has_value()) {
    throw scenario::ScenarioError("dp-bounded needs a radius");
  }
  return sc;
}

int emit(const std::string& text, const std::string& output_path,
         std::ostream& out, std::ostream& err) {
  if (output_path.empty()) {
    out << text;
    return kOk;
  }
  std::ofstream f(output_path);
  if (!f) {
    err << "cannot write " << output_path << "\n";
    return kInvalidInput;
  }
  f << text;
  return kOk;
}

core::SequentialOutcome selected_baseline(
    const scenario::ScenarioFile& sc,
    const std::vector<std::string>& selected) {
  const std::set<std::string> chosen(selected.begin(), selected.end());
  std::vector<core::Transaction> order;
  for (const core::Transaction& t : sc.txns) {
    if (chosen.count(t.id)) order.push_back(t);
  }
  return core::sequential_execute(sc.topology, order);
}

struct SolveOutcome {
  report::ReportParts parts;
  bool pruned_unresolved = false;  // pruned without fallback
  bool exploded = false;           // state explosion without fallback
};

SolveOutcome run_solver_phase(const scenario::ScenarioFile& sc,
                              const CommonFlags& flags, std::ostream& err) {
  SolveOutcome out;
  const protocol::ValidationResult validated =
      protocol::validate_inputs(sc.topology, sc.txns);
  solver::SolverChoice choice = sc.config.solver_choice;
  try {
    out.parts.solution =
        solver::solve_on_topology(sc.topology, validated.kept, choice);
  } catch (const solver::StateExplosionError& e) {
    if (flags.fallback.empty()) {
      err << e.what() << "\n"
          << "hint: retry with --solver greedy or --radius N\n";
      out.exploded = true;
      return out;
    }
    choice.kind = solver::SolverKind::kGreedy;
    out.parts.solution =
        solver::solve_on_topology(sc.topology, validated.kept, choice);
  }
  if (out.parts.solution.stats.pruned &&
      choice.kind == solver::SolverKind::kDpBounded) {
    if (flags.fallback.empty()) {
      err << "dp-bounded pruned states; the result is feasible but not "
             "proven optimal\n";
      out.pruned_unresolved = true;
    } else {
      choice.kind = solver::SolverKind::kGreedy;
      out.parts.solution =
          solver::solve_on_topology(sc.topology, validated.kept, choice);
    }
  }
  out.parts.rejected = validated.rejected;
  return out;
}

int cmd_solve(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  const scenario::ScenarioFile sc = load_with_overrides(flags);
  SolveOutcome solved = run_solver_phase(sc, flags, err);
  if (solved.exploded) {
    return kInfeasible;  // no result to report
  }
  report::ReportParts& parts = solved.parts;
  parts.fees = core::transition_fee(
      sc.topology, core::apply_flow(sc.topology, parts.solution.flow));
  parts.baseline = selected_baseline(sc, parts.solution.selected);
  const int rc =
      emit(report::render_report(report::build_report(parts)), flags.output,
           out, err);
  if (rc != kOk) return rc;
  return solved.pruned_unresolved ? kInfeasible : kOk;
}

int cmd_simulate(const CommonFlags& flags, std::ostream& out,
                 std::ostream& err) {
  scenario::ScenarioFile sc = load_with_overrides(flags);
  protocol::ProtocolReport protocol_report;
  bool pruned_unresolved = false;
  try {
    protocol_report = protocol::run_protocol(sc.topology, sc.txns, sc.config,
                                             sc.adversary);
  } catch (const solver::StateExplosionError& e) {
    if (flags.fallback.empty()) {
      err << e.what() << "\n"
          << "hint: retry with --solver greedy or --radius N\n";
      return kInfeasible;
    }
    sc.config.solver_choice.kind = solver::SolverKind::kGreedy;
    protocol_report = protocol::run_protocol(sc.topology, sc.txns, sc.config,
                                             sc.adversary);
  }
  if (protocol_report.accepted.stats.pruned && flags.fallback.empty() &&
      sc.config.solver_choice.kind == solver::SolverKind::kDpBounded) {
    err << "dp-bounded pruned states; the result is feasible but not "
           "proven optimal\n";
    pruned_unresolved = true;
  }

  report::ReportParts parts;
  parts.solution = protocol_report.accepted;
  parts.rejected = protocol_report.rejected_users;
  parts.fees = protocol_report.fees;
  parts.baseline = selected_baseline(sc, parts.solution.selected);

  bool all_valid = true;
  for (const auto& [user, view] : protocol_report.views) {
    std::vector<core::Transaction> own;
    for (const core::Transaction& t : sc.txns) {
      if (t.sender == user) own.push_back(t);
    }
    const protocol::LocalValidation lv = protocol::local_validate(
        user, view, own,
        protocol::gather_peer_data(sc.topology, user, protocol_report.views));
    parts.local_validation[user] =
        lv.ok ? "ok" : protocol::to_string(lv.reason);
    all_valid = all_valid && lv.ok;
  }

  parts.execution = protocol_report.outcome;
  const int rc =
      emit(report::render_report(report::build_report(parts)), flags.output,
           out, err);
  if (rc != kOk) return rc;
  if (!all_valid || !parts.execution->committed || pruned_unresolved) {
    return kInfeasible;
  }
  return kOk;
}

int cmd_verify(const std::string& scenario_path,
               const std::string& report_path, std::ostream& out,
               std::ostream& err) {
  const scenario::ScenarioFile sc = scenario::load_scenario(scenario_path);
  std::ifstream in(report_path);
  if (!in) {
    err << "cannot open " << report_path << "\n";
    return kInvalidInput;
  }
  nlohmann::json report_json;
  try {
    in >> report_json;
  } catch (const nlohmann::json::exception& e) {
    err << "report parse failure: " << e.what() << "\n";
    return kInvalidInput;
  }
  const report::VerifyResult result =
      report::verify_report(sc, report_json);
  if (!result.ok) {
    err << "verification failed: " << result.failed_check << "\n";
    return kVerifyFailure;
  }
  out << "ok\n";
  return kOk;
}

int cmd_reduce(core::Amount target, const std::vector<core::Amount>& items,
               const std::string& output, std::ostream& out,
               std::ostream& err) {
  const solver::SubsetSumInstance reduction =
      solver::subset_sum_reduce(target, items);
  scenario::ScenarioFile sc;
  sc.topology = reduction.topology;
  sc.txns = reduction.txns;
  sc.config.num_delegates = 2;
  sc.config.pad_to = items.size() + 1;
  sc.config.timeout = 10;
  sc.config.epsilon_output = 1;
  sc.seed_hex = std::string(64, '0');
  sc.config.randomness_seed = scenario::parse_seed_hex(sc.seed_hex);
  sc.solver_name = reduction.txns.size() <= 24 ? "brute" : "dp";
  sc.config.solver_choice.kind =
      scenario::solver_kind_from_name(sc.solver_name);
  return emit(scenario::scenario_to_json(sc).dump(2) + "\n", output, out,
              err);
}

int cmd_bench(const bench::BenchParams& params, const std::string& output,
              std::ostream& out, std::ostream& err) {
  if (params.hubs < 2 || params.hubs > 5) {
    err << "--hubs must be within 2..5\n";
    return kInvalidInput;
  }
  if (params.delta == 0 || params.k_list.empty() || params.seeds == 0) {
    err << "--delta, --k-list and --seeds must be positive\n";
    return kInvalidInput;
  }
  try {
    return emit(bench::to_csv(bench::run_bench(params)), output, out, err);
  } catch (const solver::StateExplosionError& e) {
    err << e.what() << "\n"
        << "hint: bench the dp-bounded solver with --radius N\n";
    return kInfeasible;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"hub-based transaction aggregation simulator"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  CLI::App* solve = app.add_subcommand(
      "solve", "select and route a throughput-maximal sublist");
  add_common_flags(solve, &solve_flags);

  CommonFlags sim_flags;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the full pipeline including atomic execution");
  add_common_flags(simulate, &sim_flags);

  std::string verify_scenario;
  std::string verify_report_path;
  CLI::App* verify =
      app.add_subcommand("verify", "re-run local validation on a report");
  verify->add_option("scenario", verify_scenario, "scenario JSON file")
      ->required();
  verify->add_option("report", verify_report_path, "report JSON file")
      ->required();

  std::uint64_t target = 0;
  std::vector<std::uint64_t> items;
  std::string reduce_output;
  CLI::App* reduce = app.add_subcommand(
      "reduce-subset-sum", "emit the hardness-reduction scenario");
  reduce->add_option("target", target, "subset-sum target")->required();
  reduce->add_option("items", items, "positive item values")->required();
  reduce->add_option("--output", reduce_output, "write the scenario here");

  bench::BenchParams bench_params;
  std::string k_list_text;
  std::string bench_solver = "dp-bounded";
  std::string bench_output;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "time the solver on random instances");
  bench_cmd->add_option("--hubs", bench_params.hubs, "hub count (2..5)");
  bench_cmd->add_option("--delta", bench_params.delta,
                        "maximum transaction amount");
  bench_cmd->add_option("--k-list", k_list_text,
                        "comma-separated transaction counts")
      ->required();
  bench_cmd->add_option("--seeds", bench_params.seeds, "seeds per k");
  bench_cmd->add_option("--solver", bench_solver,
                        "brute|dp|dp-bounded|greedy");
  bench_cmd->add_option("--radius", bench_params.radius,
                        "radius for dp-bounded (default 2*h*delta)");
  bench_cmd->add_option("--output", bench_output, "write the CSV here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_flags, out, err);
    if (simulate->parsed()) return cmd_simulate(sim_flags, out, err);
    if (verify->parsed()) {
      return cmd_verify(verify_scenario, verify_report_path, out, err);
    }
    if (reduce->parsed()) {
      return cmd_reduce(target, items, reduce_output, out, err);
    }
    if (bench_cmd->parsed()) {
      std::stringstream ss(k_list_text);
      std::string part;
      while (std::getline(ss, part, ',')) {
        bench_params.k_list.push_back(std::stoull(part));
      }
      bench_params.kind = scenario::solver_kind_from_name(bench_solver);
      return cmd_bench(bench_params, bench_output, out, err);
    }
  } catch (const scenario::ScenarioError& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  } catch (const solver::InvalidInputError& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  } catch (const solver::TooLargeError& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::invalid_argument& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::out_of_range& e) {
    err << e.what() << "\n";
    return kInvalidInput;
  }
  return kInvalidInput;
}

int run(const std::vector<std::string>& args) {
  return run(args, std::cout, std::cerr);
}

}  // namespace txagg::cli
