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

#include "txagg/bench.hpp"

#include <sstream>

#include "txagg/rng.hpp"

namespace txagg::bench {

namespace {

std::string padded(std::uint64_t v, std::size_t width) {
  std::string s = std::to_string(v);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

std::string solver_name(const BenchParams& params) {
  switch (params.kind) {
    case solver::SolverKind::kBrute:
      return "brute";
    case solver::SolverKind::kDp:
      return "dp";
    case solver::SolverKind::kDpBounded:
      return "dp-bounded";
    case solver::SolverKind::kGreedy:
      return "greedy";
  }
  return "dp";
}

}  // namespace

solver::IlpInstance random_bench_instance(std::size_t hubs,
                                          core::Amount delta, std::size_t k,
                                          std::uint64_t seed) {
  if (hubs < 2 || delta == 0) {
    throw solver::InvalidInputError(
        "bench instances need at least two hubs and a positive delta");
  }
  SplitMix64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (hubs + 1)) ^
                 (delta * 0xD1B54A32D192ED03ULL));
  solver::IlpInstance inst;
  inst.num_hubs = hubs;
  inst.num_txns = k;
  inst.matrix.assign(hubs, std::vector<std::int64_t>(k, 0));
  inst.cover.resize(hubs);
  for (auto& b : inst.cover) b = rng.below(10 * delta + 1);
  inst.upper.assign(k, 1);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t s = rng.below(hubs);
    std::size_t r = rng.below(hubs - 1);
    if (r >= s) ++r;
    const core::Amount w = 1 + rng.below(delta);
    inst.matrix[s][j] = static_cast<std::int64_t>(w);
    inst.matrix[r][j] = -static_cast<std::int64_t>(w);
    inst.delta = std::max(inst.delta, w);
    inst.weights.push_back(w);
    inst.txn_ids.push_back("t" + padded(j, 7));
  }
  return inst;
}

std::vector<BenchRow> run_bench(const BenchParams& params) {
  std::vector<BenchRow> rows;
  const core::Amount radius =
      params.radius != 0
          ? params.radius
          : 2 * static_cast<core::Amount>(params.hubs) * params.delta;
  for (std::size_t k : params.k_list) {
    for (std::uint64_t seed = 0; seed < params.seeds; ++seed) {
      const solver::IlpInstance inst =
          random_bench_instance(params.hubs, params.delta, k, seed);
      solver::Solution sol;
      switch (params.kind) {
        case solver::SolverKind::kBrute:
          sol = solver::solve_bruteforce(inst);
          break;
        case solver::SolverKind::kDp:
          sol = solver::solve_dp(inst);
          break;
        case solver::SolverKind::kDpBounded:
          sol = solver::solve_dp_bounded(inst, radius);
          break;
        case solver::SolverKind::kGreedy:
          sol = solver::solve_greedy(inst);
          break;
      }
      rows.push_back(BenchRow{k, seed, solver_name(params),
                              sol.stats.wall_ms,
                              sol.stats.states_explored});
    }
  }
  return rows;
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "k,seed,solver,wall_ms,states\n";
  for (const BenchRow& r : rows) {
    out << r.k << "," << r.seed << "," << r.solver << "," << r.wall_ms << ","
        << r.states << "\n";
  }
  return out.str();
}

}  // namespace txagg::bench
