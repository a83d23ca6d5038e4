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
// Deterministic random-instance benchmark for the solver family.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "txagg/solver.hpp"

namespace txagg::bench {

struct BenchParams {
  std::size_t hubs = 3;
  core::Amount delta = 5;
  std::vector<std::size_t> k_list;
  std::size_t seeds = 1;
  solver::SolverKind kind = solver::SolverKind::kDpBounded;
  // 0 selects the default 2 * hubs * delta for the bounded solver.
  core::Amount radius = 0;
};

struct BenchRow {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string solver;
  double wall_ms = 0.0;
  std::uint64_t states = 0;
};

// Uniform instances: amounts in [1, delta], sender and recipient hubs
// uniform among distinct pairs, balances uniform in [0, 10 * delta].
// Identical (hubs, delta, k, seed) give identical instances everywhere.
solver::IlpInstance random_bench_instance(std::size_t hubs,
                                          core::Amount delta, std::size_t k,
                                          std::uint64_t seed);

// Runs every (k, seed) pair in order; wall time covers the solve call
// only. Throws solver errors through (the CLI maps StateExplosion).
std::vector<BenchRow> run_bench(const BenchParams& params);

std::string to_csv(const std::vector<BenchRow>& rows);

}  // namespace txagg::bench
