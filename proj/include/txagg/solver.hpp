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
// Throughput-maximal transaction selection on the hub factory: the h x k
// integer program, four interchangeable oracles (exhaustive, exact layered
// DP, radius-bounded DP, greedy) and the subset-sum reduction used by the
// hardness-based test harness.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "txagg/core.hpp"

namespace txagg::solver {

struct TooLargeError : std::runtime_error {
  explicit TooLargeError(std::size_t k)
      : std::runtime_error("brute force limited to 24 transactions, got " +
                           std::to_string(k)) {}
};

struct StateExplosionError : std::runtime_error {
  explicit StateExplosionError(const std::string& what)
      : std::runtime_error("dp state explosion: " + what) {}
};

struct UnvalidatedInputError : std::runtime_error {
  explicit UnvalidatedInputError(const std::string& what)
      : std::runtime_error("unvalidated input: " + what) {}
};

struct InvalidInputError : std::runtime_error {
  explicit InvalidInputError(const std::string& what)
      : std::runtime_error("invalid input: " + what) {}
};

// The integer program of the restricted topology. Column j carries
// +amount_j in the sender's hub row and -amount_j in the recipient's hub
// row (all-zero when both endpoints hang off the same hub). A selection
// x in {0,1}^k is feasible exactly when matrix * x <= cover, client
// channels being guaranteed by the input-validation precondition.
struct IlpInstance {
  std::size_t num_txns = 0;                       // k
  std::size_t num_hubs = 0;                       // h
  std::vector<std::vector<std::int64_t>> matrix;  // h rows x k columns
  std::vector<core::Amount> cover;                // b, factory balances
  std::vector<core::Amount> weights;              // w_j = amount_j
  std::vector<std::uint8_t> upper;                // all ones: 0/1 selection
  core::Amount delta = 0;                         // max |matrix entry|
  std::vector<std::string> txn_ids;               // column -> transaction id

  // Column zero-sum / delta / shape invariants. Throws InvalidInputError.
  void check() const;
  bool column_is_zero(std::size_t j) const;
};

struct SolverStats {
  std::uint64_t states_explored = 0;
  bool pruned = false;
  double wall_ms = 0.0;
};

struct Solution {
  std::vector<std::string> selected;  // sorted transaction ids
  core::Amount throughput = 0;
  core::Flow flow;  // attached by solve_on_topology
  SolverStats stats;
};

struct DpOptions {
  std::uint64_t state_limit = 100'000'000ULL;  // cumulative layer entries
};

// Columns are ordered by transaction id ascending (canonical order: makes
// runs deterministic and aligns the DP tie-break with brute force).
// Throws UnvalidatedInputError when a client's submitted totals reach its
// channel capacity, i.e. when input validation was skipped.
IlpInstance build_ilp(const core::Topology& topo,
                      const std::vector<core::Transaction>& txns);

// Enumerates all subsets; ground-truth oracle. Among maximal-throughput
// feasible selections that include every zero-column transaction, returns
// the lexicographically smallest sorted-id set. Throws TooLargeError for
// k > 24.
Solution solve_bruteforce(const IlpInstance& inst);

// Layered dynamic program over columns in instance order; a state is the
// partial aggregate restricted to the first h-1 rows (the last row is
// determined by the zero column sums). Exact: matches solve_bruteforce,
// including the tie-break. Throws StateExplosionError when the cumulative
// state count passes options.state_limit.
Solution solve_dp(const IlpInstance& inst, const DpOptions& options = {});

// Same DP, but intermediate states with max-norm above radius (over the
// full h-dimensional aggregate) are discarded. Exact when radius covers
// every reachable prefix sum (e.g. radius >= sum of amounts); otherwise
// feasible but possibly suboptimal, with stats.pruned set whenever any
// state was discarded.
Solution solve_dp_bounded(const IlpInstance& inst, core::Amount radius,
                          const DpOptions& options = {});

// Sort by amount descending (ties by id ascending), keep whatever fits the
// running aggregate. Always feasible, not optimal.
Solution solve_greedy(const IlpInstance& inst);

enum class SolverKind { kBrute, kDp, kDpBounded, kGreedy };

struct SolverChoice {
  SolverKind kind = SolverKind::kDp;
  core::Amount radius = 0;  // used by kDpBounded
};

// build_ilp + the chosen oracle + routing of the selected aggregate, which
// fills Solution::flow. Routing failure after a successful solve is an
// internal contradiction and throws std::logic_error.
Solution solve_on_topology(const core::Topology& topo,
                           const std::vector<core::Transaction>& txns,
                           const SolverChoice& choice,
                           const DpOptions& options = {});

struct SubsetSumInstance {
  core::Topology topology;
  std::vector<core::Transaction> txns;
};

// Hardness reduction from subset sum: two hubs with zero factory
// balances, one hub1->hub2 transaction per item and a single hub2->hub1
// transaction of the target. Any nonempty feasible selection certifies a
// subset of items summing to the target.
SubsetSumInstance subset_sum_reduce(core::Amount target,
                                    const std::vector<core::Amount>& items);

}  // namespace txagg::solver
