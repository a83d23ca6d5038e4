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

#include "txagg/solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace txagg::solver {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

constexpr std::size_t kBruteForceLimit = 24;
constexpr std::size_t kMaxDpHubs = 5;
// Keeps every reachable prefix-sum coordinate comfortably inside a 32-bit
// lane of the packed state keys.
constexpr std::int64_t kCoordinateLimit = std::int64_t{1} << 30;

std::vector<std::int64_t> column_of(const IlpInstance& inst, std::size_t j) {
  std::vector<std::int64_t> col(inst.num_hubs, 0);
  for (std::size_t i = 0; i < inst.num_hubs; ++i) col[i] = inst.matrix[i][j];
  return col;
}

// Lexicographic order on the sorted id sequences (shorter prefix wins).
bool id_set_less(const std::vector<std::string>& a,
                 const std::vector<std::string>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<std::string> sorted_ids(const IlpInstance& inst,
                                    const std::vector<std::size_t>& cols) {
  std::vector<std::string> ids;
  ids.reserve(cols.size());
  for (std::size_t j : cols) ids.push_back(inst.txn_ids[j]);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// --- Layered DP over packed state keys -------------------------------------
//
// A state is the partial aggregate restricted to rows 0..h-2; the last row
// is the negated sum. Each coordinate is biased by 2^31 into a 32-bit lane
// of an unsigned key, so keys sort lexicographically by coordinates, a
// whole sorted layer can be shifted by one column with a single lane-safe
// addition, and layers merge like sorted lists. The guard on the total
// amount volume keeps every lane clear of overflow.

template <typename Key>
struct LayeredDp {
  std::size_t dims;
  std::vector<std::vector<Key>> layers;          // sorted keys per layer
  std::vector<std::vector<std::int64_t>> value;  // value-to-go, -1 = dead end
  bool pruned = false;
  std::uint64_t states = 0;

  static constexpr std::uint64_t kBias = 0x80000000ULL;

  explicit LayeredDp(std::size_t d) : dims(d) {}

  static Key pack_zero(std::size_t dims) {
    Key k = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      k = (k << 32) | Key{kBias};
    }
    return k;
  }

  // Full-width signed accumulation: adding the result to a packed key
  // adjusts every 32-bit lane without inter-lane carries, because each
  // biased lane stays inside [0, 2^32) under the coordinate guard.
  Key pack_delta(const std::vector<std::int64_t>& col) const {
    Key k = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      k = (k << 32) + static_cast<Key>(col[d]);
    }
    return k;
  }

  std::int64_t coord(Key key, std::size_t d) const {
    const auto lane = static_cast<std::uint32_t>(key >> (32 * (dims - 1 - d)));
    return static_cast<std::int64_t>(lane) - static_cast<std::int64_t>(kBias);
  }

  std::int64_t last_coord(Key key) const {
    std::int64_t sum = 0;
    for (std::size_t d = 0; d < dims; ++d) sum += coord(key, d);
    return -sum;
  }

  bool within_radius(Key key, std::int64_t radius) const {
    for (std::size_t d = 0; d < dims; ++d) {
      const std::int64_t c = coord(key, d);
      if (c > radius || c < -radius) return false;
    }
    const std::int64_t last = last_coord(key);
    return last <= radius && last >= -radius;
  }

  static std::size_t find(const std::vector<Key>& keys, Key key) {
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return keys.size();
    return static_cast<std::size_t>(it - keys.begin());
  }
};

struct DpRun {
  std::vector<std::size_t> taken;  // indices into the dp column list
  std::int64_t best = 0;
  std::uint64_t states = 0;
  bool pruned = false;
};

template <typename Key>
DpRun run_layered_dp(const std::vector<std::vector<std::int64_t>>& cols,
                     const std::vector<std::int64_t>& weights,
                     const std::vector<std::int64_t>& bounds,
                     std::size_t dims, std::int64_t radius,
                     std::uint64_t state_limit) {
  const std::size_t m = cols.size();
  LayeredDp<Key> dp(dims);
  dp.layers.resize(m + 1);
  dp.layers[0] = {LayeredDp<Key>::pack_zero(dims)};
  dp.states = 1;

  std::vector<Key> deltas(m);
  for (std::size_t j = 0; j < m; ++j) deltas[j] = dp.pack_delta(cols[j]);

  for (std::size_t j = 0; j < m; ++j) {
    const std::vector<Key>& cur = dp.layers[j];
    std::vector<Key> shifted;
    shifted.reserve(cur.size());
    for (Key k : cur) {
      const Key moved = k + deltas[j];
      if (dp.within_radius(moved, radius)) {
        shifted.push_back(moved);
      } else {
        dp.pruned = true;
      }
    }
    std::vector<Key>& next = dp.layers[j + 1];
    next.resize(cur.size() + shifted.size());
    auto end = std::set_union(cur.begin(), cur.end(), shifted.begin(),
                              shifted.end(), next.begin());
    next.erase(end, next.end());
    dp.states += next.size();
    if (dp.states > state_limit) {
      throw StateExplosionError("state count passed " +
                                std::to_string(state_limit) + " at column " +
                                std::to_string(j));
    }
  }

  // Backward value-to-go over the reachable layers.
  dp.value.resize(m + 1);
  {
    const std::vector<Key>& last = dp.layers[m];
    std::vector<std::int64_t>& val = dp.value[m];
    val.resize(last.size());
    for (std::size_t i = 0; i < last.size(); ++i) {
      bool feasible = true;
      for (std::size_t d = 0; d < dims && feasible; ++d) {
        feasible = dp.coord(last[i], d) <= bounds[d];
      }
      if (feasible) feasible = dp.last_coord(last[i]) <= bounds[dims];
      val[i] = feasible ? 0 : -1;
    }
  }
  for (std::size_t j = m; j-- > 0;) {
    const std::vector<Key>& cur = dp.layers[j];
    const std::vector<Key>& next = dp.layers[j + 1];
    const std::vector<std::int64_t>& next_val = dp.value[j + 1];
    std::vector<std::int64_t>& val = dp.value[j];
    val.resize(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const std::size_t skip_idx = LayeredDp<Key>::find(next, cur[i]);
      std::int64_t best = next_val[skip_idx];
      const std::size_t take_idx =
          LayeredDp<Key>::find(next, cur[i] + deltas[j]);
      if (take_idx < next.size() && next_val[take_idx] >= 0) {
        best = std::max(best, weights[j] + next_val[take_idx]);
      }
      val[i] = best;
    }
  }

  // Forward reconstruction: take a column whenever taking preserves the
  // optimum. With positive weights and id-ordered columns this yields the
  // lexicographically smallest optimal id set (brute force's tie-break).
  DpRun run;
  run.states = dp.states;
  run.pruned = dp.pruned;
  Key key = LayeredDp<Key>::pack_zero(dims);
  std::int64_t togo = dp.value[0][0];
  run.best = togo;
  for (std::size_t j = 0; j < m; ++j) {
    const std::vector<Key>& next = dp.layers[j + 1];
    const Key take_key = key + deltas[j];
    const std::size_t take_idx = LayeredDp<Key>::find(next, take_key);
    if (take_idx < next.size() && dp.value[j + 1][take_idx] >= 0 &&
        weights[j] + dp.value[j + 1][take_idx] == togo) {
      run.taken.push_back(j);
      key = take_key;
      togo = dp.value[j + 1][take_idx];
    } else {
      togo = dp.value[j + 1][LayeredDp<Key>::find(next, key)];
    }
  }
  return run;
}

struct DpProblem {
  std::vector<std::size_t> col_index;             // into the instance
  std::vector<std::vector<std::int64_t>> cols;    // dims-restricted
  std::vector<std::int64_t> weights;
  std::vector<std::int64_t> bounds;               // per row, h entries
  std::vector<std::string> forced;                // zero-column ids
  core::Amount forced_weight = 0;
  std::size_t dims = 0;
};

DpProblem make_dp_problem(const IlpInstance& inst) {
  inst.check();
  if (inst.num_hubs == 0 && inst.num_txns > 0) {
    throw InvalidInputError("instance with transactions but no hubs");
  }
  if (inst.num_hubs > kMaxDpHubs) {
    throw InvalidInputError("dp solvers support at most " +
                            std::to_string(kMaxDpHubs) + " hubs");
  }
  DpProblem p;
  p.dims = inst.num_hubs > 0 ? inst.num_hubs - 1 : 0;
  std::int64_t volume = 0;
  for (std::size_t j = 0; j < inst.num_txns; ++j) {
    if (inst.column_is_zero(j)) {
      p.forced.push_back(inst.txn_ids[j]);
      p.forced_weight += inst.weights[j];
      continue;
    }
    volume += static_cast<std::int64_t>(inst.weights[j]);
    if (volume >= kCoordinateLimit) {
      throw StateExplosionError("total transaction volume overflows state "
                                "coordinates");
    }
    p.col_index.push_back(j);
    std::vector<std::int64_t> col = column_of(inst, j);
    col.resize(p.dims);  // last row implied by the zero column sum
    p.cols.push_back(std::move(col));
    p.weights.push_back(static_cast<std::int64_t>(inst.weights[j]));
  }
  p.bounds.resize(inst.num_hubs);
  for (std::size_t i = 0; i < inst.num_hubs; ++i) {
    p.bounds[i] = static_cast<std::int64_t>(
        std::min<core::Amount>(inst.cover[i], kCoordinateLimit));
  }
  return p;
}

Solution finish_dp(const IlpInstance& inst, const DpProblem& p,
                   const DpRun& run) {
  Solution sol;
  std::vector<std::size_t> cols;
  cols.reserve(run.taken.size() + p.forced.size());
  for (std::size_t t : run.taken) cols.push_back(p.col_index[t]);
  sol.selected = sorted_ids(inst, cols);
  sol.selected.insert(sol.selected.end(), p.forced.begin(), p.forced.end());
  std::sort(sol.selected.begin(), sol.selected.end());
  sol.throughput =
      p.forced_weight + static_cast<core::Amount>(run.best);
  sol.stats.states_explored = run.states;
  sol.stats.pruned = run.pruned;
  return sol;
}

Solution solve_dp_impl(const IlpInstance& inst, std::int64_t radius,
                       bool bounded, const DpOptions& options) {
  const auto start = Clock::now();
  DpProblem p = make_dp_problem(inst);
  Solution sol;
  if (p.cols.empty()) {
    sol.selected = p.forced;
    std::sort(sol.selected.begin(), sol.selected.end());
    sol.throughput = p.forced_weight;
    sol.stats.states_explored = 1;
    sol.stats.wall_ms = elapsed_ms(start);
    return sol;
  }
  const std::int64_t effective_radius =
      bounded ? std::min(radius, kCoordinateLimit) : kCoordinateLimit;
  DpRun run =
      p.dims <= 2
          ? run_layered_dp<std::uint64_t>(p.cols, p.weights, p.bounds, p.dims,
                                          effective_radius,
                                          options.state_limit)
          : run_layered_dp<unsigned __int128>(p.cols, p.weights, p.bounds,
                                              p.dims, effective_radius,
                                              options.state_limit);
  if (!bounded) run.pruned = false;
  sol = finish_dp(inst, p, run);
  sol.stats.wall_ms = elapsed_ms(start);
  return sol;
}

}  // namespace

void IlpInstance::check() const {
  if (matrix.size() != num_hubs) {
    throw InvalidInputError("matrix row count does not match num_hubs");
  }
  for (const auto& row : matrix) {
    if (row.size() != num_txns) {
      throw InvalidInputError("matrix column count does not match num_txns");
    }
  }
  if (cover.size() != num_hubs || weights.size() != num_txns ||
      upper.size() != num_txns || txn_ids.size() != num_txns) {
    throw InvalidInputError("vector sizes do not match instance shape");
  }
  for (std::size_t j = 0; j < num_txns; ++j) {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < num_hubs; ++i) {
      sum += matrix[i][j];
      const std::int64_t mag =
          matrix[i][j] < 0 ? -matrix[i][j] : matrix[i][j];
      if (static_cast<core::Amount>(mag) > delta) {
        throw InvalidInputError("matrix entry exceeds delta in column " +
                                std::to_string(j));
      }
    }
    if (sum != 0) {
      throw InvalidInputError("column " + std::to_string(j) +
                              " does not sum to zero");
    }
  }
}

bool IlpInstance::column_is_zero(std::size_t j) const {
  for (std::size_t i = 0; i < num_hubs; ++i) {
    if (matrix[i][j] != 0) return false;
  }
  return true;
}

IlpInstance build_ilp(const core::Topology& topo,
                      const std::vector<core::Transaction>& txns) {
  topo.check();
  std::set<std::string> seen;
  std::map<core::NodeId, core::Amount> out_sum;
  std::map<core::NodeId, core::Amount> in_sum;
  for (const core::Transaction& t : txns) {
    if (t.sender == t.recipient) {
      throw InvalidInputError("transaction " + t.id +
                              " has sender == recipient");
    }
    if (!seen.insert(t.id).second) {
      throw InvalidInputError("duplicate transaction id " + t.id);
    }
    if (!topo.has_node(t.sender)) throw core::UnknownNodeError(t.sender);
    if (!topo.has_node(t.recipient)) throw core::UnknownNodeError(t.recipient);
    if (!topo.is_hub(t.sender)) out_sum[t.sender] += t.amount;
    if (!topo.is_hub(t.recipient)) in_sum[t.recipient] += t.amount;
  }
  for (const auto& [client, sum] : out_sum) {
    if (sum >= topo.clients.at(client).cap_out) {
      throw UnvalidatedInputError("client " + client +
                                  " outgoing total reaches cap_out");
    }
  }
  for (const auto& [client, sum] : in_sum) {
    if (sum >= topo.clients.at(client).cap_in) {
      throw UnvalidatedInputError("client " + client +
                                  " incoming total reaches cap_in");
    }
  }

  std::vector<const core::Transaction*> ordered;
  ordered.reserve(txns.size());
  for (const core::Transaction& t : txns) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });

  IlpInstance inst;
  inst.num_txns = ordered.size();
  inst.num_hubs = topo.factory.hubs.size();
  inst.matrix.assign(inst.num_hubs,
                     std::vector<std::int64_t>(inst.num_txns, 0));
  inst.cover = topo.factory.balances;
  inst.weights.reserve(inst.num_txns);
  inst.upper.assign(inst.num_txns, 1);
  for (std::size_t j = 0; j < ordered.size(); ++j) {
    const core::Transaction& t = *ordered[j];
    const std::size_t s = *topo.factory.index_of(topo.hub_of(t.sender));
    const std::size_t r = *topo.factory.index_of(topo.hub_of(t.recipient));
    if (s != r) {
      inst.matrix[s][j] += static_cast<std::int64_t>(t.amount);
      inst.matrix[r][j] -= static_cast<std::int64_t>(t.amount);
      inst.delta = std::max(inst.delta, t.amount);
    }
    inst.weights.push_back(t.amount);
    inst.txn_ids.push_back(t.id);
  }
  return inst;
}

Solution solve_bruteforce(const IlpInstance& inst) {
  const auto start = Clock::now();
  inst.check();
  if (inst.num_txns > kBruteForceLimit) throw TooLargeError(inst.num_txns);

  std::vector<std::size_t> nz;
  std::vector<std::size_t> forced;
  core::Amount forced_weight = 0;
  for (std::size_t j = 0; j < inst.num_txns; ++j) {
    if (inst.column_is_zero(j)) {
      forced.push_back(j);
      forced_weight += inst.weights[j];
    } else {
      nz.push_back(j);
    }
  }

  const std::size_t m = nz.size();
  std::int64_t best_value = -1;
  std::vector<std::string> best_ids;
  std::uint64_t evaluated = 0;
  std::vector<std::int64_t> agg(inst.num_hubs, 0);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    ++evaluated;
    std::fill(agg.begin(), agg.end(), 0);
    std::int64_t value = 0;
    for (std::size_t t = 0; t < m; ++t) {
      if (mask & (std::uint64_t{1} << t)) {
        const std::size_t j = nz[t];
        value += static_cast<std::int64_t>(inst.weights[j]);
        for (std::size_t i = 0; i < inst.num_hubs; ++i) {
          agg[i] += inst.matrix[i][j];
        }
      }
    }
    bool feasible = true;
    for (std::size_t i = 0; i < inst.num_hubs && feasible; ++i) {
      feasible = agg[i] <= 0 || static_cast<core::Amount>(agg[i]) <=
                                    inst.cover[i];
    }
    if (!feasible) continue;
    if (value < best_value) continue;
    std::vector<std::size_t> cols = forced;
    for (std::size_t t = 0; t < m; ++t) {
      if (mask & (std::uint64_t{1} << t)) cols.push_back(nz[t]);
    }
    std::vector<std::string> ids = sorted_ids(inst, cols);
    if (value > best_value || id_set_less(ids, best_ids)) {
      best_value = value;
      best_ids = std::move(ids);
    }
  }

  Solution sol;
  sol.selected = std::move(best_ids);
  sol.throughput = forced_weight + static_cast<core::Amount>(best_value);
  sol.stats.states_explored = evaluated;
  sol.stats.wall_ms = elapsed_ms(start);
  return sol;
}

Solution solve_dp(const IlpInstance& inst, const DpOptions& options) {
  return solve_dp_impl(inst, 0, false, options);
}

Solution solve_dp_bounded(const IlpInstance& inst, core::Amount radius,
                          const DpOptions& options) {
  const std::int64_t r = static_cast<std::int64_t>(
      std::min<core::Amount>(radius, static_cast<core::Amount>(
                                         std::numeric_limits<std::int64_t>::max())));
  return solve_dp_impl(inst, r, true, options);
}

Solution solve_greedy(const IlpInstance& inst) {
  const auto start = Clock::now();
  inst.check();
  std::vector<std::size_t> order(inst.num_txns);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (inst.weights[a] != inst.weights[b]) {
      return inst.weights[a] > inst.weights[b];
    }
    return inst.txn_ids[a] < inst.txn_ids[b];
  });

  std::vector<std::int64_t> agg(inst.num_hubs, 0);
  std::vector<std::size_t> taken;
  core::Amount throughput = 0;
  for (std::size_t j : order) {
    bool fits = true;
    for (std::size_t i = 0; i < inst.num_hubs && fits; ++i) {
      const std::int64_t next = agg[i] + inst.matrix[i][j];
      fits = next <= 0 ||
             static_cast<core::Amount>(next) <= inst.cover[i];
    }
    if (!fits) continue;
    for (std::size_t i = 0; i < inst.num_hubs; ++i) {
      agg[i] += inst.matrix[i][j];
    }
    taken.push_back(j);
    throughput += inst.weights[j];
  }

  Solution sol;
  sol.selected = sorted_ids(inst, taken);
  sol.throughput = throughput;
  sol.stats.states_explored = inst.num_txns;
  sol.stats.wall_ms = elapsed_ms(start);
  return sol;
}

Solution solve_on_topology(const core::Topology& topo,
                           const std::vector<core::Transaction>& txns,
                           const SolverChoice& choice,
                           const DpOptions& options) {
  const IlpInstance inst = build_ilp(topo, txns);
  Solution sol;
  switch (choice.kind) {
    case SolverKind::kBrute:
      sol = solve_bruteforce(inst);
      break;
    case SolverKind::kDp:
      sol = solve_dp(inst, options);
      break;
    case SolverKind::kDpBounded:
      sol = solve_dp_bounded(inst, choice.radius, options);
      break;
    case SolverKind::kGreedy:
      sol = solve_greedy(inst);
      break;
  }

  std::map<std::string, const core::Transaction*> by_id;
  for (const core::Transaction& t : txns) by_id.emplace(t.id, &t);
  std::vector<core::Transaction> chosen;
  chosen.reserve(sol.selected.size());
  for (const std::string& id : sol.selected) chosen.push_back(*by_id.at(id));
  const core::RouteResult routed =
      core::route_demand(topo, core::aggregate_demand(chosen));
  const core::Flow* flow = core::flow_of(routed);
  if (flow == nullptr) {
    throw std::logic_error(
        "solver returned a selection whose aggregate cannot be routed: " +
        core::infeasible_of(routed)->constraint);
  }
  sol.flow = *flow;
  return sol;
}

SubsetSumInstance subset_sum_reduce(core::Amount target,
                                    const std::vector<core::Amount>& items) {
  if (target == 0) throw InvalidInputError("target must be positive");
  if (items.empty()) throw InvalidInputError("items must be nonempty");
  for (core::Amount a : items) {
    if (a == 0) throw InvalidInputError("items must be positive");
  }
  SubsetSumInstance out;
  out.topology.factory.hubs = {"h1", "h2"};
  out.topology.factory.balances = {0, 0};
  out.topology.factory.fee_base = {0, 0};
  out.topology.factory.fee_prop_ppm = {0, 0};
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::string idx = std::to_string(i + 1);
    if (idx.size() < 2) idx.insert(idx.begin(), '0');
    out.txns.push_back(
        core::make_transaction("item" + idx, "h1", "h2", items[i]));
  }
  out.txns.push_back(core::make_transaction("target", "h2", "h1", target));
  return out;
}

}  // namespace txagg::solver
