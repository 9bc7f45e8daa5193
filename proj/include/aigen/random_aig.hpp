//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Seeded random AIG source for datasets. Gates sample their fanins from the
// already-built nodes with a recency bias (deeper, narrower circuits), and
// whole candidates are retried until they satisfy the dataset constraints:
// bounded trajectory length, bounded depth, and every input in the functional
// support of at least one output.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "aigen/aig.hpp"
#include "aigen/trajectory.hpp"

namespace aigen {

struct RandomAigOptions {
  uint32_t n_inputs = 8;
  uint32_t n_outputs = 2;
  uint32_t max_traj_len = 200;
  // Gate-count draw is uniform in [gates_min, gates_max]; zeros mean
  // "derive from n_inputs" (N and 4N respectively).
  uint32_t gates_min = 0;
  uint32_t gates_max = 0;
  double recency_p = 0.25;    // geometric age parameter for fanin sampling
  double uniform_mix = 0.5;   // probability of an unbiased fanin draw
  uint32_t d_max = kDefaultMaxDepth;
  uint32_t max_retries = 10000;
};

inline bool full_functional_support(const Aig& g) {
  const auto tables = g.eval_truth_tables();
  for (uint32_t v = 1; v <= g.n_inputs(); ++v) {
    bool dep = false;
    for (const auto& t : tables)
      if (t.depends_on(v)) {
        dep = true;
        break;
      }
    if (!dep) return false;
  }
  return true;
}

namespace detail {

inline Literal sample_fanin(const Aig& g, std::mt19937_64& rng, const RandomAigOptions& opt) {
  const uint32_t pool = g.n_nodes() - 1;  // nodes 1..n_nodes-1
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  uint32_t node;
  if (unit(rng) < opt.uniform_mix) {
    node = 1 + uint32_t(rng() % pool);
  } else {
    std::geometric_distribution<uint32_t> age(opt.recency_p);
    node = g.n_nodes() - 1 - std::min(age(rng), pool - 1);
  }
  return Literal(node, rng() & 1);
}

}  // namespace detail

/// One random candidate circuit, no constraint checking.
inline Aig random_aig_candidate(const RandomAigOptions& opt, std::mt19937_64& rng) {
  const uint32_t lo = opt.gates_min ? opt.gates_min : opt.n_inputs;
  const uint32_t hi = opt.gates_max ? opt.gates_max : 4 * opt.n_inputs;
  if (lo > hi) throw std::invalid_argument("random_aig: gates_min exceeds gates_max");
  const uint32_t n_gates = lo + uint32_t(rng() % (hi - lo + 1));
  Aig g(opt.n_inputs);
  for (uint32_t i = 0; i < n_gates; ++i) {
    Literal a = detail::sample_fanin(g, rng, opt);
    Literal b = detail::sample_fanin(g, rng, opt);
    // Prefer structurally interesting gates over x AND x / x AND NOT x.
    for (int tries = 0; tries < 3 && b.node() == a.node(); ++tries)
      b = detail::sample_fanin(g, rng, opt);
    g.add_and(a, b);
  }
  for (uint32_t o = 0; o < opt.n_outputs; ++o) g.add_output(detail::sample_fanin(g, rng, opt));
  return g;
}

/// Retries candidates until every constraint holds. Same seed, same circuit.
inline Aig random_aig(const RandomAigOptions& opt, uint64_t seed) {
  if (opt.n_inputs == 0 || opt.n_outputs == 0)
    throw std::invalid_argument("random_aig: inputs and outputs must be positive");
  if (opt.max_traj_len < opt.n_outputs + 1)
    throw std::invalid_argument("random_aig: max_traj_len below the minimal trajectory");
  std::mt19937_64 rng(seed);
  for (uint32_t attempt = 0; attempt < opt.max_retries; ++attempt) {
    Aig g = random_aig_candidate(opt, rng);
    if (g.traversal_size() + 1 > opt.max_traj_len) continue;
    if (g.depth() > opt.d_max) continue;
    if (!full_functional_support(g)) continue;
    return g;
  }
  throw std::runtime_error("random_aig: no candidate satisfied the constraints after " +
                           std::to_string(opt.max_retries) + " retries");
}

inline Aig random_aig(uint32_t n_inputs, uint32_t n_outputs, uint32_t max_traj_len, uint64_t seed) {
  RandomAigOptions opt;
  opt.n_inputs = n_inputs;
  opt.n_outputs = n_outputs;
  opt.max_traj_len = max_traj_len;
  return random_aig(opt, seed);
}

/// Concatenated exact table digest, the dedup key for dataset uniqueness.
inline std::string truth_table_key(const Aig& g) {
  std::string key;
  for (const auto& t : g.eval_truth_tables()) {
    key += t.to_hex();
    key += '|';
  }
  return key;
}

/// Keeps the first circuit per distinct truth-table tuple.
inline std::vector<Aig> dedup_by_truth_table(const std::vector<Aig>& batch) {
  std::vector<Aig> out;
  std::unordered_set<std::string> seen;
  for (const auto& g : batch) {
    if (!batch.empty() &&
        (g.n_inputs() != batch.front().n_inputs() || g.n_outputs() != batch.front().n_outputs()))
      throw std::invalid_argument("dedup_by_truth_table: mixed input/output signatures");
    if (seen.insert(truth_table_key(g)).second) out.push_back(g);
  }
  return out;
}

}  // namespace aigen
