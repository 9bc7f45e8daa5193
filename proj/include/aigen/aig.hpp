//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// And-inverter graph: two-input AND gates plus edge inversions. Node 0 is the
// constant-false node, nodes 1..n_inputs are primary inputs, higher indices
// are AND gates. A literal packs node index and inversion flag as
// 2*node + inv, matching the AIGER convention.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "aigen/truth_table.hpp"

namespace aigen {

class Literal {
public:
  Literal() = default;
  constexpr Literal(uint32_t node, bool inv) : data_((node << 1) | uint32_t(inv)) {}

  static constexpr Literal from_raw(uint32_t raw) {
    Literal l;
    l.data_ = raw;
    return l;
  }

  constexpr uint32_t node() const { return data_ >> 1; }
  constexpr bool inv() const { return data_ & 1u; }
  constexpr uint32_t raw() const { return data_; }

  constexpr Literal operator!() const { return from_raw(data_ ^ 1u); }
  constexpr Literal operator^(bool b) const { return from_raw(data_ ^ uint32_t(b)); }

  constexpr bool operator==(const Literal&) const = default;
  constexpr bool operator<(const Literal& o) const { return data_ < o.data_; }

  static constexpr Literal const_false() { return Literal(0, false); }
  static constexpr Literal const_true() { return Literal(0, true); }

private:
  uint32_t data_ = 0;
};

struct AndNode {
  Literal in0, in1;
};

class Aig {
public:
  explicit Aig(uint32_t n_inputs) : n_inputs_(n_inputs) {}

  uint32_t n_inputs() const { return n_inputs_; }
  uint32_t n_nodes() const { return n_inputs_ + 1 + uint32_t(ands_.size()); }
  uint32_t n_ands() const { return uint32_t(ands_.size()); }
  uint32_t n_outputs() const { return uint32_t(outputs_.size()); }

  bool is_input(uint32_t node) const { return node >= 1 && node <= n_inputs_; }
  bool is_and(uint32_t node) const { return node > n_inputs_ && node < n_nodes(); }

  Literal input_literal(uint32_t var) const {
    if (!is_input(var)) throw std::out_of_range("Aig::input_literal: variable index out of range");
    return Literal(var, false);
  }

  const AndNode& and_node(uint32_t node) const {
    assert(is_and(node));
    return ands_[node - n_inputs_ - 1];
  }

  /// Adds an AND gate with structural hashing: commutatively equal fanin
  /// pairs return the existing node's literal instead of creating a new one.
  Literal add_and(Literal a, Literal b) {
    if (a.node() >= n_nodes() || b.node() >= n_nodes())
      throw std::out_of_range("Aig::add_and: fanin literal names an unknown node");
    auto key = canonical_key(a, b);
    if (auto it = strash_.find(key); it != strash_.end()) return Literal(it->second, false);
    ands_.push_back({a, b});
    const uint32_t node = n_nodes() - 1;
    strash_.emplace(key, node);
    return Literal(node, false);
  }

  /// Adds an AND gate without structural hashing; used when reproducing
  /// parsed files whose node numbering must be preserved exactly.
  Literal add_and_raw(Literal a, Literal b) {
    if (a.node() >= n_nodes() || b.node() >= n_nodes())
      throw std::out_of_range("Aig::add_and_raw: fanin literal names an unknown node");
    ands_.push_back({a, b});
    return Literal(n_nodes() - 1, false);
  }

  void add_output(Literal l) {
    if (l.node() >= n_nodes()) throw std::out_of_range("Aig::add_output: literal names an unknown node");
    outputs_.push_back(l);
  }

  const std::vector<Literal>& outputs() const { return outputs_; }
  const std::vector<AndNode>& and_nodes() const { return ands_; }

  /// AND gates reachable from at least one output.
  uint32_t count_ands() const {
    std::vector<char> seen(n_nodes(), 0);
    uint32_t count = 0;
    std::vector<uint32_t> stack;
    for (auto o : outputs_) stack.push_back(o.node());
    while (!stack.empty()) {
      const uint32_t n = stack.back();
      stack.pop_back();
      if (seen[n]) continue;
      seen[n] = 1;
      if (!is_and(n)) continue;
      ++count;
      stack.push_back(and_node(n).in0.node());
      stack.push_back(and_node(n).in1.node());
    }
    return count;
  }

  /// Token count of the depth-first traversal that re-expands shared nodes:
  /// each output contributes the tree size of its cone, where a gate costs
  /// one token plus both children and a leaf costs one token.
  uint64_t traversal_size() const {
    std::vector<uint64_t> size(n_nodes(), 1);
    for (uint32_t n = n_inputs_ + 1; n < n_nodes(); ++n)
      size[n] = 1 + size[and_node(n).in0.node()] + size[and_node(n).in1.node()];
    uint64_t total = 0;
    for (auto o : outputs_) total += size[o.node()];
    return total;
  }

  /// Longest input-to-output path measured in AND gates.
  uint32_t depth() const {
    std::vector<uint32_t> d(n_nodes(), 0);
    for (uint32_t n = n_inputs_ + 1; n < n_nodes(); ++n)
      d[n] = 1 + std::max(d[and_node(n).in0.node()], d[and_node(n).in1.node()]);
    uint32_t best = 0;
    for (auto o : outputs_) best = std::max(best, d[o.node()]);
    return best;
  }

  TruthTable literal_truth_table(Literal l) const {
    auto tables = node_truth_tables();
    TruthTable t = tables[l.node()];
    return l.inv() ? ~t : t;
  }

  /// One table per output, in output order.
  std::vector<TruthTable> eval_truth_tables() const {
    auto tables = node_truth_tables();
    std::vector<TruthTable> out;
    out.reserve(outputs_.size());
    for (auto o : outputs_) {
      TruthTable t = tables[o.node()];
      out.push_back(o.inv() ? ~t : t);
    }
    return out;
  }

  /// Scalar reference evaluation of one literal under one assignment, where
  /// bit j of `row` is the value of x_{j+1}. Deliberately recursive and
  /// word-free so it can cross-check the bit-parallel path.
  bool eval_row(Literal l, uint64_t row) const {
    bool v;
    const uint32_t n = l.node();
    if (n == 0)
      v = false;
    else if (is_input(n))
      v = (row >> (n - 1)) & 1;
    else {
      const AndNode& g = and_node(n);
      v = eval_row(g.in0, row) && eval_row(g.in1, row);
    }
    return v != l.inv();
  }

private:
  static uint64_t canonical_key(Literal a, Literal b) {
    uint32_t x = a.raw(), y = b.raw();
    if (x > y) std::swap(x, y);
    return (uint64_t(x) << 32) | y;
  }

  std::vector<TruthTable> node_truth_tables() const {
    std::vector<TruthTable> tables;
    tables.reserve(n_nodes());
    tables.push_back(TruthTable::constant(n_inputs_, false));
    for (uint32_t v = 1; v <= n_inputs_; ++v) tables.push_back(TruthTable::projection(n_inputs_, v));
    for (const auto& g : ands_) {
      TruthTable a = tables[g.in0.node()];
      if (g.in0.inv()) a = ~a;
      TruthTable b = tables[g.in1.node()];
      if (g.in1.inv()) b = ~b;
      tables.push_back(a & b);
    }
    return tables;
  }

  uint32_t n_inputs_;
  std::vector<AndNode> ands_;
  std::vector<Literal> outputs_;
  std::unordered_map<uint64_t, uint32_t> strash_;
};

}  // namespace aigen
