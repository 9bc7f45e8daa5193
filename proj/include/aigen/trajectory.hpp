//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Trajectory encoding of AIGs: a memory-less depth-first traversal over each
// primary-output cone in output order, inversions absorbed into the tokens,
// plus a tree positional code per token. A node with fanout f appears f
// times; the sequence ends with a single EOS.
//
// Token ids over N inputs (vocabulary size 2N + 4):
//   0 = PAD, 1 = EOS, 2i = x_i, 2i+1 = inverted x_i (i in 1..N),
//   2N+2 = AND, 2N+3 = inverted-output AND.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aigen/aig.hpp"

namespace aigen {

using Token = uint32_t;

/// Default cap on the positional-code stack depth.
inline constexpr uint32_t kDefaultMaxDepth = 32;

struct Vocab {
  uint32_t n_inputs = 0;

  static constexpr Token pad = 0;
  static constexpr Token eos = 1;

  uint32_t size() const { return 2 * n_inputs + 4; }

  Token input_token(uint32_t var, bool inv) const {
    if (var < 1 || var > n_inputs) throw std::out_of_range("Vocab::input_token: variable out of range");
    return 2 * var + uint32_t(inv);
  }
  Token and_token(bool inv) const { return 2 * n_inputs + 2 + uint32_t(inv); }

  bool is_input(Token t) const { return t >= 2 && t < 2 * n_inputs + 2; }
  bool is_and(Token t) const { return t == and_token(false) || t == and_token(true); }
  bool is_gate_or_input(Token t) const { return is_input(t) || is_and(t); }

  uint32_t var_of(Token t) const {
    if (!is_input(t)) throw std::logic_error("Vocab::var_of: not an input token");
    return t / 2;
  }
  bool inv_of(Token t) const {
    if (!is_gate_or_input(t)) throw std::logic_error("Vocab::inv_of: token carries no inversion");
    return t & 1;
  }

  std::string name(Token t) const {
    if (t == pad) return "PAD";
    if (t == eos) return "EOS";
    if (is_input(t)) return (inv_of(t) ? "!x" : "x") + std::to_string(var_of(t));
    if (is_and(t)) return inv_of(t) ? "!and" : "and";
    return "?" + std::to_string(t);
  }
};

/// Tree position of a token: the stack of input-slot choices from the PO root
/// down to the token (most recently pushed pair first) plus the index of the
/// PO whose cone is being traversed.
struct PosCode {
  std::vector<uint8_t> path;  // entries 1 or 2; front() is the top of the stack
  uint32_t po_index = 0;

  PosCode pushed(uint8_t child_slot, uint32_t d_max = kDefaultMaxDepth) const {
    if (child_slot != 1 && child_slot != 2)
      throw std::invalid_argument("PosCode::pushed: slot must be 1 or 2");
    if (path.size() >= d_max) throw std::length_error("PosCode::pushed: path depth exceeds D_max");
    PosCode r = *this;
    r.path.insert(r.path.begin(), child_slot);
    return r;
  }

  /// Pair string, most recent first: slot 1 contributes "10", slot 2 "01".
  std::string path_string() const {
    std::string s;
    s.reserve(2 * path.size());
    for (uint8_t p : path) s += (p == 1 ? "10" : "01");
    return s;
  }

  /// Fixed-width bit vector: [path pairs, zero padding, PO one-hot], total
  /// width 2*d_max + n_outputs.
  std::vector<uint8_t> to_bits(uint32_t d_max, uint32_t n_outputs) const {
    if (path.size() > d_max) throw std::length_error("PosCode::to_bits: path deeper than D_max");
    if (po_index >= n_outputs) throw std::out_of_range("PosCode::to_bits: PO index out of range");
    std::vector<uint8_t> bits(2 * d_max + n_outputs, 0);
    for (size_t i = 0; i < path.size(); ++i) bits[2 * i + (path[i] == 1 ? 0 : 1)] = 1;
    bits[2 * d_max + po_index] = 1;
    return bits;
  }

  bool operator==(const PosCode&) const = default;
};

struct TrajectoryItem {
  Token token;
  PosCode pos;
  bool operator==(const TrajectoryItem&) const = default;
};

struct Trajectory {
  uint32_t n_inputs = 0;
  uint32_t n_outputs = 0;
  std::vector<TrajectoryItem> items;  // terminated by a single EOS item

  size_t size() const { return items.size(); }
  bool operator==(const Trajectory&) const = default;
};

namespace detail {

inline void encode_cone(const Aig& g, Literal l, const PosCode& pos, uint32_t d_max, const Vocab& v,
                        std::vector<TrajectoryItem>& out) {
  const uint32_t n = l.node();
  if (n == 0)
    throw std::invalid_argument("encode: constant nodes have no token and cannot be serialized");
  if (g.is_input(n)) {
    out.push_back({v.input_token(n, l.inv()), pos});
    return;
  }
  out.push_back({v.and_token(l.inv()), pos});
  const AndNode& a = g.and_node(n);
  encode_cone(g, a.in0, pos.pushed(1, d_max), d_max, v, out);
  encode_cone(g, a.in1, pos.pushed(2, d_max), d_max, v, out);
}

}  // namespace detail

/// Serializes an Aig as its depth-first traversal trajectory. POs are visited
/// in output order; at each gate the first input precedes the second; an
/// inverted edge flips the child's token to its inverse form.
inline Trajectory encode(const Aig& g, uint32_t d_max = kDefaultMaxDepth) {
  if (g.n_outputs() == 0) throw std::invalid_argument("encode: circuit has no outputs");
  const Vocab v{g.n_inputs()};
  Trajectory t{g.n_inputs(), g.n_outputs(), {}};
  for (uint32_t k = 0; k < g.n_outputs(); ++k)
    detail::encode_cone(g, g.outputs()[k], PosCode{{}, k}, d_max, v, t.items);
  t.items.push_back({Vocab::eos, PosCode{{}, g.n_outputs() - 1}});
  return t;
}

/// Rebuilds an Aig from a trajectory by replaying its tokens through the
/// construction stack. With merge on, isomorphic gates are combined through
/// structural hashing; with it off, every gate token creates a fresh node.
inline Aig decode_trajectory(const Trajectory& t, bool merge = true) {
  struct Pending {
    bool inv;
    std::optional<Literal> in0;
  };
  const Vocab v{t.n_inputs};
  Aig g(t.n_inputs);
  std::vector<Pending> path;
  bool saw_eos = false;

  auto complete = [&](Literal lit) {
    // Deliver a finished literal upward, closing gates as they fill.
    for (;;) {
      if (path.empty()) {
        g.add_output(lit);
        return;
      }
      Pending& top = path.back();
      if (!top.in0) {
        top.in0 = lit;
        return;
      }
      const Literal node = merge ? g.add_and(*top.in0, lit) : g.add_and_raw(*top.in0, lit);
      lit = node ^ top.inv;
      path.pop_back();
    }
  };

  for (const auto& item : t.items) {
    if (saw_eos) throw std::invalid_argument("decode_trajectory: token after EOS");
    const Token tok = item.token;
    if (tok == Vocab::eos) {
      if (!path.empty())
        throw std::invalid_argument("decode_trajectory: EOS with unfinished gates on the stack");
      saw_eos = true;
    } else if (v.is_and(tok)) {
      path.push_back({v.inv_of(tok), std::nullopt});
    } else if (v.is_input(tok)) {
      complete(Literal(v.var_of(tok), v.inv_of(tok)));
    } else {
      throw std::invalid_argument("decode_trajectory: unexpected token id " + std::to_string(tok));
    }
  }
  if (!saw_eos) throw std::invalid_argument("decode_trajectory: missing EOS");
  if (g.n_outputs() != t.n_outputs)
    throw std::invalid_argument("decode_trajectory: trajectory closed " +
                                std::to_string(g.n_outputs()) + " POs, expected " +
                                std::to_string(t.n_outputs));
  return g;
}

/// Fixed-width tensors for the models: right-padded token ids and a row-major
/// (max_len x width) positional bit matrix, width = 2*d_max + n_outputs.
struct ModelInputs {
  uint32_t max_len = 0;
  uint32_t width = 0;
  std::vector<int32_t> tokens;
  std::vector<uint8_t> pos_bits;
};

inline ModelInputs to_model_inputs(const Trajectory& t, uint32_t max_len,
                                   uint32_t d_max = kDefaultMaxDepth) {
  if (t.items.size() > max_len)
    throw std::length_error("to_model_inputs: trajectory length " + std::to_string(t.items.size()) +
                            " exceeds max_len " + std::to_string(max_len));
  ModelInputs m;
  m.max_len = max_len;
  m.width = 2 * d_max + t.n_outputs;
  m.tokens.assign(max_len, int32_t(Vocab::pad));
  m.pos_bits.assign(size_t(max_len) * m.width, 0);
  for (size_t i = 0; i < t.items.size(); ++i) {
    m.tokens[i] = int32_t(t.items[i].token);
    const auto bits = t.items[i].pos.to_bits(d_max, t.n_outputs);
    std::copy(bits.begin(), bits.end(), m.pos_bits.begin() + i * m.width);
  }
  return m;
}

}  // namespace aigen
