//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Token-by-token circuit construction with equivalence-preserving masking.
//
// The construction state mirrors the trajectory encoding: a stack of pending
// AND gates, a list of finished primary outputs, and the structural hash of
// the growing AIG as the set of non-isomorphic gates. Before a token is
// emitted, every candidate is tentatively installed and the current output's
// partially determined truth table is checked against the specification;
// candidates that force a wrong bit anywhere are masked. Gates under
// construction resolve rows early through the 0-AND-anything-is-0 rule, so a
// completed run is exactly equivalent to the specification by construction.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "aigen/aig.hpp"
#include "aigen/trajectory.hpp"
#include "aigen/truth_table.hpp"

namespace aigen {

/// Functional specification: one complete truth table per required output.
struct EquivSpec {
  uint32_t n_inputs = 0;
  std::vector<TruthTable> tables;

  static EquivSpec from_aig(const Aig& g) { return {g.n_inputs(), g.eval_truth_tables()}; }

  uint32_t n_outputs() const { return uint32_t(tables.size()); }

  void validate() const {
    if (tables.empty()) throw std::invalid_argument("EquivSpec: at least one output table required");
    for (const auto& t : tables)
      if (t.n_vars() != n_inputs)
        throw std::invalid_argument("EquivSpec: table arity does not match the input count");
  }
};

class DecodeState {
public:
  explicit DecodeState(std::shared_ptr<const EquivSpec> spec, uint32_t d_max = kDefaultMaxDepth)
      : spec_(std::move(spec)), d_max_(d_max), vocab_{spec_->n_inputs}, aig_(spec_->n_inputs) {
    spec_->validate();
    traj_.n_inputs = spec_->n_inputs;
    traj_.n_outputs = spec_->n_outputs();
    node_tables_.push_back(TruthTable::constant(spec_->n_inputs, false));
    for (uint32_t v = 1; v <= spec_->n_inputs; ++v)
      node_tables_.push_back(TruthTable::projection(spec_->n_inputs, v));
  }

  explicit DecodeState(const EquivSpec& spec, uint32_t d_max = kDefaultMaxDepth)
      : DecodeState(std::make_shared<const EquivSpec>(spec), d_max) {}

  const EquivSpec& spec() const { return *spec_; }
  const Vocab& vocab() const { return vocab_; }
  const Trajectory& trajectory() const { return traj_; }
  const Aig& aig() const { return aig_; }
  int64_t reward() const { return reward_; }
  uint32_t merges_last_step() const { return merges_last_; }
  bool finished() const { return finished_; }
  size_t path_size() const { return path_.size(); }
  uint32_t completed_pos() const { return uint32_t(pos_.size()); }
  uint32_t d_max() const { return d_max_; }

  /// Position carried by whatever token is emitted next.
  PosCode next_poscode() const {
    if (path_.empty()) {
      const uint32_t m = spec_->n_outputs();
      return PosCode{{}, pos_.size() < m ? uint32_t(pos_.size()) : m - 1};
    }
    const Pending& top = path_.back();
    return top.pos.pushed(top.in0 ? 2 : 1, d_max_);
  }

  /// Three-valued table of the in-progress output with `candidate` occupying
  /// the next slot. Word-parallel; the scalar twin below cross-checks it.
  PartialTruthTable tentative_root_table(Token candidate) const {
    PartialTruthTable cur = candidate_table(candidate);
    for (size_t i = path_.size(); i-- > 0;) {
      const Pending& p = path_[i];
      if (p.in0)
        cur = PartialTruthTable::and_gate(complete_table(*p.in0), cur, p.inv);
      else
        cur = PartialTruthTable::and_gate(cur, PartialTruthTable::unknown(spec_->n_inputs), p.inv);
    }
    return cur;
  }

  /// Reference evaluation of one constraint row, recursive and word-free.
  Trit tentative_eval_row(Token candidate, uint64_t row) const {
    Trit cur;
    if (vocab_.is_input(candidate)) {
      const bool bit = ((row >> (vocab_.var_of(candidate) - 1)) & 1) != vocab_.inv_of(candidate);
      cur = bit ? Trit::one : Trit::zero;
    } else {
      cur = Trit::unknown;
    }
    for (size_t i = path_.size(); i-- > 0;) {
      const Pending& p = path_[i];
      Trit a, b;
      if (p.in0) {
        a = aig_.eval_row(*p.in0, row) ? Trit::one : Trit::zero;
        b = cur;
      } else {
        a = cur;
        b = Trit::unknown;
      }
      Trit v;
      if (a == Trit::zero || b == Trit::zero)
        v = Trit::zero;
      else if (a == Trit::unknown || b == Trit::unknown)
        v = Trit::unknown;
      else
        v = Trit::one;
      if (p.inv && v != Trit::unknown) v = (v == Trit::one) ? Trit::zero : Trit::one;
      cur = v;
    }
    return cur;
  }

  /// The equivalence mask: one flag per vocabulary token. A gate or input
  /// candidate survives iff tentatively installing it determines no row to
  /// the complement of the specified bit; EOS survives iff every output is
  /// finished; PAD never survives. Depth-capped gate tokens are also dropped
  /// (their children could not carry a positional code).
  std::vector<uint8_t> valid_choices() const {
    std::vector<uint8_t> mask(vocab_.size(), 0);
    if (finished_) return mask;
    const uint32_t m = spec_->n_outputs();
    if (path_.empty() && pos_.size() == m) {
      mask[Vocab::eos] = 1;
      return mask;
    }
    const size_t next_depth = path_.empty() ? 0 : path_.back().pos.path.size() + 1;
    const TruthTable& target = spec_->tables[pos_.size()];
    for (Token t = 2; t < vocab_.size(); ++t) {
      if (vocab_.is_and(t) && next_depth + 1 > d_max_) continue;
      if (vocab_.is_input(t) && next_depth > d_max_) continue;
      if (!tentative_root_table(t).contradicts(target)) mask[t] = 1;
    }
    return mask;
  }

  /// Equivalence mask refined by a token budget: a surviving candidate must
  /// leave enough room to close all open slots, build the remaining outputs,
  /// and emit EOS, each at one token minimum.
  std::vector<uint8_t> valid_choices(uint64_t remaining_budget) const {
    std::vector<uint8_t> mask = valid_choices();
    for (Token t = 0; t < vocab_.size(); ++t)
      if (mask[t] && min_tokens_with(t) > remaining_budget) mask[t] = 0;
    return mask;
  }

  /// Fewest tokens that can finish the circuit if `token` is emitted next
  /// (including the token itself and the final EOS).
  uint64_t min_tokens_with(Token token) const {
    if (token == Vocab::eos) return 1;
    uint64_t open_slots = 0;
    for (const auto& p : path_) open_slots += p.in0 ? 1 : 2;
    const uint64_t unstarted =
        spec_->n_outputs() - pos_.size() - (path_.empty() ? 0 : 1);
    if (vocab_.is_and(token)) {
      // The gate consumes a slot (or starts an output) and opens two more.
      const uint64_t slots = path_.empty() ? 2 : open_slots + 1;
      const uint64_t remaining_pos = path_.empty() ? unstarted - 1 : unstarted;
      return 1 + slots + remaining_pos + 1;
    }
    // An input either finishes a whole output (empty path) or fills a slot.
    const uint64_t slots = path_.empty() ? 0 : open_slots - 1;
    const uint64_t remaining_pos = path_.empty() ? unstarted - 1 : unstarted;
    return 1 + slots + remaining_pos + 1;
  }

  /// Advances by one token. The token must be set in valid_choices(); the
  /// equivalence condition is re-checked here so an invalid forced token is a
  /// hard error rather than silent corruption.
  void step(Token token) {
    if (finished_) throw std::logic_error("DecodeState::step: already finished");
    merges_last_ = 0;
    if (token == Vocab::eos) {
      if (!path_.empty() || pos_.size() != spec_->n_outputs())
        throw std::logic_error("DecodeState::step: EOS with unfinished outputs");
      traj_.items.push_back({token, next_poscode()});
      finished_ = true;
      return;
    }
    if (!vocab_.is_gate_or_input(token))
      throw std::logic_error("DecodeState::step: token is not a gate, input, or EOS");
    if (pos_.size() == spec_->n_outputs())
      throw std::logic_error("DecodeState::step: all outputs already finished");
    if (tentative_root_table(token).contradicts(spec_->tables[pos_.size()]))
      throw std::logic_error("DecodeState::step: token violates the specification");
    const PosCode pos = next_poscode();
    traj_.items.push_back({token, pos});
    if (vocab_.is_and(token)) {
      path_.push_back({vocab_.inv_of(token), std::nullopt, pos});
      reward_ -= 1;
      return;
    }
    deliver(Literal(vocab_.var_of(token), vocab_.inv_of(token)));
  }

private:
  struct Pending {
    bool inv;                     // output edge of this gate is inverted
    std::optional<Literal> in0;   // set once the first input subtree is done
    PosCode pos;
  };

  PartialTruthTable candidate_table(Token t) const {
    if (vocab_.is_input(t)) {
      TruthTable tt = node_tables_[vocab_.var_of(t)];
      return PartialTruthTable::complete(vocab_.inv_of(t) ? ~tt : tt);
    }
    if (vocab_.is_and(t)) return PartialTruthTable::unknown(spec_->n_inputs);
    throw std::logic_error("DecodeState: candidate must be a gate or input token");
  }

  PartialTruthTable complete_table(Literal l) const {
    const TruthTable& t = node_tables_[l.node()];
    return PartialTruthTable::complete(l.inv() ? ~t : t);
  }

  // Hands a finished literal to the enclosing gate, closing gates (and
  // merging isomorphic ones) as their second inputs fill.
  void deliver(Literal lit) {
    for (;;) {
      if (path_.empty()) {
        pos_.push_back(lit);
        return;
      }
      Pending& top = path_.back();
      if (!top.in0) {
        top.in0 = lit;
        return;
      }
      const uint32_t before = aig_.n_ands();
      const Literal node = aig_.add_and(*top.in0, lit);
      if (aig_.n_ands() == before) {
        reward_ += 1;  // isomorphic gate merged into the existing one
        ++merges_last_;
      } else {
        const AndNode& a = aig_.and_node(node.node());
        TruthTable t0 = node_tables_[a.in0.node()];
        if (a.in0.inv()) t0 = ~t0;
        TruthTable t1 = node_tables_[a.in1.node()];
        if (a.in1.inv()) t1 = ~t1;
        node_tables_.push_back(t0 & t1);
      }
      lit = node ^ top.inv;
      path_.pop_back();
    }
  }

  std::shared_ptr<const EquivSpec> spec_;
  uint32_t d_max_;
  Vocab vocab_;
  Aig aig_;
  std::vector<TruthTable> node_tables_;  // indexed by node, grown with aig_
  std::vector<Pending> path_;            // back() is the top of the stack
  std::vector<Literal> pos_;             // finished primary-output roots
  Trajectory traj_;
  int64_t reward_ = 0;
  uint32_t merges_last_ = 0;
  bool finished_ = false;

  friend Aig finalize_state(DecodeState&&);
};

/// The finished circuit with outputs attached (state must have seen EOS).
inline Aig finalize_state(DecodeState&& st) {
  if (!st.finished_) throw std::logic_error("finalize_state: construction not finished");
  Aig g = std::move(st.aig_);
  for (auto l : st.pos_) g.add_output(l);
  return g;
}

/// Scoring interface for next-token selection; scores may be any finite reals
/// (they are masked and softmax-normalized downstream).
class Policy {
public:
  virtual ~Policy() = default;
  virtual std::vector<double> scores(const DecodeState& state) = 0;
};

class UniformPolicy : public Policy {
public:
  std::vector<double> scores(const DecodeState& state) override {
    return std::vector<double>(state.vocab().size(), 0.0);
  }
};

class FunctionPolicy : public Policy {
public:
  explicit FunctionPolicy(std::function<std::vector<double>(const DecodeState&)> fn)
      : fn_(std::move(fn)) {}
  std::vector<double> scores(const DecodeState& state) override { return fn_(state); }

private:
  std::function<std::vector<double>(const DecodeState&)> fn_;
};

enum class GenStatus { ok, length_exceeded, dead_end };

struct GenResult {
  GenStatus status = GenStatus::dead_end;
  std::optional<Aig> aig;  // set iff status == ok
  Trajectory traj;         // full on success, the prefix reached on failure
  int64_t reward = 0;
};

enum class GenMode { greedy, sample };

struct GenOptions {
  uint32_t max_len = 100;
  GenMode mode = GenMode::greedy;
  uint64_t seed = 0;
  bool length_mask = false;  // refine masks by the remaining token budget
  uint32_t d_max = kDefaultMaxDepth;
};

namespace detail {

inline Token select_token(const std::vector<double>& scores, const std::vector<uint8_t>& mask,
                          GenMode mode, std::mt19937_64& rng) {
  if (mode == GenMode::greedy) {
    Token best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Token t = 0; t < mask.size(); ++t)
      if (mask[t] && scores[t] > best_score) {
        best = t;
        best_score = scores[t];
      }
    return best;
  }
  // Masked softmax sample.
  double max_score = -std::numeric_limits<double>::infinity();
  for (Token t = 0; t < mask.size(); ++t)
    if (mask[t] && scores[t] > max_score) max_score = scores[t];
  std::vector<double> weights(mask.size(), 0.0);
  for (Token t = 0; t < mask.size(); ++t)
    if (mask[t]) weights[t] = std::exp(scores[t] - max_score);
  std::discrete_distribution<uint32_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

}  // namespace detail

/// Runs the generation loop: mask, score, select, step; stops at EOS. The
/// returned circuit, when status is ok, has truth tables exactly equal to the
/// specification (callers are encouraged to verify; tests do).
inline GenResult generate(Policy& policy, const EquivSpec& spec, const GenOptions& opts) {
  DecodeState st(spec, opts.d_max);
  std::mt19937_64 rng(opts.seed);
  while (!st.finished()) {
    if (st.trajectory().size() >= opts.max_len)
      return {GenStatus::length_exceeded, std::nullopt, st.trajectory(), st.reward()};
    const auto mask = opts.length_mask
                          ? st.valid_choices(opts.max_len - st.trajectory().size())
                          : st.valid_choices();
    bool any = false;
    for (uint8_t b : mask) any |= b;
    if (!any) return {GenStatus::dead_end, std::nullopt, st.trajectory(), st.reward()};
    const auto scores = policy.scores(st);
    if (scores.size() != mask.size())
      throw std::logic_error("generate: policy returned a wrong-size score vector");
    st.step(detail::select_token(scores, mask, opts.mode, rng));
  }
  const int64_t reward = st.reward();
  Trajectory traj = st.trajectory();
  Aig g = finalize_state(std::move(st));
  return {GenStatus::ok, std::move(g), std::move(traj), reward};
}

/// Replays a fixed token sequence through the masked construction; the mask
/// logic inside step() rejects any token that breaks equivalence.
inline GenResult generate_forced(const std::vector<Token>& tokens, const EquivSpec& spec,
                                 const GenOptions& opts) {
  DecodeState st(spec, opts.d_max);
  for (Token t : tokens) {
    if (st.trajectory().size() >= opts.max_len)
      return {GenStatus::length_exceeded, std::nullopt, st.trajectory(), st.reward()};
    st.step(t);
    if (st.finished()) break;
  }
  if (!st.finished())
    return {GenStatus::dead_end, std::nullopt, st.trajectory(), st.reward()};
  const int64_t reward = st.reward();
  Trajectory traj = st.trajectory();
  Aig g = finalize_state(std::move(st));
  return {GenStatus::ok, std::move(g), std::move(traj), reward};
}

}  // namespace aigen
