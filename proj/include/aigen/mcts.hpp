//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Monte-Carlo tree search over masked token decoding, minimizing gate count.
// Three departures from textbook UCT, all deliberate:
//  - the final action at each decided step is the child with the best single
//    return ever observed, not the most visited;
//  - no learned value function — leaf estimates come from rollouts that sample
//    the (masked) policy itself;
//  - node priors are masked-renormalized policy probabilities, PUCT-style.
// Returns are raw integer episode rewards (one -1 per AND, +1 per merge);
// selection minmax-normalizes the mean returns across siblings so the
// exploration term stays meaningful on that unbounded scale. Dead-ended or
// over-length rollouts back up a sentinel strictly worse than any legal
// return and never touch best_return_seen.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "aigen/decoder.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <random>

namespace aigen {

/// Reward granted for emitting one token: −1 per AND gate, 0 per input or
/// EOS, plus one for every gate the strashing step merged away.
inline int64_t step_reward(const Vocab& v, Token t, uint32_t merges) {
  if (v.is_and(t)) return -1 + int64_t(merges);
  if (v.is_input(t)) return int64_t(merges);
  return 0;
}

struct SearchConfig {
  uint32_t S = 1;      // decision steps (from the start) that run search
  uint32_t R = 5;      // rollouts per searched step
  double c_uct = 1.4;  // PUCT exploration weight
  uint64_t seed = 0;

  void validate() const {
    if (R < 1) throw std::invalid_argument("SearchConfig: R must be at least 1");
  }
};

namespace detail {

/// Strictly below every achievable episode return (returns are bounded below
/// by -max_len, one lost gate per emitted token at worst).
inline double failed_return(uint32_t max_len) { return -2.0 * double(max_len) - 1.0; }

struct McNode {
  DecodeState state;
  std::map<Token, McNode> children;
  uint32_t visit_count = 0;
  double value_sum = 0;
  double best_return_seen = -std::numeric_limits<double>::infinity();
  bool expanded = false;
  std::vector<uint8_t> mask;     // valid_choices at this state (set on expansion)
  std::vector<double> priors;    // masked-renormalized policy probabilities

  explicit McNode(DecodeState s) : state(std::move(s)) {}

  double mean_value() const { return visit_count ? value_sum / double(visit_count) : 0.0; }
};

inline std::vector<uint8_t> state_mask(const DecodeState& st, const GenOptions& opts) {
  if (st.trajectory().size() >= opts.max_len) return std::vector<uint8_t>(st.vocab().size(), 0);
  return opts.length_mask ? st.valid_choices(opts.max_len - uint32_t(st.trajectory().size()))
                          : st.valid_choices();
}

inline void expand(McNode& node, Policy& policy, const GenOptions& opts) {
  node.mask = state_mask(node.state, opts);
  node.priors.assign(node.mask.size(), 0.0);
  bool any = false;
  for (uint8_t m : node.mask) any = any || m;
  if (any) {
    const std::vector<double> scores = policy.scores(node.state);
    double mx = -std::numeric_limits<double>::infinity();
    for (Token t = 0; t < node.mask.size(); ++t)
      if (node.mask[t]) mx = std::max(mx, scores[t]);
    double sum = 0;
    for (Token t = 0; t < node.mask.size(); ++t)
      if (node.mask[t]) sum += (node.priors[t] = std::exp(scores[t] - mx));
    for (auto& p : node.priors) p /= sum;
  }
  node.expanded = true;
}

/// Samples the masked policy to the end of the episode; returns the episode
/// return on completion, or the failure sentinel.
inline double rollout(DecodeState st, Policy& policy, const GenOptions& opts,
                      std::mt19937_64& rng) {
  while (!st.finished()) {
    const std::vector<uint8_t> mask = state_mask(st, opts);
    bool any = false;
    for (uint8_t m : mask) any = any || m;
    if (!any) return failed_return(opts.max_len);
    st.step(detail::select_token(policy.scores(st), mask, GenMode::sample, rng));
  }
  return double(st.reward());
}

/// PUCT selection. Mean returns are minmax-normalized across the node's valid
/// moves before the exploration bonus is added: raw returns span from -1 down
/// to the failure sentinel, and on that scale a fixed c_uct bonus could never
/// recover a child whose single rollout happened to dead-end.
inline Token select_puct(const McNode& node, double c_uct) {
  std::vector<double> q(node.mask.size(), 0.0);
  double qmin = std::numeric_limits<double>::infinity();
  double qmax = -std::numeric_limits<double>::infinity();
  for (Token t = 0; t < node.mask.size(); ++t) {
    if (!node.mask[t]) continue;
    const auto it = node.children.find(t);
    q[t] = it != node.children.end() && it->second.visit_count > 0 ? it->second.mean_value()
                                                                   : node.mean_value();
    qmin = std::min(qmin, q[t]);
    qmax = std::max(qmax, q[t]);
  }
  Token best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  const double sqrt_n = std::sqrt(double(node.visit_count) + 1.0);
  for (Token t = 0; t < node.mask.size(); ++t) {
    if (!node.mask[t]) continue;
    const auto it = node.children.find(t);
    const uint32_t n = it != node.children.end() ? it->second.visit_count : 0;
    const double qn = qmax > qmin ? (q[t] - qmin) / (qmax - qmin) : 0.5;
    const double score = qn + c_uct * node.priors[t] * sqrt_n / (1.0 + double(n));
    if (score > best_score) {
      best_score = score;
      best = t;
    }
  }
  return best;
}

}  // namespace detail

/// One search step: R simulations from `root_state`, then the root child with
/// the maximum observed completed return (ties to the lowest token id; if no
/// rollout ever completed, the most visited child). Returns nullopt when the
/// root itself has no valid token.
inline std::optional<Token> mcts_decide(const DecodeState& root_state, Policy& policy,
                                        const SearchConfig& cfg, const GenOptions& opts,
                                        std::mt19937_64& rng) {
  cfg.validate();
  detail::McNode root(root_state);
  detail::expand(root, policy, opts);
  bool any = false;
  for (uint8_t m : root.mask) any = any || m;
  if (!any) return std::nullopt;

  for (uint32_t sim = 0; sim < cfg.R; ++sim) {
    std::vector<detail::McNode*> path{&root};
    detail::McNode* node = &root;
    double ret = 0;
    bool failed = false;
    while (true) {
      if (node->state.finished()) {
        ret = double(node->state.reward());
        break;
      }
      if (!node->expanded) detail::expand(*node, policy, opts);
      bool node_any = false;
      for (uint8_t m : node->mask) node_any = node_any || m;
      if (!node_any) {  // dead end inside the tree
        ret = detail::failed_return(opts.max_len);
        failed = true;
        break;
      }
      const Token t = detail::select_puct(*node, cfg.c_uct);
      auto it = node->children.find(t);
      if (it == node->children.end()) {
        DecodeState next = node->state;
        next.step(t);
        it = node->children.emplace(t, detail::McNode(std::move(next))).first;
        path.push_back(&it->second);
        detail::McNode& leaf = it->second;
        if (leaf.state.finished()) {
          ret = double(leaf.state.reward());
        } else {
          detail::expand(leaf, policy, opts);
          ret = detail::rollout(leaf.state, policy, opts, rng);
          failed = ret <= detail::failed_return(opts.max_len);
        }
        break;
      }
      node = &it->second;
      path.push_back(node);
    }
    for (detail::McNode* n : path) {
      n->visit_count += 1;
      n->value_sum += ret;
      if (!failed) n->best_return_seen = std::max(n->best_return_seen, ret);
    }
  }

  std::optional<Token> choice;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [t, child] : root.children) {
    if (child.best_return_seen > best) {
      best = child.best_return_seen;
      choice = t;
    }
  }
  if (!choice) {  // every simulation failed; fall back to the most visited
    uint32_t most = 0;
    for (const auto& [t, child] : root.children) {
      if (child.visit_count > most) {
        most = child.visit_count;
        choice = t;
      }
    }
  }
  return choice;
}

/// Full synthesis episode: MCTS for the first S decision steps, greedy masked
/// decoding afterwards. The result is re-verified against the specification
/// before being returned (it cannot fail; treat a failure as a logic error).
inline GenResult synthesize_mcts(Policy& policy, const EquivSpec& spec, const SearchConfig& cfg,
                                 const GenOptions& opts) {
  cfg.validate();
  DecodeState st(spec, opts.d_max);
  std::mt19937_64 rng(cfg.seed);
  uint32_t decision = 0;
  while (!st.finished()) {
    if (st.trajectory().size() >= opts.max_len)
      return {GenStatus::length_exceeded, std::nullopt, st.trajectory(), st.reward()};
    Token token;
    if (decision < cfg.S) {
      const auto chosen = mcts_decide(st, policy, cfg, opts, rng);
      if (!chosen) return {GenStatus::dead_end, std::nullopt, st.trajectory(), st.reward()};
      token = *chosen;
    } else {
      const std::vector<uint8_t> mask = detail::state_mask(st, opts);
      bool any = false;
      for (uint8_t m : mask) any = any || m;
      if (!any) return {GenStatus::dead_end, std::nullopt, st.trajectory(), st.reward()};
      token = detail::select_token(policy.scores(st), mask, GenMode::greedy, rng);
    }
    st.step(token);
    ++decision;
  }
  Trajectory traj = st.trajectory();
  const int64_t reward = st.reward();
  Aig g = finalize_state(std::move(st));
  if (g.eval_truth_tables() != spec.tables)
    throw std::logic_error("synthesize_mcts: masked construction produced a non-equivalent "
                           "circuit; this indicates a defect in the masking layer");
  return {GenStatus::ok, std::move(g), std::move(traj), reward};
}

}  // namespace aigen
