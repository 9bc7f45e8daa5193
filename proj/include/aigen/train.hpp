//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Training plumbing: Adam, batched loops for the truth-table classifier and
// the next-token policy, accuracy metrics, finite-difference gradient
// verification, and loss-curve CSV output. Everything is deterministic given
// the seed — batches are drawn from one generator in a fixed order.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "aigen/checkpoint.hpp"
#include "aigen/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

namespace aigen {

struct AdamState {
  std::map<std::string, Tensor> m, v;
  uint64_t t = 0;
};

/// One Adam update from the gradients currently accumulated in the store.
inline void adam_step(ParamStore& params, AdamState& st, double lr, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8) {
  st.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, double(st.t));
  const double bc2 = 1.0 - std::pow(beta2, double(st.t));
  for (auto& [name, value] : params.values()) {
    const Tensor& g = params.grad(name);
    Tensor& m = st.m.try_emplace(name, Tensor(value.rows, value.cols)).first->second;
    Tensor& v = st.v.try_emplace(name, Tensor(value.rows, value.cols)).first->second;
    for (size_t i = 0; i < value.data.size(); ++i) {
      m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g.data[i];
      v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g.data[i] * g.data[i];
      value.data[i] -= lr * (m.data[i] / bc1) / (std::sqrt(v.data[i] / bc2) + eps);
    }
  }
}

struct ClassifierSample {
  ModelInputs inputs;
  std::vector<double> labels;  // 2^N truth-table bits of the single output
};

struct PolicySample {
  TokenRows ctx;                 // trajectory of the original circuit
  TokenRows dec_in;              // BOS-shifted target trajectory
  std::vector<int32_t> targets;  // per decoder row; -1 = ignored
};

/// Builds a teacher-forcing pair: decode `target` conditioned on `context`.
/// The final decoder row (whose input is EOS) has no successor and is ignored.
inline PolicySample make_policy_sample(const Trajectory& context, const Trajectory& target,
                                       uint32_t d_max = kDefaultMaxDepth) {
  PolicySample s;
  s.ctx = token_rows(context, d_max);
  const TokenRows tgt = token_rows(target, d_max);
  s.dec_in = bos_shift(tgt);
  s.targets.assign(tgt.tokens.begin(), tgt.tokens.end());
  s.targets.push_back(-1);
  return s;
}

struct TrainHyper {
  uint32_t batch = 16;
  double lr = 1e-3;
  uint32_t steps = 200;  // steps to run now (on top of start_step when resuming)
  uint64_t seed = 0;
  uint32_t log_every = 0;  // 0 = silent
  std::filesystem::path checkpoint_path;  // empty = no checkpointing
  uint32_t checkpoint_every = 0;          // 0 = only at the end (if path set)
  // Resume support: step offset for logs/checkpoints plus the serialized
  // generator state saved alongside the parameters. Empty = start from seed.
  uint64_t start_step = 0;
  std::string rng_state;
};

struct TrainResult {
  std::vector<double> losses;  // one entry per optimizer step
};

namespace detail {

inline void maybe_checkpoint(const ModelConfig& cfg, const ParamStore& params,
                             const AdamState& opt, const TrainHyper& hp, uint64_t step,
                             std::mt19937_64& rng, bool at_end) {
  if (hp.checkpoint_path.empty()) return;
  if (!at_end && (hp.checkpoint_every == 0 || step % hp.checkpoint_every != 0)) return;
  Checkpoint ck;
  ck.config = cfg;
  ck.params = params;
  ck.adam_m = opt.m;
  ck.adam_v = opt.v;
  ck.step = step;
  std::ostringstream os;
  os << rng;
  ck.rng_state = os.str();
  save_checkpoint(hp.checkpoint_path, ck);
}

template <typename BuildSampleLoss>
TrainResult train_loop(const ModelConfig& cfg, ParamStore& params, size_t n_samples,
                       const TrainHyper& hp, AdamState* opt_state, std::ostream* log,
                       BuildSampleLoss&& sample_loss) {
  if (n_samples == 0) throw std::invalid_argument("train: empty dataset");
  AdamState local;
  AdamState& opt = opt_state ? *opt_state : local;
  std::mt19937_64 rng(hp.seed);
  if (!hp.rng_state.empty()) {
    std::istringstream is(hp.rng_state);
    if (!(is >> rng)) throw std::invalid_argument("train: malformed rng state");
  }
  TrainResult res;
  for (uint32_t step = 1; step <= hp.steps; ++step) {
    params.zero_grads();
    double loss_value = 0;
    try {
      Graph g;
      std::vector<Graph::Id> parts;
      for (uint32_t b = 0; b < hp.batch; ++b)
        parts.push_back(sample_loss(g, size_t(rng() % n_samples)));
      const Graph::Id loss = g.scale(g.add_n(parts), 1.0 / double(hp.batch));
      loss_value = g.value(loss).at(0, 0);
      if (!std::isfinite(loss_value)) throw std::runtime_error("non-finite loss");
      g.backward(loss);
    } catch (const std::runtime_error& e) {
      // Forward ops raise on NaN/Inf; surface where training went off the rails.
      throw std::runtime_error("train: diverged at step " +
                               std::to_string(hp.start_step + step) + ": " +
                               e.what());
    }
    adam_step(params, opt, hp.lr);
    res.losses.push_back(loss_value);
    if (log && hp.log_every && step % hp.log_every == 0)
      (*log) << "step " << (hp.start_step + step) << " loss " << loss_value << "\n";
    maybe_checkpoint(cfg, params, opt, hp, hp.start_step + step, rng, false);
  }
  maybe_checkpoint(cfg, params, opt, hp, hp.start_step + hp.steps, rng, true);
  return res;
}

}  // namespace detail

/// Per-bit sigmoid cross-entropy training of the encoder-only classifier.
inline TrainResult train_tt_classifier(const ModelConfig& cfg, ParamStore& params,
                                       const std::vector<ClassifierSample>& data,
                                       const TrainHyper& hp, AdamState* opt_state = nullptr,
                                       std::ostream* log = nullptr) {
  for (const auto& s : data)
    if (s.labels.size() != cfg.n_labels())
      throw std::invalid_argument("train_tt_classifier: label width mismatch");
  return detail::train_loop(cfg, params, data.size(), hp, opt_state, log,
                            [&](Graph& g, size_t i) {
                              const auto& s = data[i];
                              return g.bce_with_logits(forward_tt_classifier(g, cfg, params, s.inputs),
                                                       s.labels);
                            });
}

/// Teacher-forced categorical cross-entropy training of the policy; rows whose
/// target is -1 (the row after EOS) are excluded, EOS itself is a trained
/// target.
inline TrainResult train_policy(const ModelConfig& cfg, ParamStore& params,
                                const std::vector<PolicySample>& data, const TrainHyper& hp,
                                AdamState* opt_state = nullptr, std::ostream* log = nullptr) {
  return detail::train_loop(cfg, params, data.size(), hp, opt_state, log,
                            [&](Graph& g, size_t i) {
                              const auto& s = data[i];
                              return g.softmax_xent_rows(forward_policy(g, cfg, params, s.ctx, s.dec_in),
                                                         s.targets);
                            });
}

struct ClassifierEval {
  double per_bit_accuracy = 0;     // primary metric
  double exact_table_accuracy = 0; // secondary: all 2^N bits right at once
};

inline ClassifierEval eval_tt_classifier(const ModelConfig& cfg, ParamStore& params,
                                         const std::vector<ClassifierSample>& data) {
  if (data.empty()) throw std::invalid_argument("eval_tt_classifier: empty dataset");
  size_t bits_right = 0, bits_total = 0, tables_right = 0;
  for (const auto& s : data) {
    Graph g;
    const Tensor& z = g.value(forward_tt_classifier(g, cfg, params, s.inputs));
    bool all = true;
    for (size_t c = 0; c < z.cols; ++c) {
      const bool pred = z.at(0, c) > 0.0;
      const bool want = s.labels[c] > 0.5;
      bits_right += pred == want;
      all = all && pred == want;
      ++bits_total;
    }
    tables_right += all;
  }
  return {double(bits_right) / double(bits_total), double(tables_right) / double(data.size())};
}

/// Teacher-forced argmax accuracy over all non-ignored rows.
inline double policy_token_accuracy(const ModelConfig& cfg, ParamStore& params,
                                    const std::vector<PolicySample>& data) {
  size_t right = 0, total = 0;
  for (const auto& s : data) {
    Graph g;
    const Tensor& z = g.value(forward_policy(g, cfg, params, s.ctx, s.dec_in));
    for (size_t r = 0; r < z.rows; ++r) {
      if (s.targets[r] < 0) continue;
      size_t best = 0;
      for (size_t c = 1; c < z.cols; ++c)
        if (z.at(r, c) > z.at(r, best)) best = c;
      right += int32_t(best) == s.targets[r];
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("policy_token_accuracy: nothing to score");
  return double(right) / double(total);
}

/// Central finite differences against backprop over every parameter
/// coordinate (or a seeded random subset when there are more than
/// `max_coords`). Returns the maximum relative error observed.
inline double grad_check(ParamStore& params,
                         const std::function<Graph::Id(Graph&)>& build_loss, double eps = 1e-4,
                         size_t max_coords = 500, uint64_t seed = 0) {
  params.zero_grads();
  {
    Graph g;
    g.backward(build_loss(g));
  }
  std::map<std::string, Tensor> analytic;
  for (auto& [name, gt] : params.grads()) analytic[name] = gt;

  std::vector<std::pair<std::string, size_t>> coords;
  for (const auto& [name, v] : params.values())
    for (size_t i = 0; i < v.data.size(); ++i) coords.emplace_back(name, i);
  if (coords.size() > max_coords) {
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(max_coords);
  }

  const auto eval = [&]() {
    Graph g;
    return g.value(build_loss(g)).at(0, 0);
  };
  double max_rel = 0;
  for (const auto& [name, i] : coords) {
    double& slot = params.value(name).data[i];
    const double saved = slot;
    slot = saved + eps;
    const double fp = eval();
    slot = saved - eps;
    const double fm = eval();
    slot = saved;
    const double numeric = (fp - fm) / (2 * eps);
    const double exact = analytic.at(name).data[i];
    const double rel = std::abs(numeric - exact) /
                       std::max({1e-8, std::abs(numeric), std::abs(exact)});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

inline void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& losses,
                           uint64_t start_step = 0) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("write_loss_csv: cannot open " + path.string());
  f << "step,loss\n";
  f.precision(17);
  for (size_t i = 0; i < losses.size(); ++i) f << (start_step + i + 1) << "," << losses[i] << "\n";
}

}  // namespace aigen
