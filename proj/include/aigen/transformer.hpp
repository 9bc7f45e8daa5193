//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Two small Transformer shapes over the autograd tape: an encoder-only
// truth-table classifier and an encoder-decoder next-token policy. Position
// information enters exclusively through a learned linear projection of the
// tree poscode bits added to the token embedding — there are no sequential
// sinusoids anywhere. Blocks are pre-LN; attention masks are additive.
//
// Decoder rows are never padded: the first row is a PAD token acting as BOS
// with an all-zero poscode, followed by the emitted prefix. Only the encoder
// context may carry trailing PADs, which are masked out of attention.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "aigen/autograd.hpp"
#include "aigen/decoder.hpp"
#include "aigen/trajectory.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

namespace aigen {

enum class Arch : uint32_t { encoder_only = 0, encoder_decoder = 1 };

struct ModelConfig {
  uint32_t n_layers = 2;  // per stack (encoder and, if present, decoder)
  uint32_t embed_width = 16;
  uint32_t ffn_width = 16;
  uint32_t n_heads = 2;
  uint32_t vocab_size = 0;    // 2N + 4
  uint32_t poscode_width = 0; // 2 * d_max + n_outputs
  uint32_t max_len = 0;
  Arch arch = Arch::encoder_only;

  bool operator==(const ModelConfig&) const = default;

  uint32_t head_dim() const { return embed_width / n_heads; }
  uint32_t n_inputs_from_vocab() const { return (vocab_size - 4) / 2; }
  /// Classifier label count: one binary label per truth-table row.
  uint32_t n_labels() const { return 1u << n_inputs_from_vocab(); }
  uint32_t head_width() const {
    return arch == Arch::encoder_only ? n_labels() : vocab_size;
  }

  void validate() const {
    if (n_layers == 0 || embed_width == 0 || ffn_width == 0 || n_heads == 0)
      throw std::invalid_argument("ModelConfig: zero-sized dimension");
    if (embed_width % n_heads != 0)
      throw std::invalid_argument("ModelConfig: embed_width must divide evenly into heads");
    if (vocab_size < 6 || vocab_size % 2 != 0)
      throw std::invalid_argument("ModelConfig: vocab_size must be 2N+4 for some N >= 1");
    if (poscode_width == 0 || max_len == 0)
      throw std::invalid_argument("ModelConfig: poscode_width and max_len must be set");
  }
};

/// Named parameters with parallel gradient accumulators. std::map keeps the
/// iteration order stable, which the checkpoint layout and deterministic
/// initialization both rely on.
class ParamStore {
public:
  Tensor& create(const std::string& name, size_t rows, size_t cols) {
    if (values_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
    values_[name] = Tensor(rows, cols);
    grads_[name] = Tensor(rows, cols);
    return values_[name];
  }

  bool has(const std::string& name) const { return values_.count(name) != 0; }

  Tensor& value(const std::string& name) {
    const auto it = values_.find(name);
    if (it == values_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
  }
  const Tensor& value(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
  }
  Tensor& grad(const std::string& name) {
    const auto it = grads_.find(name);
    if (it == grads_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
  }

  void zero_grads() {
    for (auto& [name, g] : grads_) std::fill(g.data.begin(), g.data.end(), 0.0);
  }

  size_t n_params() const {
    size_t n = 0;
    for (const auto& [name, v] : values_) n += v.numel();
    return n;
  }

  const std::map<std::string, Tensor>& values() const { return values_; }
  std::map<std::string, Tensor>& values() { return values_; }
  std::map<std::string, Tensor>& grads() { return grads_; }

private:
  std::map<std::string, Tensor> values_, grads_;
};

namespace detail {

constexpr double kMaskedScore = -1e30;  // finite so the forward NaN screen stays quiet

inline void create_attn(ParamStore& p, const std::string& prefix, uint32_t d) {
  for (const char* w : {"wq", "wk", "wv", "wo"}) p.create(prefix + "." + w, d, d);
  for (const char* b : {"bq", "bk", "bv", "bo"}) p.create(prefix + "." + b, 1, d);
}

inline void create_ln(ParamStore& p, const std::string& prefix, uint32_t d) {
  p.create(prefix + ".gain", 1, d);
  p.create(prefix + ".shift", 1, d);
}

inline void create_ffn(ParamStore& p, const std::string& prefix, uint32_t d, uint32_t f) {
  p.create(prefix + ".w1", d, f);
  p.create(prefix + ".b1", 1, f);
  p.create(prefix + ".w2", f, d);
  p.create(prefix + ".b2", 1, d);
}

}  // namespace detail

/// Lays out every parameter for the configuration and fills weights with
/// N(0, 0.02^2) draws; layernorm gains start at one, biases and shifts at zero.
inline void init_params(const ModelConfig& cfg, ParamStore& p, uint64_t seed) {
  cfg.validate();
  const uint32_t d = cfg.embed_width, f = cfg.ffn_width;
  p.create("embed.tok", cfg.vocab_size, d);
  p.create("embed.pos", cfg.poscode_width, d);
  for (uint32_t i = 0; i < cfg.n_layers; ++i) {
    const std::string e = "enc" + std::to_string(i);
    detail::create_ln(p, e + ".ln1", d);
    detail::create_attn(p, e + ".attn", d);
    detail::create_ln(p, e + ".ln2", d);
    detail::create_ffn(p, e + ".ffn", d, f);
  }
  detail::create_ln(p, "enc.final_ln", d);
  if (cfg.arch == Arch::encoder_decoder) {
    for (uint32_t i = 0; i < cfg.n_layers; ++i) {
      const std::string dd = "dec" + std::to_string(i);
      detail::create_ln(p, dd + ".ln1", d);
      detail::create_attn(p, dd + ".self", d);
      detail::create_ln(p, dd + ".ln2", d);
      detail::create_attn(p, dd + ".cross", d);
      detail::create_ln(p, dd + ".ln3", d);
      detail::create_ffn(p, dd + ".ffn", d, f);
    }
    detail::create_ln(p, "dec.final_ln", d);
  }
  p.create("head.w", d, cfg.head_width());
  p.create("head.b", 1, cfg.head_width());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.02);
  for (auto& [name, t] : p.values()) {
    const auto dot = name.rfind('.');
    const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
    if (leaf == "gain") {
      std::fill(t.data.begin(), t.data.end(), 1.0);
    } else if (leaf == "shift" || leaf.front() == 'b') {
      std::fill(t.data.begin(), t.data.end(), 0.0);
    } else {
      for (auto& v : t.data) v = dist(rng);
    }
  }
}

/// A trimmed token sequence plus its (T, poscode_width) bit matrix.
struct TokenRows {
  std::vector<int32_t> tokens;
  Tensor pos;

  size_t length() const { return tokens.size(); }
};

/// Drops nothing; converts padded model inputs as-is (PAD rows keep zero
/// poscodes). Attention masking makes the padded and trimmed forms agree.
inline TokenRows token_rows(const ModelInputs& in) {
  TokenRows r;
  r.tokens = in.tokens;
  r.pos = Tensor(in.tokens.size(), in.width);
  for (size_t i = 0; i < r.pos.data.size(); ++i) r.pos.data[i] = double(in.pos_bits[i]);
  return r;
}

inline TokenRows token_rows(const Trajectory& t, uint32_t d_max = kDefaultMaxDepth) {
  TokenRows r;
  r.pos = Tensor(t.items.size(), 2 * d_max + t.n_outputs);
  for (size_t i = 0; i < t.items.size(); ++i) {
    r.tokens.push_back(int32_t(t.items[i].token));
    const auto bits = t.items[i].pos.to_bits(d_max, t.n_outputs);
    for (size_t c = 0; c < bits.size(); ++c) r.pos.at(i, c) = double(bits[c]);
  }
  return r;
}

/// Decoder input convention: PAD with a zero poscode acts as begin-of-sequence,
/// followed by the prefix rows. Row i of the decoder output then scores the
/// (i+1)-th token of the sequence.
inline TokenRows bos_shift(const TokenRows& prefix) {
  TokenRows r;
  r.tokens.reserve(prefix.tokens.size() + 1);
  r.tokens.push_back(int32_t(Vocab::pad));
  r.tokens.insert(r.tokens.end(), prefix.tokens.begin(), prefix.tokens.end());
  r.pos = Tensor(prefix.pos.rows + 1, prefix.pos.cols);
  for (size_t i = 0; i < prefix.pos.rows; ++i)
    for (size_t c = 0; c < prefix.pos.cols; ++c) r.pos.at(i + 1, c) = prefix.pos.at(i, c);
  return r;
}

namespace detail {

inline Graph::Id pp(Graph& g, ParamStore& p, const std::string& name) {
  return g.param(p.value(name), &p.grad(name));
}

inline Graph::Id layer_norm(Graph& g, ParamStore& p, const std::string& prefix, Graph::Id x) {
  return g.layernorm_rows(x, pp(g, p, prefix + ".gain"), pp(g, p, prefix + ".shift"));
}

/// Multi-head scaled dot-product attention; `mask` is an additive
/// (rows(xq), rows(xkv)) tensor of 0 / kMaskedScore entries.
inline Graph::Id attention(Graph& g, const ModelConfig& cfg, ParamStore& p,
                           const std::string& prefix, Graph::Id xq, Graph::Id xkv,
                           Graph::Id mask) {
  const uint32_t dh = cfg.head_dim();
  const Graph::Id q = g.linear(xq, pp(g, p, prefix + ".wq"), pp(g, p, prefix + ".bq"));
  const Graph::Id k = g.linear(xkv, pp(g, p, prefix + ".wk"), pp(g, p, prefix + ".bk"));
  const Graph::Id v = g.linear(xkv, pp(g, p, prefix + ".wv"), pp(g, p, prefix + ".bv"));
  std::vector<Graph::Id> heads;
  for (uint32_t h = 0; h < cfg.n_heads; ++h) {
    const Graph::Id qh = g.cols(q, size_t(h) * dh, dh);
    const Graph::Id kh = g.cols(k, size_t(h) * dh, dh);
    const Graph::Id vh = g.cols(v, size_t(h) * dh, dh);
    Graph::Id scores = g.scale(g.matmul(qh, g.transpose(kh)), 1.0 / std::sqrt(double(dh)));
    scores = g.add(scores, mask);
    heads.push_back(g.matmul(g.softmax_rows(scores), vh));
  }
  return g.linear(g.concat_cols(heads), pp(g, p, prefix + ".wo"), pp(g, p, prefix + ".bo"));
}

inline Graph::Id ffn(Graph& g, ParamStore& p, const std::string& prefix, Graph::Id x) {
  const Graph::Id h = g.relu(g.linear(x, pp(g, p, prefix + ".w1"), pp(g, p, prefix + ".b1")));
  return g.linear(h, pp(g, p, prefix + ".w2"), pp(g, p, prefix + ".b2"));
}

inline Tensor column_mask(size_t rows, const std::vector<uint8_t>& live_cols) {
  Tensor m(rows, live_cols.size());
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < live_cols.size(); ++c)
      m.at(r, c) = live_cols[c] ? 0.0 : kMaskedScore;
  return m;
}

inline Tensor causal_mask(size_t rows) {
  Tensor m(rows, rows);
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = r + 1; c < rows; ++c) m.at(r, c) = kMaskedScore;
  return m;
}

inline std::vector<uint8_t> live_flags(const std::vector<int32_t>& tokens) {
  std::vector<uint8_t> live(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) live[i] = tokens[i] != int32_t(Vocab::pad);
  return live;
}

}  // namespace detail

/// Token embedding plus the poscode projection, summed row-wise.
inline Graph::Id embed_rows(Graph& g, const ModelConfig& cfg, ParamStore& p,
                            const TokenRows& rows) {
  if (rows.pos.cols != cfg.poscode_width)
    throw std::invalid_argument("embed_rows: poscode width does not match the configuration");
  if (rows.tokens.size() != rows.pos.rows)
    throw std::invalid_argument("embed_rows: token/poscode row count mismatch");
  for (int32_t t : rows.tokens)
    if (t < 0 || uint32_t(t) >= cfg.vocab_size)
      throw std::invalid_argument("embed_rows: token id outside the vocabulary");
  const Graph::Id tok = g.embedding(detail::pp(g, p, "embed.tok"), rows.tokens);
  const Graph::Id pos = g.matmul(g.leaf(rows.pos), detail::pp(g, p, "embed.pos"));
  return g.add(tok, pos);
}

/// Encoder stack with final layer norm; `live` marks attendable columns.
inline Graph::Id encode_stack(Graph& g, const ModelConfig& cfg, ParamStore& p, Graph::Id x,
                              const std::vector<uint8_t>& live) {
  const Graph::Id mask = g.leaf(detail::column_mask(g.value(x).rows, live));
  for (uint32_t i = 0; i < cfg.n_layers; ++i) {
    const std::string e = "enc" + std::to_string(i);
    const Graph::Id n1 = detail::layer_norm(g, p, e + ".ln1", x);
    x = g.add(x, detail::attention(g, cfg, p, e + ".attn", n1, n1, mask));
    x = g.add(x, detail::ffn(g, p, e + ".ffn", detail::layer_norm(g, p, e + ".ln2", x)));
  }
  return detail::layer_norm(g, p, "enc.final_ln", x);
}

/// Truth-table classifier logits, shape (1, 2^N).
inline Graph::Id forward_tt_classifier(Graph& g, const ModelConfig& cfg, ParamStore& p,
                                       const ModelInputs& in) {
  cfg.validate();
  if (cfg.arch != Arch::encoder_only)
    throw std::invalid_argument("forward_tt_classifier: config is not encoder_only");
  if (in.tokens.size() > cfg.max_len)
    throw std::invalid_argument("forward_tt_classifier: sequence longer than max_len");
  const TokenRows rows = token_rows(in);
  const std::vector<uint8_t> live = detail::live_flags(rows.tokens);
  const Graph::Id enc = encode_stack(g, cfg, p, embed_rows(g, cfg, p, rows), live);
  const Graph::Id pooled = g.mean_rows_masked(enc, live);
  return g.linear(pooled, detail::pp(g, p, "head.w"), detail::pp(g, p, "head.b"));
}

/// Decoder stack over an already-encoded context; `dec_in` must be BOS-shifted.
/// Returns (rows(dec_in), vocab_size) logits.
inline Graph::Id decode_stack(Graph& g, const ModelConfig& cfg, ParamStore& p, Graph::Id enc_out,
                              const std::vector<uint8_t>& ctx_live, const TokenRows& dec_in) {
  Graph::Id x = embed_rows(g, cfg, p, dec_in);
  const size_t td = dec_in.length();
  const Graph::Id self_mask = g.leaf(detail::causal_mask(td));
  const Graph::Id cross_mask = g.leaf(detail::column_mask(td, ctx_live));
  for (uint32_t i = 0; i < cfg.n_layers; ++i) {
    const std::string d = "dec" + std::to_string(i);
    const Graph::Id n1 = detail::layer_norm(g, p, d + ".ln1", x);
    x = g.add(x, detail::attention(g, cfg, p, d + ".self", n1, n1, self_mask));
    x = g.add(x, detail::attention(g, cfg, p, d + ".cross",
                                   detail::layer_norm(g, p, d + ".ln2", x), enc_out, cross_mask));
    x = g.add(x, detail::ffn(g, p, d + ".ffn", detail::layer_norm(g, p, d + ".ln3", x)));
  }
  x = detail::layer_norm(g, p, "dec.final_ln", x);
  return g.linear(x, detail::pp(g, p, "head.w"), detail::pp(g, p, "head.b"));
}

/// Full policy forward (context encoding + decoding) for training. Row i of
/// the result scores the (i+1)-th token of the sequence being generated.
inline Graph::Id forward_policy(Graph& g, const ModelConfig& cfg, ParamStore& p,
                                const TokenRows& ctx, const TokenRows& dec_in) {
  cfg.validate();
  if (cfg.arch != Arch::encoder_decoder)
    throw std::invalid_argument("forward_policy: config is not encoder_decoder");
  if (ctx.length() > cfg.max_len || dec_in.length() > cfg.max_len + 1)
    throw std::invalid_argument("forward_policy: sequence longer than max_len");
  const std::vector<uint8_t> ctx_live = detail::live_flags(ctx.tokens);
  const Graph::Id enc = encode_stack(g, cfg, p, embed_rows(g, cfg, p, ctx), ctx_live);
  return decode_stack(g, cfg, p, enc, ctx_live, dec_in);
}

/// Runs the encoder once, forward only, and hands back the value matrix —
/// generation reuses it across every step of an episode.
inline Tensor encode_context_values(const ModelConfig& cfg, ParamStore& p, const TokenRows& ctx) {
  Graph g;
  const std::vector<uint8_t> live = detail::live_flags(ctx.tokens);
  return g.value(encode_stack(g, cfg, p, embed_rows(g, cfg, p, ctx), live));
}

/// Policy adapter for the generation loop: encodes the original circuit's
/// trajectory once, then scores each next token from the prefix recorded in
/// the decode state.
class NeuralPolicy : public Policy {
public:
  NeuralPolicy(const ModelConfig& cfg, ParamStore& params, const Trajectory& context,
               uint32_t d_max = kDefaultMaxDepth)
      : cfg_(cfg), params_(params), d_max_(d_max) {
    cfg_.validate();
    if (cfg_.arch != Arch::encoder_decoder)
      throw std::invalid_argument("NeuralPolicy: config is not encoder_decoder");
    if (2 * d_max + context.n_outputs != cfg_.poscode_width)
      throw std::invalid_argument("NeuralPolicy: poscode width mismatch with context");
    ctx_rows_ = token_rows(context, d_max);
    ctx_live_ = detail::live_flags(ctx_rows_.tokens);
    enc_out_ = encode_context_values(cfg_, params_, ctx_rows_);
  }

  std::vector<double> scores(const DecodeState& state) override {
    if (state.vocab().size() != cfg_.vocab_size)
      throw std::invalid_argument("NeuralPolicy: vocabulary size mismatch");
    const TokenRows dec_in = bos_shift(token_rows(state.trajectory(), d_max_));
    Graph g;
    const Graph::Id enc = g.leaf(enc_out_);
    const Graph::Id logits = decode_stack(g, cfg_, params_, enc, ctx_live_, dec_in);
    const Tensor& lv = g.value(logits);
    std::vector<double> out(lv.cols);
    for (size_t c = 0; c < lv.cols; ++c) out[c] = lv.at(lv.rows - 1, c);
    return out;
  }

private:
  ModelConfig cfg_;
  ParamStore& params_;
  uint32_t d_max_;
  TokenRows ctx_rows_;
  std::vector<uint8_t> ctx_live_;
  Tensor enc_out_;
};

}  // namespace aigen
