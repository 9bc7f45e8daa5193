//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include "aigen/autograd.hpp"
#include "aigen/train.hpp"
#include "aigen/transformer.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace aigen;

namespace {

Tensor randn(size_t r, size_t c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Tensor t(r, c);
  for (auto& v : t.data) v = d(rng);
  return t;
}

/// Keeps ReLU test points away from the kink so central differences are clean.
Tensor randn_offset(size_t r, size_t c, std::mt19937_64& rng) {
  Tensor t = randn(r, c, rng);
  for (auto& v : t.data) v += (v >= 0 ? 0.5 : -0.5);
  return t;
}

/// Contracts a (r, c) value to a scalar with fixed random row/col vectors so
/// every entry receives a distinct, nonzero downstream gradient.
Graph::Id contract(Graph& g, Graph::Id y, std::mt19937_64& rng) {
  const Tensor& v = g.value(y);
  return g.matmul(g.matmul(g.leaf(randn(1, v.rows, rng)), y), g.leaf(randn(v.cols, 1, rng)));
}

}  // namespace

TEST_CASE("tensor shape bookkeeping", "[autograd]") {
  Tensor t(2, 3);
  REQUIRE(t.numel() == 6);
  t.at(1, 2) = 5.0;
  REQUIRE(t.data[5] == 5.0);
  REQUIRE_THROWS_AS(Tensor::from(2, 2, {1.0, 2.0, 3.0}), std::invalid_argument);
  const Tensor u = Tensor::from(2, 2, {1, 2, 3, 4});
  REQUIRE(u.at(1, 0) == 3.0);
}

TEST_CASE("elementwise and matmul forward values", "[autograd]") {
  Graph g;
  const auto a = g.leaf(Tensor::from(2, 2, {1, 2, 3, 4}));
  const auto b = g.leaf(Tensor::from(2, 2, {5, 6, 7, 8}));
  REQUIRE(g.value(g.add(a, b)).data == std::vector<double>{6, 8, 10, 12});
  REQUIRE(g.value(g.mul(a, b)).data == std::vector<double>{5, 12, 21, 32});
  REQUIRE(g.value(g.scale(a, -2.0)).data == std::vector<double>{-2, -4, -6, -8});

  const auto m = g.leaf(Tensor::from(2, 3, {1, 2, 3, 4, 5, 6}));
  const auto n = g.leaf(Tensor::from(3, 2, {7, 8, 9, 10, 11, 12}));
  // Hand-computed product.
  REQUIRE(g.value(g.matmul(m, n)).data == std::vector<double>{58, 64, 139, 154});
  REQUIRE(g.value(g.transpose(m)).data == std::vector<double>{1, 4, 2, 5, 3, 6});

  const auto bias = g.leaf(Tensor::from(1, 3, {10, 20, 30}));
  REQUIRE(g.value(g.add_rowwise(m, bias)).data == std::vector<double>{11, 22, 33, 14, 25, 36});
}

TEST_CASE("softmax rows equals hand-normalized exponentials", "[autograd]") {
  Graph g;
  const auto z = g.leaf(Tensor::from(1, 3, {0.0, 0.0, std::log(3.0)}));
  const Tensor& p = g.value(g.softmax_rows(z));
  REQUIRE(p.at(0, 0) == Catch::Approx(0.2).margin(1e-12));
  REQUIRE(p.at(0, 1) == Catch::Approx(0.2).margin(1e-12));
  REQUIRE(p.at(0, 2) == Catch::Approx(0.6).margin(1e-12));
}

TEST_CASE("layernorm normalizes each row to zero mean unit variance", "[autograd]") {
  Graph g;
  const auto x = g.leaf(Tensor::from(2, 4, {1, 2, 3, 4, -1, -1, -1, 7}));
  const auto gain = g.leaf(Tensor::from(1, 4, {2, 2, 2, 2}));
  const auto shift = g.leaf(Tensor::from(1, 4, {1, 1, 1, 1}));
  const Tensor& y = g.value(g.layernorm_rows(x, gain, shift));
  // Row 0: mean 2.5, var 1.25.
  REQUIRE(y.at(0, 0) == Catch::Approx(1 + 2 * (-1.5) / std::sqrt(1.25 + 1e-5)).margin(1e-9));
  REQUIRE(y.at(0, 3) == Catch::Approx(1 + 2 * (1.5) / std::sqrt(1.25 + 1e-5)).margin(1e-9));
  // Each normalized row has mean ~0 before gain/shift, so y row mean = shift.
  for (size_t r = 0; r < 2; ++r) {
    double mean = 0;
    for (size_t c = 0; c < 4; ++c) mean += y.at(r, c);
    REQUIRE(mean / 4.0 == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("embedding gathers rows and scatters gradients", "[autograd]") {
  Graph g;
  ParamStore p;
  p.create("tab", 4, 2) = Tensor::from(4, 2, {0, 1, 10, 11, 20, 21, 30, 31});
  const auto e = g.embedding(g.param(p.value("tab"), &p.grad("tab")), {2, 0, 2});
  REQUIRE(g.value(e).data == std::vector<double>{20, 21, 0, 1, 20, 21});
  // Sum all entries and backprop: row 2 is used twice.
  Graph::Id loss = g.matmul(g.matmul(g.leaf(Tensor::from(1, 3, {1, 1, 1})), e),
                            g.leaf(Tensor::from(2, 1, {1, 1})));
  g.backward(loss);
  REQUIRE(p.grad("tab").data == std::vector<double>{1, 1, 0, 0, 2, 2, 0, 0});
}

TEST_CASE("parameter reuse accumulates both gradient paths", "[autograd]") {
  ParamStore p;
  p.create("x", 1, 1).at(0, 0) = 3.0;
  Graph g;
  const auto x1 = g.param(p.value("x"), &p.grad("x"));
  const auto x2 = g.param(p.value("x"), &p.grad("x"));
  REQUIRE(x1 == x2);  // one tape node per parameter per graph
  const auto y = g.mul(x1, x2);
  g.backward(y);
  REQUIRE(p.grad("x").at(0, 0) == 6.0);  // d(x^2)/dx = 2x

  // A second graph accumulates unless grads are cleared.
  Graph g2;
  g2.backward(g2.scale(g2.param(p.value("x"), &p.grad("x")), 2.0));
  REQUIRE(p.grad("x").at(0, 0) == 8.0);
  p.zero_grads();
  REQUIRE(p.grad("x").at(0, 0) == 0.0);
}

TEST_CASE("shape violations and illegal roots are rejected", "[autograd]") {
  Graph g;
  const auto a = g.leaf(Tensor(2, 2));
  const auto b = g.leaf(Tensor(2, 3));
  REQUIRE_THROWS_AS(g.add(a, b), std::invalid_argument);
  REQUIRE_THROWS_AS(g.mul(a, b), std::invalid_argument);
  REQUIRE_THROWS_AS(g.matmul(b, b), std::invalid_argument);
  REQUIRE_THROWS_AS(g.add_rowwise(a, b), std::invalid_argument);
  REQUIRE_THROWS_AS(g.cols(a, 1, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(g.embedding(a, {5}), std::invalid_argument);
  REQUIRE_THROWS_AS(g.mean_rows_masked(a, {1, 1, 1}), std::invalid_argument);
  REQUIRE_THROWS_AS(g.mean_rows_masked(a, {0, 0}), std::invalid_argument);
  REQUIRE_THROWS_AS(g.backward(b), std::invalid_argument);
}

TEST_CASE("non-finite forward values are a hard error", "[autograd]") {
  Graph g;
  const auto big = g.leaf(Tensor::from(1, 1, {1e308}));
  REQUIRE_THROWS_AS(g.mul(big, big), std::runtime_error);  // overflows to inf
  const auto z = g.leaf(Tensor::from(1, 1, {0.0}));
  const auto inf = g.leaf(Tensor::from(1, 1, {std::numeric_limits<double>::infinity()}));
  REQUIRE_THROWS_AS(g.mul(inf, z), std::runtime_error);  // inf * 0 = NaN
}

TEST_CASE("gradient check covers every primitive op", "[autograd]") {
  std::mt19937_64 rng(42);
  ParamStore p;
  p.create("a", 3, 4) = randn_offset(3, 4, rng);
  p.create("b", 3, 4) = randn_offset(3, 4, rng);
  p.create("w", 4, 5) = randn(4, 5, rng);
  p.create("bias", 1, 4) = randn(1, 4, rng);
  p.create("gain", 1, 4) = randn(1, 4, rng, 0.2);
  p.create("shift", 1, 4) = randn(1, 4, rng, 0.2);
  for (auto& v : p.value("gain").data) v += 1.0;

  const auto param = [&p](Graph& g, const char* name) {
    return g.param(p.value(name), &p.grad(name));
  };

  struct Case {
    const char* name;
    std::function<Graph::Id(Graph&, std::mt19937_64&)> build;
  };
  // Each case builds loss = u^T op(params) v with fresh deterministic u, v.
  const std::vector<Case> cases = {
      {"add", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.add(param(g, "a"), param(g, "b")), r);
       }},
      {"add_rowwise", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.add_rowwise(param(g, "a"), param(g, "bias")), r);
       }},
      {"mul", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.mul(param(g, "a"), param(g, "b")), r);
       }},
      {"scale", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.scale(param(g, "a"), -1.7), r);
       }},
      {"matmul", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.matmul(param(g, "a"), param(g, "w")), r);
       }},
      {"transpose", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.transpose(param(g, "a")), r);
       }},
      {"relu", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.relu(param(g, "a")), r);
       }},
      {"sigmoid", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.sigmoid(param(g, "a")), r);
       }},
      {"softmax_rows", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.softmax_rows(param(g, "a")), r);
       }},
      {"layernorm_rows", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.layernorm_rows(param(g, "a"), param(g, "gain"), param(g, "shift")),
                         r);
       }},
      {"embedding", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.embedding(param(g, "w"), {1, 3, 1, 0}), r);
       }},
      {"cols", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.cols(param(g, "a"), 1, 2), r);
       }},
      {"concat_cols", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.concat_cols({param(g, "a"), param(g, "b")}), r);
       }},
      {"mean_rows_masked", [&](Graph& g, std::mt19937_64& r) {
         return contract(g, g.mean_rows_masked(param(g, "a"), {1, 0, 1}), r);
       }},
      {"bce_with_logits", [&](Graph& g, std::mt19937_64&) {
         return g.bce_with_logits(g.mean_rows_masked(param(g, "a"), {1, 0, 0}),
                                  {1.0, 0.0, 1.0, 1.0});
       }},
      {"softmax_xent_rows", [&](Graph& g, std::mt19937_64&) {
         return g.softmax_xent_rows(param(g, "a"), {2, -1, 0});
       }},
  };

  for (const auto& c : cases) {
    CAPTURE(c.name);
    std::mt19937_64 vec_rng(7);  // same contraction vectors on every rebuild
    const double err = grad_check(
        p,
        [&](Graph& g) {
          std::mt19937_64 r = vec_rng;
          return c.build(g, r);
        },
        1e-5, 400, 3);
    REQUIRE(err < 1e-6);
  }
}

TEST_CASE("single linear layer gradients are exact", "[autograd]") {
  std::mt19937_64 rng(11);
  ParamStore p;
  p.create("w", 6, 4) = randn(6, 4, rng);
  p.create("b", 1, 4) = randn(1, 4, rng);
  const Tensor x = randn(3, 6, rng);
  const Tensor u = randn(1, 3, rng), v = randn(4, 1, rng);
  const double err = grad_check(
      p,
      [&](Graph& g) {
        const auto y = g.linear(g.leaf(x), g.param(p.value("w"), &p.grad("w")),
                                g.param(p.value("b"), &p.grad("b")));
        return g.matmul(g.matmul(g.leaf(u), y), g.leaf(v));
      },
      1e-4);
  REQUIRE(err < 1e-6);
}

TEST_CASE("tiny classifier passes the finite-difference check", "[autograd]") {
  const uint32_t d_max = 4;
  Aig g2(2);
  const auto l = g2.add_and(g2.input_literal(1), g2.input_literal(2));
  g2.add_output(!l);
  const Trajectory traj = encode(g2, d_max);
  const ModelInputs inputs = to_model_inputs(traj, 8, d_max);

  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.embed_width = 8;
  cfg.ffn_width = 8;
  cfg.n_heads = 2;
  cfg.vocab_size = Vocab{2}.size();
  cfg.poscode_width = 2 * d_max + 1;
  cfg.max_len = 8;
  cfg.arch = Arch::encoder_only;

  ParamStore params;
  init_params(cfg, params, 5);
  REQUIRE(params.n_params() < 10000);

  const TruthTable tt = g2.literal_truth_table(!l);
  std::vector<double> labels;
  for (uint64_t r = 0; r < 4; ++r) labels.push_back(tt.bit(r) ? 1.0 : 0.0);

  const double err = grad_check(
      params,
      [&](Graph& g) {
        return g.bce_with_logits(forward_tt_classifier(g, cfg, params, inputs), labels);
      },
      1e-4, 500, 17);
  REQUIRE(err < 1e-3);
}

TEST_CASE("policy model with cross-attention passes the finite-difference check", "[autograd]") {
  const uint32_t d_max = 4;
  Aig g2(2);
  const auto a = g2.add_and(g2.input_literal(1), g2.input_literal(2));
  g2.add_output(a);
  const Trajectory ctx_traj = encode(g2, d_max);

  Aig h(2);
  h.add_output(!h.add_and(!h.input_literal(1), h.input_literal(2)));
  const Trajectory tgt_traj = encode(h, d_max);

  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.embed_width = 8;
  cfg.ffn_width = 8;
  cfg.n_heads = 2;
  cfg.vocab_size = Vocab{2}.size();
  cfg.poscode_width = 2 * d_max + 1;
  cfg.max_len = 16;
  cfg.arch = Arch::encoder_decoder;

  ParamStore params;
  init_params(cfg, params, 9);
  REQUIRE(params.n_params() < 10000);

  const PolicySample sample = make_policy_sample(ctx_traj, tgt_traj, d_max);
  const double err = grad_check(
      params,
      [&](Graph& g) {
        return g.softmax_xent_rows(forward_policy(g, cfg, params, sample.ctx, sample.dec_in),
                                   sample.targets);
      },
      1e-4, 500, 23);
  REQUIRE(err < 1e-3);
}

TEST_CASE("isolated cross-attention block passes the finite-difference check", "[autograd]") {
  std::mt19937_64 rng(31);
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.embed_width = 8;
  cfg.ffn_width = 8;
  cfg.n_heads = 2;
  cfg.vocab_size = 8;
  cfg.poscode_width = 9;
  cfg.max_len = 8;
  cfg.arch = Arch::encoder_decoder;

  ParamStore p;
  detail::create_attn(p, "x.cross", cfg.embed_width);
  std::mt19937_64 init_rng(3);
  for (auto& [name, t] : p.values())
    if (name.find(".b") == std::string::npos) t = randn(t.rows, t.cols, init_rng, 0.3);

  const Tensor xq = randn(3, 8, rng), xkv = randn(5, 8, rng);
  const Tensor u = randn(1, 3, rng), v = randn(8, 1, rng);
  const double err = grad_check(
      p,
      [&](Graph& g) {
        const auto mask = g.leaf(Tensor(3, 5));  // nothing masked
        const auto y = detail::attention(g, cfg, p, "x.cross", g.leaf(xq), g.leaf(xkv), mask);
        return g.matmul(g.matmul(g.leaf(u), y), g.leaf(v));
      },
      1e-4, 500, 29);
  REQUIRE(err < 1e-3);
}

TEST_CASE("adam rescales a quadratic toward its minimum", "[autograd]") {
  // Minimize (x - 3)^2 by gradient descent through the optimizer.
  ParamStore p;
  p.create("x", 1, 1).at(0, 0) = -5.0;
  AdamState st;
  for (int step = 0; step < 4000; ++step) {
    p.zero_grads();
    Graph g;
    const auto x = g.param(p.value("x"), &p.grad("x"));
    const auto diff = g.add(x, g.leaf(Tensor::from(1, 1, {-3.0})));
    g.backward(g.mul(diff, diff));
    adam_step(p, st, 1e-2);
  }
  REQUIRE(p.value("x").at(0, 0) == Catch::Approx(3.0).margin(1e-3));
  REQUIRE(st.t == 4000);
}
