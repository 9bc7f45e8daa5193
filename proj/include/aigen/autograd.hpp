//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Reverse-mode autodiff on a flat tape of 2-D double tensors. Every value is
// a (rows x cols) matrix; scalars are 1x1. A Graph is built fresh per forward
// pass; backward() walks the tape in reverse and accumulates into parameter
// sinks registered at leaf creation. Dense products go through Eigen maps,
// everything else is straightforward loops — model widths here are tiny.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace aigen {

struct Tensor {
  size_t rows = 0, cols = 0;
  std::vector<double> data;  // row-major

  Tensor() = default;
  Tensor(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static Tensor zeros(size_t r, size_t c) { return Tensor(r, c); }
  static Tensor from(size_t r, size_t c, std::vector<double> v) {
    if (v.size() != r * c) throw std::invalid_argument("Tensor::from: size mismatch");
    Tensor t;
    t.rows = r;
    t.cols = c;
    t.data = std::move(v);
    return t;
  }

  size_t numel() const { return rows * cols; }
  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

namespace detail {
using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using CMap = Eigen::Map<const EMat>;
inline CMap cmap(const Tensor& t) { return CMap(t.data.data(), t.rows, t.cols); }
inline Map map(Tensor& t) { return Map(t.data.data(), t.rows, t.cols); }
}  // namespace detail

class Graph {
public:
  using Id = int32_t;

  /// Constant leaf (inputs, masks); receives no gradient sink.
  Id leaf(Tensor v) { return push(std::move(v), {}, nullptr, "leaf"); }

  /// Parameter leaf: after backward(), the node's gradient is accumulated
  /// into *grad_sink (same shape as the value). One node per sink per graph,
  /// so reuse inside a batched forward is free and gradients pool naturally.
  Id param(const Tensor& v, Tensor* grad_sink) {
    if (!grad_sink || !v.same_shape(*grad_sink))
      throw std::invalid_argument("Graph::param: gradient sink shape mismatch");
    if (auto it = param_nodes_.find(grad_sink); it != param_nodes_.end()) return it->second;
    const Id id = push(Tensor(v), {}, grad_sink, "param");
    param_nodes_.emplace(grad_sink, id);
    return id;
  }

  const Tensor& value(Id id) const { return nodes_[size_t(id)].value; }
  const Tensor& grad(Id id) const { return nodes_[size_t(id)].grad; }
  size_t size() const { return nodes_.size(); }

  Id add(Id a, Id b) {
    const Tensor &x = value(a), &y = value(b);
    require(x.same_shape(y), "add: shape mismatch");
    Tensor out = x;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += y.data[i];
    return push(std::move(out), {a, b}, nullptr, "add", [a, b](Graph& g, const Node& n) {
      g.accumulate(a, n.grad.data);
      g.accumulate(b, n.grad.data);
    });
  }

  /// x (T,d) plus a (1,d) bias broadcast across rows.
  Id add_rowwise(Id a, Id bias) {
    const Tensor &x = value(a), &b = value(bias);
    require(b.rows == 1 && b.cols == x.cols, "add_rowwise: bias must be (1, cols)");
    Tensor out = x;
    for (size_t r = 0; r < x.rows; ++r)
      for (size_t c = 0; c < x.cols; ++c) out.at(r, c) += b.at(0, c);
    return push(std::move(out), {a, bias}, nullptr, "add_rowwise",
                [a, bias](Graph& g, const Node& n) {
                  g.accumulate(a, n.grad.data);
                  Tensor db(1, n.grad.cols);
                  for (size_t r = 0; r < n.grad.rows; ++r)
                    for (size_t c = 0; c < n.grad.cols; ++c) db.at(0, c) += n.grad.at(r, c);
                  g.accumulate(bias, db.data);
                });
  }

  Id mul(Id a, Id b) {
    const Tensor &x = value(a), &y = value(b);
    require(x.same_shape(y), "mul: shape mismatch");
    Tensor out = x;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= y.data[i];
    return push(std::move(out), {a, b}, nullptr, "mul", [a, b](Graph& g, const Node& n) {
      const auto &xv = g.value(a), &yv = g.value(b);
      Tensor da(xv.rows, xv.cols), db(xv.rows, xv.cols);
      for (size_t i = 0; i < n.grad.data.size(); ++i) {
        da.data[i] = n.grad.data[i] * yv.data[i];
        db.data[i] = n.grad.data[i] * xv.data[i];
      }
      g.accumulate(a, da.data);
      g.accumulate(b, db.data);
    });
  }

  Id scale(Id a, double c) {
    Tensor out = value(a);
    for (auto& v : out.data) v *= c;
    return push(std::move(out), {a}, nullptr, "scale", [a, c](Graph& g, const Node& n) {
      Tensor da = n.grad;
      for (auto& v : da.data) v *= c;
      g.accumulate(a, da.data);
    });
  }

  Id matmul(Id a, Id b) {
    const Tensor &x = value(a), &y = value(b);
    require(x.cols == y.rows, "matmul: inner dimensions differ");
    Tensor out(x.rows, y.cols);
    detail::map(out).noalias() = detail::cmap(x) * detail::cmap(y);
    return push(std::move(out), {a, b}, nullptr, "matmul", [a, b](Graph& g, const Node& n) {
      const auto &xv = g.value(a), &yv = g.value(b);
      Tensor da(xv.rows, xv.cols), db(yv.rows, yv.cols);
      detail::map(da).noalias() = detail::cmap(n.grad) * detail::cmap(yv).transpose();
      detail::map(db).noalias() = detail::cmap(xv).transpose() * detail::cmap(n.grad);
      g.accumulate(a, da.data);
      g.accumulate(b, db.data);
    });
  }

  Id transpose(Id a) {
    const Tensor& x = value(a);
    Tensor out(x.cols, x.rows);
    detail::map(out) = detail::cmap(x).transpose();
    return push(std::move(out), {a}, nullptr, "transpose", [a](Graph& g, const Node& n) {
      Tensor da(n.grad.cols, n.grad.rows);
      detail::map(da) = detail::cmap(n.grad).transpose();
      g.accumulate(a, da.data);
    });
  }

  Id relu(Id a) {
    Tensor out = value(a);
    for (auto& v : out.data) v = v > 0 ? v : 0.0;
    return push(std::move(out), {a}, nullptr, "relu", [a](Graph& g, const Node& n) {
      const auto& xv = g.value(a);
      Tensor da(xv.rows, xv.cols);
      for (size_t i = 0; i < da.data.size(); ++i)
        da.data[i] = xv.data[i] > 0 ? n.grad.data[i] : 0.0;
      g.accumulate(a, da.data);
    });
  }

  Id sigmoid(Id a) {
    Tensor out = value(a);
    for (auto& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(out), {a}, nullptr, "sigmoid", [a](Graph& g, const Node& n) {
      Tensor da(n.grad.rows, n.grad.cols);
      for (size_t i = 0; i < da.data.size(); ++i) {
        const double y = n.value.data[i];
        da.data[i] = n.grad.data[i] * y * (1.0 - y);
      }
      g.accumulate(a, da.data);
    });
  }

  Id softmax_rows(Id a) {
    Tensor out = value(a);
    for (size_t r = 0; r < out.rows; ++r) {
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < out.cols; ++c) mx = std::max(mx, out.at(r, c));
      double sum = 0;
      for (size_t c = 0; c < out.cols; ++c) sum += (out.at(r, c) = std::exp(out.at(r, c) - mx));
      for (size_t c = 0; c < out.cols; ++c) out.at(r, c) /= sum;
    }
    return push(std::move(out), {a}, nullptr, "softmax_rows", [a](Graph& g, const Node& n) {
      Tensor da(n.grad.rows, n.grad.cols);
      for (size_t r = 0; r < n.grad.rows; ++r) {
        double dot = 0;
        for (size_t c = 0; c < n.grad.cols; ++c) dot += n.grad.at(r, c) * n.value.at(r, c);
        for (size_t c = 0; c < n.grad.cols; ++c)
          da.at(r, c) = n.value.at(r, c) * (n.grad.at(r, c) - dot);
      }
      g.accumulate(a, da.data);
    });
  }

  /// Row-wise layer normalization with learned gain and shift (both (1,d)).
  Id layernorm_rows(Id a, Id gamma, Id beta, double eps = 1e-5) {
    const Tensor& x = value(a);
    const Tensor &gm = value(gamma), &bt = value(beta);
    require(gm.rows == 1 && gm.cols == x.cols && bt.rows == 1 && bt.cols == x.cols,
            "layernorm_rows: gain/shift must be (1, cols)");
    Tensor out(x.rows, x.cols);
    Tensor xhat(x.rows, x.cols);
    std::vector<double> inv_std(x.rows);
    for (size_t r = 0; r < x.rows; ++r) {
      double mean = 0;
      for (size_t c = 0; c < x.cols; ++c) mean += x.at(r, c);
      mean /= double(x.cols);
      double var = 0;
      for (size_t c = 0; c < x.cols; ++c) var += (x.at(r, c) - mean) * (x.at(r, c) - mean);
      var /= double(x.cols);
      inv_std[r] = 1.0 / std::sqrt(var + eps);
      for (size_t c = 0; c < x.cols; ++c) {
        xhat.at(r, c) = (x.at(r, c) - mean) * inv_std[r];
        out.at(r, c) = gm.at(0, c) * xhat.at(r, c) + bt.at(0, c);
      }
    }
    return push(std::move(out), {a, gamma, beta}, nullptr, "layernorm_rows",
                [a, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                    Graph& g, const Node& n) {
                  const Tensor& gm = g.value(gamma);
                  const size_t R = n.grad.rows, C = n.grad.cols;
                  Tensor da(R, C), dgamma(1, C), dbeta(1, C);
                  for (size_t r = 0; r < R; ++r) {
                    double mean_dxhat = 0, mean_dxhat_xhat = 0;
                    for (size_t c = 0; c < C; ++c) {
                      const double dy = n.grad.at(r, c);
                      dgamma.at(0, c) += dy * xhat.at(r, c);
                      dbeta.at(0, c) += dy;
                      const double dxhat = dy * gm.at(0, c);
                      mean_dxhat += dxhat;
                      mean_dxhat_xhat += dxhat * xhat.at(r, c);
                    }
                    mean_dxhat /= double(C);
                    mean_dxhat_xhat /= double(C);
                    for (size_t c = 0; c < C; ++c) {
                      const double dxhat = n.grad.at(r, c) * gm.at(0, c);
                      da.at(r, c) =
                          inv_std[r] * (dxhat - mean_dxhat - xhat.at(r, c) * mean_dxhat_xhat);
                    }
                  }
                  g.accumulate(a, da.data);
                  g.accumulate(gamma, dgamma.data);
                  g.accumulate(beta, dbeta.data);
                });
  }

  /// Gathers table rows by token id: (V,d) x ids(T) -> (T,d).
  Id embedding(Id table, std::vector<int32_t> ids) {
    const Tensor& tab = value(table);
    Tensor out(ids.size(), tab.cols);
    for (size_t r = 0; r < ids.size(); ++r) {
      const auto id = ids[r];
      require(id >= 0 && size_t(id) < tab.rows, "embedding: token id out of range");
      for (size_t c = 0; c < tab.cols; ++c) out.at(r, c) = tab.at(size_t(id), c);
    }
    return push(std::move(out), {table}, nullptr, "embedding",
                [table, ids = std::move(ids)](Graph& g, const Node& n) {
                  const Tensor& tab = g.value(table);
                  Tensor dt(tab.rows, tab.cols);
                  for (size_t r = 0; r < ids.size(); ++r)
                    for (size_t c = 0; c < tab.cols; ++c)
                      dt.at(size_t(ids[r]), c) += n.grad.at(r, c);
                  g.accumulate(table, dt.data);
                });
  }

  /// Column slice [start, start+len).
  Id cols(Id a, size_t start, size_t len) {
    const Tensor& x = value(a);
    require(start + len <= x.cols, "cols: slice out of range");
    Tensor out(x.rows, len);
    for (size_t r = 0; r < x.rows; ++r)
      for (size_t c = 0; c < len; ++c) out.at(r, c) = x.at(r, start + c);
    return push(std::move(out), {a}, nullptr, "cols", [a, start, len](Graph& g, const Node& n) {
      const Tensor& xv = g.value(a);
      Tensor da(xv.rows, xv.cols);
      for (size_t r = 0; r < xv.rows; ++r)
        for (size_t c = 0; c < len; ++c) da.at(r, start + c) = n.grad.at(r, c);
      g.accumulate(a, da.data);
    });
  }

  Id concat_cols(const std::vector<Id>& parts) {
    require(!parts.empty(), "concat_cols: nothing to concatenate");
    size_t total = 0;
    const size_t rows = value(parts[0]).rows;
    for (Id p : parts) {
      require(value(p).rows == rows, "concat_cols: row count mismatch");
      total += value(p).cols;
    }
    Tensor out(rows, total);
    size_t off = 0;
    for (Id p : parts) {
      const Tensor& x = value(p);
      for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < x.cols; ++c) out.at(r, off + c) = x.at(r, c);
      off += x.cols;
    }
    std::vector<size_t> widths;
    for (Id p : parts) widths.push_back(value(p).cols);
    return push(std::move(out), parts, nullptr, "concat_cols",
                [parts, widths](Graph& g, const Node& n) {
                  size_t off = 0;
                  for (size_t k = 0; k < parts.size(); ++k) {
                    Tensor dp(n.grad.rows, widths[k]);
                    for (size_t r = 0; r < n.grad.rows; ++r)
                      for (size_t c = 0; c < widths[k]; ++c) dp.at(r, c) = n.grad.at(r, off + c);
                    g.accumulate(parts[k], dp.data);
                    off += widths[k];
                  }
                });
  }

  /// Mean over the rows flagged live -> (1,d).
  Id mean_rows_masked(Id a, std::vector<uint8_t> live) {
    const Tensor& x = value(a);
    require(live.size() == x.rows, "mean_rows_masked: flag count mismatch");
    size_t k = 0;
    for (uint8_t b : live) k += b ? 1 : 0;
    require(k > 0, "mean_rows_masked: no live rows");
    Tensor out(1, x.cols);
    for (size_t r = 0; r < x.rows; ++r) {
      if (!live[r]) continue;
      for (size_t c = 0; c < x.cols; ++c) out.at(0, c) += x.at(r, c) / double(k);
    }
    return push(std::move(out), {a}, nullptr, "mean_rows_masked",
                [a, live = std::move(live), k](Graph& g, const Node& n) {
                  const Tensor& xv = g.value(a);
                  Tensor da(xv.rows, xv.cols);
                  for (size_t r = 0; r < xv.rows; ++r) {
                    if (!live[r]) continue;
                    for (size_t c = 0; c < xv.cols; ++c) da.at(r, c) = n.grad.at(0, c) / double(k);
                  }
                  g.accumulate(a, da.data);
                });
  }

  /// Mean binary cross-entropy with logits over all entries of a (1,L) row
  /// against {0,1} targets.
  Id bce_with_logits(Id logits, std::vector<double> targets) {
    const Tensor& z = value(logits);
    require(z.rows == 1 && z.cols == targets.size(), "bce_with_logits: target size mismatch");
    double loss = 0;
    for (size_t c = 0; c < z.cols; ++c) {
      const double zv = z.at(0, c);
      // softplus(z) - t*z, computed stably.
      loss += (zv > 0 ? zv + std::log1p(std::exp(-zv)) : std::log1p(std::exp(zv))) -
              targets[c] * zv;
    }
    Tensor out(1, 1);
    out.at(0, 0) = loss / double(z.cols);
    return push(std::move(out), {logits}, nullptr, "bce_with_logits",
                [logits, targets = std::move(targets)](Graph& g, const Node& n) {
                  const Tensor& z = g.value(logits);
                  Tensor dz(1, z.cols);
                  const double s = n.grad.at(0, 0) / double(z.cols);
                  for (size_t c = 0; c < z.cols; ++c) {
                    const double p = 1.0 / (1.0 + std::exp(-z.at(0, c)));
                    dz.at(0, c) = s * (p - targets[c]);
                  }
                  g.accumulate(logits, dz.data);
                });
  }

  /// Mean categorical cross-entropy over rows; rows with target < 0 are
  /// excluded from both the mean and the gradient.
  Id softmax_xent_rows(Id logits, std::vector<int32_t> targets) {
    const Tensor& z = value(logits);
    require(z.rows == targets.size(), "softmax_xent_rows: target count mismatch");
    size_t counted = 0;
    for (auto t : targets)
      if (t >= 0) ++counted;
    require(counted > 0, "softmax_xent_rows: every row is ignored");
    Tensor probs(z.rows, z.cols);
    double loss = 0;
    for (size_t r = 0; r < z.rows; ++r) {
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < z.cols; ++c) mx = std::max(mx, z.at(r, c));
      double sum = 0;
      for (size_t c = 0; c < z.cols; ++c) sum += (probs.at(r, c) = std::exp(z.at(r, c) - mx));
      for (size_t c = 0; c < z.cols; ++c) probs.at(r, c) /= sum;
      if (targets[r] >= 0) {
        require(size_t(targets[r]) < z.cols, "softmax_xent_rows: target id out of range");
        loss -= std::log(std::max(probs.at(r, size_t(targets[r])), 1e-300));
      }
    }
    Tensor out(1, 1);
    out.at(0, 0) = loss / double(counted);
    return push(std::move(out), {logits}, nullptr, "softmax_xent_rows",
                [logits, targets = std::move(targets), probs = std::move(probs),
                 counted](Graph& g, const Node& n) {
                  Tensor dz(probs.rows, probs.cols);
                  const double s = n.grad.at(0, 0) / double(counted);
                  for (size_t r = 0; r < probs.rows; ++r) {
                    if (targets[r] < 0) continue;
                    for (size_t c = 0; c < probs.cols; ++c) dz.at(r, c) = s * probs.at(r, c);
                    dz.at(r, size_t(targets[r])) -= s;
                  }
                  g.accumulate(logits, dz.data);
                });
  }

  /// Sum of several same-shape scalars (or tensors), for loss averaging.
  Id add_n(const std::vector<Id>& xs) {
    require(!xs.empty(), "add_n: empty");
    Id acc = xs[0];
    for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
    return acc;
  }

  Id linear(Id x, Id w, Id b) { return add_rowwise(matmul(x, w), b); }

  /// Seeds d(root)=1 and propagates to every reachable node, then flushes
  /// parameter gradients into their registered sinks.
  void backward(Id root) {
    require(value(root).numel() == 1, "backward: root must be a scalar");
    for (auto& n : nodes_)
      if (!n.grad.data.empty()) n.grad = Tensor(n.value.rows, n.value.cols);
    ensure_grad(root);
    nodes_[size_t(root)].grad.at(0, 0) = 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.data.empty() || !n.backward) continue;
      n.backward(*this, n);
    }
    for (auto& n : nodes_) {
      if (!n.grad_sink || n.grad.data.empty()) continue;
      for (size_t i = 0; i < n.grad.data.size(); ++i) n.grad_sink->data[i] += n.grad.data[i];
    }
  }

private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until touched
    std::vector<Id> parents;
    Tensor* grad_sink;
    const char* op;
    std::function<void(Graph&, const Node&)> backward;
  };

  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("Graph: ") + msg);
  }

  void ensure_grad(Id id) {
    Node& n = nodes_[size_t(id)];
    if (n.grad.data.empty()) n.grad = Tensor(n.value.rows, n.value.cols);
  }

  void accumulate(Id id, const std::vector<double>& g) {
    ensure_grad(id);
    Node& n = nodes_[size_t(id)];
    for (size_t i = 0; i < g.size(); ++i) n.grad.data[i] += g[i];
  }

  Id push(Tensor value, std::vector<Id> parents, Tensor* sink, const char* op,
          std::function<void(Graph&, const Node&)> bw = {}) {
    // A single reduction catches NaN (propagates) and overflow (saturates).
    double s = 0;
    for (double v : value.data) s += v;
    if (!std::isfinite(s) && op != std::string("leaf"))
      throw std::runtime_error(std::string("Graph: non-finite values produced by op ") + op);
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(parents), sink, op, std::move(bw)});
    return Id(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::unordered_map<Tensor*, Id> param_nodes_;
};

}  // namespace aigen
