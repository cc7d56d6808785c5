// Copyright 2026 The seqvae Authors.
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

#include "seqvae/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqvae/errors.hpp"

namespace seqvae {

const Tensor& Var::value() const { return tape->value(id); }

double Var::item() const {
  const Tensor& t = value();
  if (t.size() != 1) throw ContractError("item() on non-scalar tensor " + shape_string(t.shape));
  return t.data[0];
}

Var Tape::constant(Tensor value) {
  Node node;
  node.own = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor& param) {
  if (!param.has_grad()) param.zero_grad();
  Node node;
  node.param = &param;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::view(const Tensor& value) {
  Node node;
  node.view = &value;
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.own = std::move(value);
  for (const Var& v : inputs) {
    if (v.tape != this) throw ContractError("operation mixes values from different tapes");
    node.requires_grad = node.requires_grad || nodes_[v.id].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.param) return *n.param;
  return n.view ? *n.view : n.own;
}

std::vector<double>& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) {
    if (!n.param->has_grad()) n.param->zero_grad();
    return n.param->grad;
  }
  if (n.grad.empty()) n.grad.assign(n.own.size(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("loss is not recorded on this tape");
  if (value(loss.id).size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        shape_string(value(loss.id).shape));
  }
  for (Node& n : nodes_) {
    if (!n.param) n.grad.clear();
  }
  if (!nodes_[loss.id].requires_grad) return;
  grad(loss.id)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward) continue;
    if (n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

namespace ad {
namespace {

struct Dims {
  std::size_t rows;
  std::size_t cols;
};

Dims matrix_dims(const Tensor& t) {
  switch (t.rank()) {
    case 0: return {1, 1};
    case 1: return {1, t.shape[0]};
    case 2: return {t.shape[0], t.shape[1]};
    default: throw DimensionError("expected rank <= 2, got " + shape_string(t.shape));
  }
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape) + " vs " +
                         shape_string(b.shape));
  }
}

template <class Fwd, class Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const Tensor& x = a.value();
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = fwd(x.data[i]);
  const Var inputs[] = {a};
  return a.tape->record(std::move(out), inputs, [a, deriv](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    const Tensor& x = tape.value(a.id);
    const Tensor& y = tape.value(self);
    auto& gx = tape.grad(a.id);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * deriv(x.data[i], y.data[i]);
  });
}

// out[m, n] += a[m, k] * b[k, n]
void gemm_nn(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* o = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* br = b + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
}

// ga[m, k] += gy[m, n] * b[k, n]^T
void gemm_nt(const double* gy, const double* b, double* ga, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* g = gy + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* br = b + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += g[j] * br[j];
      ga[i * k + p] += acc;
    }
  }
}

// gb[k, n] += a[m, k]^T * gy[m, n]
void gemm_tn(const double* a, const double* gy, double* gb, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* g = gy + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* o = gb + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * g[j];
    }
  }
}

double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  const Dims da = matrix_dims(a.value());
  const Dims db = matrix_dims(b.value());
  if (da.cols != db.rows || b.value().rank() != 2) {
    throw DimensionError("matmul: inner dimensions disagree " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  Tensor out({da.rows, db.cols});
  gemm_nn(a.value().data.data(), b.value().data.data(), out.data.data(), da.rows, da.cols, db.cols);
  const Var inputs[] = {a, b};
  return a.tape->record(std::move(out), inputs, [a, b, da, db](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    if (tape.requires_grad(a.id)) {
      gemm_nt(gy.data(), tape.value(b.id).data.data(), tape.grad(a.id).data(), da.rows, da.cols,
              db.cols);
    }
    if (tape.requires_grad(b.id)) {
      gemm_tn(tape.value(a.id).data.data(), gy.data(), tape.grad(b.id).data(), da.rows, da.cols,
              db.cols);
    }
  });
}

Var linear(Var x, Var weight, Var bias) {
  const Dims dx = matrix_dims(x.value());
  const Tensor& w = weight.value();
  if (w.rank() != 2 || dx.cols != w.shape[0] || bias.value().size() != w.shape[1]) {
    throw DimensionError("linear: shape mismatch x" + shape_string(x.shape()) + " W" +
                         shape_string(w.shape) + " b" + shape_string(bias.shape()));
  }
  const std::size_t n = w.shape[1];
  Tensor out({dx.rows, n});
  const auto& bv = bias.value().data;
  for (std::size_t i = 0; i < dx.rows; ++i) std::copy(bv.begin(), bv.end(), out.data.begin() + i * n);
  gemm_nn(x.value().data.data(), w.data.data(), out.data.data(), dx.rows, dx.cols, n);
  const Var inputs[] = {x, weight, bias};
  return x.tape->record(std::move(out), inputs, [x, weight, bias, dx, n](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    if (tape.requires_grad(x.id)) {
      gemm_nt(gy.data(), tape.value(weight.id).data.data(), tape.grad(x.id).data(), dx.rows, dx.cols, n);
    }
    if (tape.requires_grad(weight.id)) {
      gemm_tn(tape.value(x.id).data.data(), gy.data(), tape.grad(weight.id).data(), dx.rows, dx.cols, n);
    }
    if (tape.requires_grad(bias.id)) {
      auto& gb = tape.grad(bias.id);
      for (std::size_t i = 0; i < dx.rows; ++i) {
        for (std::size_t j = 0; j < n; ++j) gb[j] += gy[i * n + j];
      }
    }
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  out.grad.clear();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.value().data[i];
  const Var inputs[] = {a, b};
  return a.tape->record(std::move(out), inputs, [a, b](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    for (Var v : {a, b}) {
      if (!tape.requires_grad(v.id)) continue;
      auto& g = tape.grad(v.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  out.grad.clear();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b.value().data[i];
  const Var inputs[] = {a, b};
  return a.tape->record(std::move(out), inputs, [a, b](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    if (tape.requires_grad(a.id)) {
      auto& g = tape.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
    if (tape.requires_grad(b.id)) {
      auto& g = tape.grad(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gy[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  out.grad.clear();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b.value().data[i];
  const Var inputs[] = {a, b};
  return a.tape->record(std::move(out), inputs, [a, b](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    if (tape.requires_grad(a.id)) {
      const auto& bv = tape.value(b.id).data;
      auto& g = tape.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * bv[i];
    }
    if (tape.requires_grad(b.id)) {
      const auto& av = tape.value(a.id).data;
      auto& g = tape.grad(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * av[i];
    }
  });
}

Var affine(Var a, double scale, double shift) {
  return unary(
      a, [scale, shift](double x) { return scale * x + shift; },
      [scale](double, double) { return scale; });
}

Var sigmoid(Var a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log_sigmoid(Var a) {
  // log s(x) = -log(1 + e^-x); d/dx = s(-x)
  return unary(
      a,
      [](double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); },
      [](double x, double) { return stable_sigmoid(-x); });
}

Var log_softmax(Var logits) {
  const Tensor& x = logits.value();
  const Dims d = matrix_dims(x);
  if (d.cols == 0) throw DimensionError("log_softmax: empty category axis");
  Tensor out(x.shape);
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double* in = x.data.data() + r * d.cols;
    double* o = out.data.data() + r * d.cols;
    const double m = *std::max_element(in, in + d.cols);
    double s = 0.0;
    for (std::size_t j = 0; j < d.cols; ++j) s += std::exp(in[j] - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < d.cols; ++j) o[j] = in[j] - lse;
  }
  const Var inputs[] = {logits};
  return logits.tape->record(std::move(out), inputs, [logits, d](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    const auto& y = tape.value(self).data;
    auto& gx = tape.grad(logits.id);
    for (std::size_t r = 0; r < d.rows; ++r) {
      const std::size_t base = r * d.cols;
      double gsum = 0.0;
      for (std::size_t j = 0; j < d.cols; ++j) gsum += gy[base + j];
      for (std::size_t j = 0; j < d.cols; ++j) {
        gx[base + j] += gy[base + j] - std::exp(y[base + j]) * gsum;
      }
    }
  });
}

Var embedding(Var table, std::span<const std::size_t> ids) {
  const Tensor& t = table.value();
  if (t.rank() != 2) throw DimensionError("embedding: table must be a matrix, got " + shape_string(t.shape));
  const std::size_t n = t.shape[0];
  const std::size_t d = t.shape[1];
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= n) {
      throw IndexError("embedding: id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(n) + " rows");
    }
    std::copy_n(t.data.begin() + ids[i] * d, d, out.data.begin() + i * d);
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  const Var inputs[] = {table};
  return table.tape->record(std::move(out), inputs,
                            [table, rows = std::move(rows), d](Tape& tape, std::size_t self) {
                              const auto& gy = tape.grad(self);
                              auto& gt = tape.grad(table.id);
                              for (std::size_t i = 0; i < rows.size(); ++i) {
                                for (std::size_t j = 0; j < d; ++j) gt[rows[i] * d + j] += gy[i * d + j];
                              }
                            });
}

Var row(Var x, std::size_t r) {
  const Dims d = matrix_dims(x.value());
  if (r >= d.rows) {
    throw IndexError("row: index " + std::to_string(r) + " outside " + shape_string(x.shape()));
  }
  Tensor out({1, d.cols});
  std::copy_n(x.value().data.begin() + r * d.cols, d.cols, out.data.begin());
  const Var inputs[] = {x};
  return x.tape->record(std::move(out), inputs, [x, r, d](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    auto& gx = tape.grad(x.id);
    for (std::size_t j = 0; j < d.cols; ++j) gx[r * d.cols + j] += gy[j];
  });
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw ContractError("stack_rows: no rows");
  Tape* tape = rows.front().tape;
  const std::size_t cols = rows.front().value().size();
  Tensor out({rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& r = rows[i].value();
    if (r.size() != cols) {
      throw DimensionError("stack_rows: row " + shape_string(r.shape) + " vs width " + std::to_string(cols));
    }
    std::copy(r.data.begin(), r.data.end(), out.data.begin() + i * cols);
  }
  std::vector<Var> in(rows.begin(), rows.end());
  return tape->record(std::move(out), rows, [in, cols](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (!tape.requires_grad(in[i].id)) continue;
      auto& g = tape.grad(in[i].id);
      for (std::size_t j = 0; j < cols; ++j) g[j] += gy[i * cols + j];
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Dims da = matrix_dims(a.value());
  const Dims db = matrix_dims(b.value());
  if (da.rows != db.rows) {
    throw DimensionError("concat_cols: row counts differ " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  const std::size_t cols = da.cols + db.cols;
  Tensor out({da.rows, cols});
  for (std::size_t i = 0; i < da.rows; ++i) {
    std::copy_n(a.value().data.begin() + i * da.cols, da.cols, out.data.begin() + i * cols);
    std::copy_n(b.value().data.begin() + i * db.cols, db.cols, out.data.begin() + i * cols + da.cols);
  }
  const Var inputs[] = {a, b};
  return a.tape->record(std::move(out), inputs, [a, b, da, db, cols](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    if (tape.requires_grad(a.id)) {
      auto& g = tape.grad(a.id);
      for (std::size_t i = 0; i < da.rows; ++i) {
        for (std::size_t j = 0; j < da.cols; ++j) g[i * da.cols + j] += gy[i * cols + j];
      }
    }
    if (tape.requires_grad(b.id)) {
      auto& g = tape.grad(b.id);
      for (std::size_t i = 0; i < db.rows; ++i) {
        for (std::size_t j = 0; j < db.cols; ++j) g[i * db.cols + j] += gy[i * cols + da.cols + j];
      }
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data) s += v;
  const Var inputs[] = {a};
  return a.tape->record(Tensor::scalar(s), inputs, [a](Tape& tape, std::size_t self) {
    const double gy = tape.grad(self)[0];
    for (double& g : tape.grad(a.id)) g += gy;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ContractError("mean of an empty tensor");
  return affine(sum(a), 1.0 / static_cast<double>(n), 0.0);
}

Var gather(Var x, std::span<const std::pair<std::size_t, std::size_t>> cells) {
  const Dims d = matrix_dims(x.value());
  Tensor out({cells.size()});
  std::vector<std::size_t> flat(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [r, c] = cells[i];
    if (r >= d.rows || c >= d.cols) {
      throw IndexError("gather: cell (" + std::to_string(r) + ", " + std::to_string(c) +
                       ") outside " + shape_string(x.shape()));
    }
    flat[i] = r * d.cols + c;
    out.data[i] = x.value().data[flat[i]];
  }
  const Var inputs[] = {x};
  return x.tape->record(std::move(out), inputs, [x, flat = std::move(flat)](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    auto& gx = tape.grad(x.id);
    for (std::size_t i = 0; i < flat.size(); ++i) gx[flat[i]] += gy[i];
  });
}

Var segment_logsumexp(Var x, std::span<const std::size_t> segment_sizes) {
  const auto& v = x.value().data;
  std::size_t total = 0;
  for (std::size_t s : segment_sizes) {
    if (s == 0) throw ContractError("segment_logsumexp: empty segment");
    total += s;
  }
  if (total != v.size()) {
    throw DimensionError("segment_logsumexp: segments cover " + std::to_string(total) + " of " +
                         std::to_string(v.size()) + " entries");
  }
  Tensor out({segment_sizes.size()});
  std::size_t start = 0;
  for (std::size_t k = 0; k < segment_sizes.size(); ++k) {
    const std::size_t len = segment_sizes[k];
    const double m = *std::max_element(v.begin() + start, v.begin() + start + len);
    double s = 0.0;
    for (std::size_t i = start; i < start + len; ++i) s += std::exp(v[i] - m);
    out.data[k] = m + std::log(s);
    start += len;
  }
  std::vector<std::size_t> sizes(segment_sizes.begin(), segment_sizes.end());
  const Var inputs[] = {x};
  return x.tape->record(std::move(out), inputs, [x, sizes = std::move(sizes)](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    const auto& y = tape.value(self).data;
    const auto& v = tape.value(x.id).data;
    auto& gx = tape.grad(x.id);
    std::size_t start = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      for (std::size_t i = start; i < start + sizes[k]; ++i) gx[i] += gy[k] * std::exp(v[i] - y[k]);
      start += sizes[k];
    }
  });
}

Var reparameterize(Var mu, Var log_sigma, Var eps) {
  require_same_shape("reparameterize", mu.value(), log_sigma.value());
  require_same_shape("reparameterize", mu.value(), eps.value());
  const auto& m = mu.value().data;
  const auto& ls = log_sigma.value().data;
  const auto& e = eps.value().data;
  Tensor out(mu.shape());
  for (std::size_t i = 0; i < m.size(); ++i) out.data[i] = m[i] + std::exp(ls[i]) * e[i];
  const Var inputs[] = {mu, log_sigma, eps};
  return mu.tape->record(std::move(out), inputs, [mu, log_sigma, eps](Tape& tape, std::size_t self) {
    const auto& gy = tape.grad(self);
    const auto& ls = tape.value(log_sigma.id).data;
    const auto& e = tape.value(eps.id).data;
    if (tape.requires_grad(mu.id)) {
      auto& g = tape.grad(mu.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
    if (tape.requires_grad(log_sigma.id)) {
      auto& g = tape.grad(log_sigma.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * std::exp(ls[i]) * e[i];
    }
    if (tape.requires_grad(eps.id)) {
      auto& g = tape.grad(eps.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * std::exp(ls[i]);
    }
  });
}

Var kl_standard_normal(Var mu, Var log_sigma) {
  require_same_shape("kl_standard_normal", mu.value(), log_sigma.value());
  const auto& m = mu.value().data;
  const auto& ls = log_sigma.value().data;
  double kl = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    kl += 0.5 * (std::exp(2.0 * ls[i]) - 1.0 - 2.0 * ls[i] + m[i] * m[i]);
  }
  const Var inputs[] = {mu, log_sigma};
  return mu.tape->record(Tensor::scalar(kl), inputs, [mu, log_sigma](Tape& tape, std::size_t self) {
    const double gy = tape.grad(self)[0];
    if (tape.requires_grad(mu.id)) {
      const auto& m = tape.value(mu.id).data;
      auto& g = tape.grad(mu.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy * m[i];
    }
    if (tape.requires_grad(log_sigma.id)) {
      const auto& ls = tape.value(log_sigma.id).data;
      auto& g = tape.grad(log_sigma.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy * (std::exp(2.0 * ls[i]) - 1.0);
    }
  });
}

Var gru_cell(Var x, Var h_prev, const GruWeights& w) {
  const std::size_t hidden = matrix_dims(h_prev.value()).cols;
  if (w.u_reset.value().rank() != 2 || w.u_reset.value().shape[0] != hidden ||
      w.u_reset.value().shape[1] != hidden) {
    throw DimensionError("gru_cell: hidden state " + shape_string(h_prev.shape()) +
                         " does not match recurrent weights " + shape_string(w.u_reset.shape()));
  }
  Var h = h_prev.value().rank() == 2 ? h_prev : row(h_prev, 0);
  Var reset = sigmoid(add(linear(x, w.w_reset, w.b_reset), matmul(h, w.u_reset)));
  Var update = sigmoid(add(linear(x, w.w_update, w.b_update), matmul(h, w.u_update)));
  Var cand = tanh(add(linear(x, w.w_cand, w.b_cand), matmul(mul(reset, h), w.u_cand)));
  return add(mul(update, h), mul(affine(update, -1.0, 1.0), cand));
}

}  // namespace ad
}  // namespace seqvae
