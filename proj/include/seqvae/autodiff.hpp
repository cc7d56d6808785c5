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

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "seqvae/tensor.hpp"

namespace seqvae {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid as long as the
/// tape is alive.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape; }
  double item() const;
};

/// Ordered record of executed primitives. Backward replays the record in
/// exact reverse order; every backward rule adds into its inputs' gradients.
///
/// Parameters enter the tape by reference: their gradient is accumulated
/// directly into `Tensor::grad` of the referenced tensor, which must outlive
/// the tape. A tape is single-use per forward pass and is not thread-safe.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor& param);
  /// Non-differentiable reference to a tensor that outlives the tape.
  Var view(const Tensor& value);

  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, allocated (zero-filled) on first access.
  std::vector<double>& grad(std::size_t id);

  /// Seeds d(loss)/d(loss) = 1 and runs every backward rule in reverse
  /// recording order. Intermediate gradients are reset first, so replaying a
  /// tape from the same parameter-gradient state is deterministic.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor own;
    Tensor* param = nullptr;
    const Tensor* view = nullptr;
    bool requires_grad = false;
    std::vector<double> grad;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

// Primitives. Matrices are [rows, cols]; a rank-1 tensor of length n is
// treated as a single row where a matrix is expected.
namespace ad {

Var matmul(Var a, Var b);
/// y = xW + b with b broadcast over rows.
Var linear(Var x, Var weight, Var bias);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// scale * a + shift, elementwise.
Var affine(Var a, double scale, double shift);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
/// log(sigmoid(a)), stable for large |a|.
Var log_sigmoid(Var a);
/// Row-wise log-softmax with max subtraction.
Var log_softmax(Var logits);
/// Gathers rows of `table`; the backward pass scatters additively.
Var embedding(Var table, std::span<const std::size_t> ids);
Var row(Var x, std::size_t r);
Var stack_rows(std::span<const Var> rows);
Var concat_cols(Var a, Var b);
Var sum(Var a);
Var mean(Var a);
/// Picks x[r, c] for each (r, c) into a rank-1 tensor.
Var gather(Var x, std::span<const std::pair<std::size_t, std::size_t>> cells);
/// Splits a rank-1 tensor into consecutive segments of the given sizes and
/// returns log(sum(exp(segment))) for each.
Var segment_logsumexp(Var x, std::span<const std::size_t> segment_sizes);
/// z = mu + exp(log_sigma) * eps.
Var reparameterize(Var mu, Var log_sigma, Var eps);
/// Sum over all entries of 0.5 * (sigma^2 - 1 - log sigma^2 + mu^2).
Var kl_standard_normal(Var mu, Var log_sigma);

struct GruWeights {
  Var w_reset, u_reset, b_reset;
  Var w_update, u_update, b_update;
  Var w_cand, u_cand, b_cand;
};

/// One GRU step: r = s(xW_r + hU_r + b_r), u = s(xW_u + hU_u + b_u),
/// c = tanh(xW_c + (r*h)U_c + b_c), h' = u*h + (1-u)*c.
Var gru_cell(Var x, Var h_prev, const GruWeights& w);

}  // namespace ad
}  // namespace seqvae
