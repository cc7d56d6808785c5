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

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "seqvae/autodiff.hpp"
#include "seqvae/tensor.hpp"

namespace seqvae {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Added to the gradient as weight_decay * theta before the moment updates.
  double weight_decay = 0.0;
};

/// Named model parameters in declaration order, with Adam state.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor value);

  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  /// Registers the parameter on `tape` so its gradient accumulates here.
  Var on(Tape& tape, const std::string& name) { return tape.parameter(get(name)); }

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }
  std::size_t scalar_count() const;
  std::int64_t step_count() const noexcept { return step_; }

  void zero_grad();
  /// One Adam update with bias correction. Throws ContractError when any
  /// parameter has no gradient buffer. Gradients are zeroed afterwards.
  void adam_step(const AdamOptions& opt);

  /// Values only; optimizer state is not copied.
  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  struct Slot {
    Tensor value;
    std::vector<double> m;
    std::vector<double> v;
  };
  std::vector<std::string> names_;
  std::vector<Slot> slots_;
  std::map<std::string, std::size_t> index_;
  std::int64_t step_ = 0;
};

/// uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);
Tensor normal_init(Shape shape, double stddev, std::mt19937_64& rng);

/// Builds a scalar loss on the given tape from the parameters in the store.
/// Must be deterministic (fixed noise).
using LossClosure = std::function<Var(Tape&, ParameterStore&)>;

struct GradientCheckOptions {
  /// Largest finite-difference step; each refinement divides it by ten.
  double epsilon = 1e-1;
  std::size_t refinements = 3;
  /// Coordinates checked per parameter tensor; tensors at most this size are
  /// checked exhaustively.
  std::size_t max_coords_per_tensor = 64;
  std::uint64_t seed = 7;
};

/// Max over sampled coordinates of |a - n| / max(|a|, |n|, 1e-8), where a is
/// the analytic gradient and n the five-point central difference
/// (8(f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h at the step whose estimate
/// agrees best with the next smaller step.
double gradient_check(const LossClosure& loss, ParameterStore& store,
                      const GradientCheckOptions& options = {});

}  // namespace seqvae
