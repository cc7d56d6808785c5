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

#include "seqvae/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqvae/errors.hpp"

namespace seqvae {

Tensor& ParameterStore::add(const std::string& name, Tensor value) {
  if (index_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
  index_[name] = slots_.size();
  names_.push_back(name);
  Slot slot;
  slot.m.assign(value.size(), 0.0);
  slot.v.assign(value.size(), 0.0);
  slot.value = std::move(value);
  slots_.push_back(std::move(slot));
  return slots_.back().value;
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("unknown parameter '" + name + "'");
  return slots_[it->second].value;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("unknown parameter '" + name + "'");
  return slots_[it->second].value;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const Slot& s : slots_) n += s.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (Slot& s : slots_) s.value.zero_grad();
}

void ParameterStore::adam_step(const AdamOptions& opt) {
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (!slots_[k].value.has_grad()) {
      throw ContractError("adam_step: parameter '" + names_[k] + "' has no gradient");
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(opt.beta1, t);
  const double bc2 = 1.0 - std::pow(opt.beta2, t);
  for (Slot& s : slots_) {
    auto& theta = s.value.data;
    auto& grad = s.value.grad;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad[i] + opt.weight_decay * theta[i];
      s.m[i] = opt.beta1 * s.m[i] + (1.0 - opt.beta1) * g;
      s.v[i] = opt.beta2 * s.v[i] + (1.0 - opt.beta2) * g * g;
      const double m_hat = s.m[i] / bc1;
      const double v_hat = s.v[i] / bc2;
      theta[i] -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.eps);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
  }
}

std::vector<Tensor> ParameterStore::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(slots_.size());
  for (const Slot& s : slots_) out.emplace_back(s.value.shape, s.value.data);
  return out;
}

void ParameterStore::restore(const std::vector<Tensor>& values) {
  if (values.size() != slots_.size()) throw ContractError("restore: parameter count mismatch");
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (values[k].shape != slots_[k].value.shape) {
      throw DimensionError("restore: '" + names_[k] + "' expects " +
                           shape_string(slots_[k].value.shape) + ", got " +
                           shape_string(values[k].shape));
    }
    slots_[k].value.data = values[k].data;
  }
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t({fan_in, fan_out});
  for (double& v : t.data) v = dist(rng);
  return t;
}

Tensor normal_init(Shape shape, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(std::move(shape));
  for (double& v : t.data) v = dist(rng);
  return t;
}

double gradient_check(const LossClosure& loss, ParameterStore& store,
                      const GradientCheckOptions& options) {
  store.zero_grad();
  {
    Tape tape;
    Var l = loss(tape, store);
    tape.backward(l);
  }
  auto evaluate = [&]() {
    Tape tape;
    return loss(tape, store).item();
  };

  std::mt19937_64 rng(options.seed);
  double worst = 0.0;
  for (const std::string& name : store.names()) {
    Tensor& p = store.get(name);
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_tensor);
    }
    for (std::size_t i : coords) {
      const double saved = p.data[i];
      auto stencil = [&](double h) {
        auto at = [&](double offset) {
          p.data[i] = saved + offset;
          return evaluate();
        };
        const double d1 = at(h) - at(-h);
        const double d2 = at(2 * h) - at(-2 * h);
        return (8.0 * d1 - d2) / (12.0 * h);
      };
      // Shrink the step and keep the estimate that agrees best with the next
      // smaller step: large steps suffer truncation, small ones round-off.
      std::vector<double> estimates;
      double h = options.epsilon;
      for (std::size_t r = 0; r <= options.refinements; ++r, h /= 10.0) estimates.push_back(stencil(h));
      p.data[i] = saved;
      double numeric = estimates.front();
      double best_gap = INFINITY;
      for (std::size_t r = 0; r + 1 < estimates.size(); ++r) {
        const double gap = std::abs(estimates[r] - estimates[r + 1]);
        if (gap < best_gap) {
          best_gap = gap;
          numeric = estimates[r];
        }
      }
      const double analytic = p.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace seqvae
