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
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqvae/autodiff.hpp"
#include "seqvae/data.hpp"
#include "seqvae/evaluation.hpp"
#include "seqvae/parameters.hpp"

namespace seqvae {

enum class ModelKind { svae, mvae, rvae };
enum class LikelihoodMode { next_k_multiset, mixture };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);
std::string to_string(LikelihoodMode mode);
LikelihoodMode parse_likelihood_mode(const std::string& s);

/// Hyperparameters. Defaults reproduce the published architecture.
///
/// Encoder widths list the hidden layers followed by the latent size (the last
/// entry must equal latent_dim); decoder widths start at the latent size and
/// continue with hidden layers, after which an output layer spans the catalog.
struct ModelConfig {
  std::size_t latent_dim = 64;
  std::size_t item_embedding_dim = 256;
  std::size_t gru_hidden = 200;
  std::vector<std::size_t> encoder_widths{150, 64};
  std::vector<std::size_t> decoder_widths{64, 150};
  std::size_t rvae_embedding_dim = 128;
  std::vector<std::size_t> rvae_encoder_widths{100, 64};
  std::size_t k_horizon = 4;
  LikelihoodMode likelihood_mode = LikelihoodMode::next_k_multiset;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double kl_weight = 1.0;
  /// Linear KL warm-up from 0 to kl_weight over this many epochs; 0 disables.
  int kl_anneal_epochs = 0;
  int epochs = 10;
  /// Mini-batch size for MVAE and RVAE; SVAE trains one sequence per step.
  std::size_t batch_size = 64;
  /// Probability that an RVAE training triple is routed through the reserved
  /// unseen-user row instead of the user's own embedding.
  double rvae_unseen_user_rate = 0.1;
  std::uint64_t seed = 42;

  void validate() const;  // throws ConfigError
  /// Flat key=value form, keys as accepted by apply_setting.
  std::vector<std::pair<std::string, std::string>> settings() const;
  /// Sets one field from its textual form; returns false for unknown keys.
  bool apply_setting(const std::string& key, const std::string& value);
  std::string digest() const;
};

/// Diagonal Gaussian with sigma kept in the log domain.
struct GaussianParams {
  Var mu;
  Var log_sigma;
};

/// z = mu + exp(log_sigma) * eps.
Var reparameterize(const GaussianParams& g, Var eps);
/// Sum over rows of 0.5 * sum_k (sigma_k^2 - 1 - log sigma_k^2 + mu_k^2).
Var kl_gaussian_standard(const GaussianParams& g);
/// Sum of log_pi[row, i] over the items in the multiset (with multiplicity).
Var multinomial_log_likelihood(std::span<const ItemIndex> items, Var log_pi, std::size_t row = 0);
/// Positions t..min(t+k-1, T) of the sequence, 1-based t.
std::vector<ItemIndex> next_k_targets(std::span<const ItemIndex> sequence, std::size_t t, std::size_t k);

/// Resolves parameter names to tape values: differentiable when bound to a
/// mutable store, read-only otherwise.
class Binder {
 public:
  Binder(Tape& tape, ParameterStore& store) : tape_(&tape), mutable_(&store), const_(&store) {}
  Binder(Tape& tape, const ParameterStore& store) : tape_(&tape), const_(&store) {}

  Var operator()(const std::string& name) const;
  Tape& tape() const { return *tape_; }

 private:
  Tape* tape_;
  ParameterStore* mutable_ = nullptr;
  const ParameterStore* const_;
};

/// Common base: parameter store, config, catalog, training epoch and scoring.
class VaeModel : public Recommender {
 public:
  VaeModel(ModelKind kind, ModelConfig config, std::size_t catalog_size);

  ModelKind kind() const noexcept { return kind_; }
  std::string name() const override { return to_string(kind_); }
  std::size_t catalog_size() const override { return catalog_size_; }
  const ModelConfig& config() const noexcept { return config_; }
  ParameterStore& params() noexcept { return params_; }
  const ParameterStore& params() const noexcept { return params_; }

  /// One pass over the training users with Adam updates. Returns the mean
  /// per-update loss. Throws TrainingError on a non-finite loss.
  virtual double fit_epoch(const std::vector<UserSequence>& train, double kl_weight, int epoch,
                           std::mt19937_64& rng) = 0;

 protected:
  AdamOptions adam() const;
  void check_finite(double loss, int epoch, std::size_t batch) const;

  ModelKind kind_;
  ModelConfig config_;
  std::size_t catalog_size_;
  ParameterStore params_;
};

struct SvaeForward {
  GaussianParams q;  // [T, K]
  Var z;             // [T, K]
  Var log_pi;        // [T, N]
};

/// Recurrent sequential VAE. Step t consumes the embedding of item t-1 (a
/// learned start row at t = 1), so q(z_t) depends on the strict past only.
class SvaeModel : public VaeModel {
 public:
  SvaeModel(const ModelConfig& config, std::size_t catalog_size);

  /// eps is [T, K]; nullptr means zero noise.
  SvaeForward forward(const Binder& bind, std::span<const ItemIndex> sequence, const Tensor* eps) const;
  /// Per-sequence loss normalized by T.
  Var loss(const Binder& bind, std::span<const ItemIndex> sequence, const Tensor& eps, double kl_weight,
           std::size_t k, LikelihoodMode mode) const;

  /// Noise-free log-probabilities for the step after the history.
  std::vector<double> score(std::span<const ItemIndex> history) const override;
  double fit_epoch(const std::vector<UserSequence>& train, double kl_weight, int epoch,
                   std::mt19937_64& rng) override;

  std::size_t start_token() const noexcept { return catalog_size_; }

 private:
  Var hidden_states(const Binder& bind, std::span<const std::size_t> inputs) const;
  GaussianParams encode(const Binder& bind, Var hidden) const;
  Var decode(const Binder& bind, Var z) const;
};

/// Multinomial VAE over the bag of a user's items.
class MvaeModel : public VaeModel {
 public:
  MvaeModel(const ModelConfig& config, std::size_t catalog_size);

  GaussianParams encode(const Binder& bind, const std::vector<std::vector<ItemIndex>>& bags) const;
  Var decode(const Binder& bind, Var z) const;
  /// Batch mean of kl_weight * KL - log-likelihood; eps is [B, K].
  Var loss(const Binder& bind, const std::vector<std::vector<ItemIndex>>& bags, const Tensor& eps,
           double kl_weight) const;

  std::vector<double> score(std::span<const ItemIndex> history) const override;
  double fit_epoch(const std::vector<UserSequence>& train, double kl_weight, int epoch,
                   std::mt19937_64& rng) override;
};

/// (user row, preferred item, other item).
struct RankingTriple {
  std::size_t user_row = 0;
  ItemIndex preferred = 0;
  ItemIndex other = 0;
};

/// Pairwise ranking VAE: a latent per (user, item), scored by f(z).
class RvaeModel : public VaeModel {
 public:
  /// Training users get embedding rows in the given order; one extra row is
  /// reserved for users never seen in training.
  RvaeModel(const ModelConfig& config, std::size_t catalog_size, std::vector<std::size_t> train_users);

  GaussianParams encode(const Binder& bind, std::span<const std::size_t> user_rows,
                        std::span<const ItemIndex> items) const;
  Var scorer(const Binder& bind, Var z) const;
  /// Mean over triples of -log s(f(z_i) - f(z_j)) + kl_weight (KL_i + KL_j).
  /// eps_preferred and eps_other are [B, K].
  Var pair_loss(const Binder& bind, std::span<const RankingTriple> triples, const Tensor& eps_preferred,
                const Tensor& eps_other, double kl_weight) const;

  /// Scores every item for the reserved unseen-user row.
  std::vector<double> score(std::span<const ItemIndex> history) const override;
  /// Scores for a specific embedding row.
  std::vector<double> score_for_row(std::size_t user_row) const;
  double fit_epoch(const std::vector<UserSequence>& train, double kl_weight, int epoch,
                   std::mt19937_64& rng) override;

  std::size_t unseen_row() const noexcept { return train_users_.size(); }
  std::size_t row_of(std::size_t user_index) const;
  const std::vector<std::size_t>& train_users() const noexcept { return train_users_; }

 private:
  std::vector<std::size_t> train_users_;
  std::unordered_map<std::size_t, std::size_t> rows_;
};

/// Standard-normal noise tensor.
Tensor standard_normal(Shape shape, std::mt19937_64& rng);

std::unique_ptr<VaeModel> make_model(ModelKind kind, const ModelConfig& config, std::size_t catalog_size,
                                     const std::vector<UserSequence>& train);

RankedList predict_svae(std::span<const ItemIndex> fold_in, const SvaeModel& model,
                        std::span<const ItemIndex> exclude);
RankedList predict_mvae(std::span<const ItemIndex> fold_in, const MvaeModel& model,
                        std::span<const ItemIndex> exclude);
RankedList predict_rvae(std::span<const ItemIndex> fold_in, const RvaeModel& model,
                        std::span<const ItemIndex> exclude);

}  // namespace seqvae
