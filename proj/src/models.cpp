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

#include "seqvae/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "seqvae/errors.hpp"

namespace seqvae {
namespace {

void add_dense(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
               std::mt19937_64& rng) {
  store.add(name + ".weight", glorot_uniform(in, out, rng));
  store.add(name + ".bias", Tensor({out}));
}

Var dense(const Binder& bind, const std::string& name, Var x) {
  return ad::linear(x, bind(name + ".weight"), bind(name + ".bias"));
}

// Hidden layers (tanh) followed by mu / log-sigma heads.
std::size_t add_encoder(ParameterStore& store, const std::string& prefix, std::size_t in,
                        const std::vector<std::size_t>& widths, std::mt19937_64& rng) {
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    add_dense(store, prefix + "." + std::to_string(i), in, widths[i], rng);
    in = widths[i];
  }
  add_dense(store, prefix + ".mu", in, widths.back(), rng);
  add_dense(store, prefix + ".log_sigma", in, widths.back(), rng);
  return widths.size() - 1;
}

GaussianParams apply_encoder(const Binder& bind, const std::string& prefix, std::size_t hidden_layers, Var x) {
  for (std::size_t i = 0; i < hidden_layers; ++i) x = ad::tanh(dense(bind, prefix + "." + std::to_string(i), x));
  return {dense(bind, prefix + ".mu", x), dense(bind, prefix + ".log_sigma", x)};
}

void add_decoder(ParameterStore& store, const std::string& prefix, const std::vector<std::size_t>& widths,
                 std::size_t out, std::mt19937_64& rng) {
  for (std::size_t i = 1; i < widths.size(); ++i) {
    add_dense(store, prefix + "." + std::to_string(i - 1), widths[i - 1], widths[i], rng);
  }
  add_dense(store, prefix + ".out", widths.back(), out, rng);
}

Var apply_decoder(const Binder& bind, const std::string& prefix, std::size_t hidden_layers, Var z) {
  for (std::size_t i = 0; i < hidden_layers; ++i) z = ad::tanh(dense(bind, prefix + "." + std::to_string(i), z));
  return ad::log_softmax(dense(bind, prefix + ".out", z));
}

std::string join_widths(const std::vector<std::size_t>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(w[i]);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  T out{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value '" + text + "' for " + key);
  return out;
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_value<std::size_t>(key, part));
  if (out.empty()) throw ConfigError("empty width list for " + key);
  return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::svae: return "svae";
    case ModelKind::mvae: return "mvae";
    case ModelKind::rvae: return "rvae";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "svae") return ModelKind::svae;
  if (s == "mvae") return ModelKind::mvae;
  if (s == "rvae") return ModelKind::rvae;
  throw ConfigError("unknown model kind '" + s + "' (expected svae, mvae or rvae)");
}

std::string to_string(LikelihoodMode mode) {
  return mode == LikelihoodMode::mixture ? "mixture" : "next-k-multiset";
}

LikelihoodMode parse_likelihood_mode(const std::string& s) {
  if (s == "next-k-multiset") return LikelihoodMode::next_k_multiset;
  if (s == "mixture") return LikelihoodMode::mixture;
  throw ContractError("unknown likelihood mode '" + s + "' (expected next-k-multiset or mixture)");
}

void ModelConfig::validate() const {
  auto positive = [](const std::vector<std::size_t>& w) {
    return !w.empty() && std::all_of(w.begin(), w.end(), [](std::size_t v) { return v >= 1; });
  };
  if (latent_dim < 1 || k_horizon < 1 || item_embedding_dim < 1 || gru_hidden < 1 || rvae_embedding_dim < 1) {
    throw ConfigError("latent_dim, k_horizon and layer sizes must be at least 1");
  }
  if (!positive(encoder_widths) || !positive(decoder_widths) || !positive(rvae_encoder_widths)) {
    throw ConfigError("layer widths must be non-empty and at least 1");
  }
  if (encoder_widths.back() != latent_dim || rvae_encoder_widths.back() != latent_dim) {
    throw ConfigError("the last encoder width must equal latent_dim");
  }
  if (decoder_widths.front() != latent_dim) throw ConfigError("the first decoder width must equal latent_dim");
  if (!(learning_rate > 0) || weight_decay < 0 || kl_weight < 0 || epochs < 0 || kl_anneal_epochs < 0) {
    throw ConfigError("learning_rate must be positive; weight_decay, kl_weight and epochs non-negative");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (rvae_unseen_user_rate < 0 || rvae_unseen_user_rate > 1) {
    throw ConfigError("rvae_unseen_user_rate must lie in [0, 1]");
  }
}

std::vector<std::pair<std::string, std::string>> ModelConfig::settings() const {
  return {{"latent_dim", std::to_string(latent_dim)},
          {"item_embedding_dim", std::to_string(item_embedding_dim)},
          {"gru_hidden", std::to_string(gru_hidden)},
          {"encoder_widths", join_widths(encoder_widths)},
          {"decoder_widths", join_widths(decoder_widths)},
          {"rvae_embedding_dim", std::to_string(rvae_embedding_dim)},
          {"rvae_encoder_widths", join_widths(rvae_encoder_widths)},
          {"k_horizon", std::to_string(k_horizon)},
          {"likelihood_mode", to_string(likelihood_mode)},
          {"learning_rate", format_double(learning_rate)},
          {"weight_decay", format_double(weight_decay)},
          {"kl_weight", format_double(kl_weight)},
          {"kl_anneal_epochs", std::to_string(kl_anneal_epochs)},
          {"epochs", std::to_string(epochs)},
          {"batch_size", std::to_string(batch_size)},
          {"rvae_unseen_user_rate", format_double(rvae_unseen_user_rate)},
          {"seed", std::to_string(seed)}};
}

bool ModelConfig::apply_setting(const std::string& key, const std::string& v) {
  if (key == "latent_dim") latent_dim = parse_value<std::size_t>(key, v);
  else if (key == "item_embedding_dim") item_embedding_dim = parse_value<std::size_t>(key, v);
  else if (key == "gru_hidden") gru_hidden = parse_value<std::size_t>(key, v);
  else if (key == "encoder_widths") encoder_widths = parse_widths(key, v);
  else if (key == "decoder_widths") decoder_widths = parse_widths(key, v);
  else if (key == "rvae_embedding_dim") rvae_embedding_dim = parse_value<std::size_t>(key, v);
  else if (key == "rvae_encoder_widths") rvae_encoder_widths = parse_widths(key, v);
  else if (key == "k_horizon") k_horizon = parse_value<std::size_t>(key, v);
  else if (key == "likelihood_mode") {
    try {
      likelihood_mode = parse_likelihood_mode(v);
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
  }
  else if (key == "learning_rate") learning_rate = parse_value<double>(key, v);
  else if (key == "weight_decay") weight_decay = parse_value<double>(key, v);
  else if (key == "kl_weight") kl_weight = parse_value<double>(key, v);
  else if (key == "kl_anneal_epochs") kl_anneal_epochs = parse_value<int>(key, v);
  else if (key == "epochs") epochs = parse_value<int>(key, v);
  else if (key == "batch_size") batch_size = parse_value<std::size_t>(key, v);
  else if (key == "rvae_unseen_user_rate") rvae_unseen_user_rate = parse_value<double>(key, v);
  else if (key == "seed") seed = parse_value<std::uint64_t>(key, v);
  else return false;
  return true;
}

std::string ModelConfig::digest() const {
  std::string buf;
  for (const auto& [k, v] : settings()) buf += k + "=" + v + "\n";
  return fnv1a_hex(buf);
}

Var reparameterize(const GaussianParams& g, Var eps) { return ad::reparameterize(g.mu, g.log_sigma, eps); }

Var kl_gaussian_standard(const GaussianParams& g) { return ad::kl_standard_normal(g.mu, g.log_sigma); }

Var multinomial_log_likelihood(std::span<const ItemIndex> items, Var log_pi, std::size_t row) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  cells.reserve(items.size());
  for (ItemIndex i : items) cells.emplace_back(row, i);
  return ad::sum(ad::gather(log_pi, cells));
}

std::vector<ItemIndex> next_k_targets(std::span<const ItemIndex> sequence, std::size_t t, std::size_t k) {
  if (t < 1 || t > sequence.size()) {
    throw ContractError("next_k_targets: step " + std::to_string(t) + " outside 1.." +
                        std::to_string(sequence.size()));
  }
  if (k < 1) throw ContractError("next_k_targets: k must be at least 1");
  const std::size_t end = std::min(t - 1 + k, sequence.size());
  return {sequence.begin() + static_cast<std::ptrdiff_t>(t - 1), sequence.begin() + static_cast<std::ptrdiff_t>(end)};
}

Var Binder::operator()(const std::string& name) const {
  if (mutable_) return tape_->parameter(mutable_->get(name));
  return tape_->view(const_->get(name));
}

Tensor standard_normal(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.data) v = dist(rng);
  return t;
}

// ---------------------------------------------------------------------------

VaeModel::VaeModel(ModelKind kind, ModelConfig config, std::size_t catalog_size)
    : kind_(kind), config_(std::move(config)), catalog_size_(catalog_size) {
  config_.validate();
  if (catalog_size_ == 0) throw ContractError("empty item catalog");
}

AdamOptions VaeModel::adam() const {
  AdamOptions opt;
  opt.learning_rate = config_.learning_rate;
  opt.weight_decay = config_.weight_decay;
  return opt;
}

void VaeModel::check_finite(double loss, int epoch, std::size_t batch) const {
  if (!std::isfinite(loss)) throw TrainingError(epoch, batch, "non-finite loss");
}

// ---------------------------------------------------------------------------

SvaeModel::SvaeModel(const ModelConfig& config, std::size_t catalog_size)
    : VaeModel(ModelKind::svae, config, catalog_size) {
  std::mt19937_64 rng(config_.seed);
  const std::size_t e = config_.item_embedding_dim;
  const std::size_t h = config_.gru_hidden;
  params_.add("svae.item_embedding", normal_init({catalog_size_ + 1, e}, 0.01, rng));
  for (const char* gate : {"reset", "update", "cand"}) {
    const std::string g = gate;
    params_.add("svae.gru.w_" + g, glorot_uniform(e, h, rng));
    params_.add("svae.gru.u_" + g, glorot_uniform(h, h, rng));
    params_.add("svae.gru.b_" + g, Tensor({h}));
  }
  add_encoder(params_, "svae.encoder", h, config_.encoder_widths, rng);
  add_decoder(params_, "svae.decoder", config_.decoder_widths, catalog_size_, rng);
}

Var SvaeModel::hidden_states(const Binder& bind, std::span<const std::size_t> inputs) const {
  Tape& tape = bind.tape();
  Var emb = ad::embedding(bind("svae.item_embedding"), inputs);
  const ad::GruWeights w{bind("svae.gru.w_reset"),  bind("svae.gru.u_reset"),  bind("svae.gru.b_reset"),
                         bind("svae.gru.w_update"), bind("svae.gru.u_update"), bind("svae.gru.b_update"),
                         bind("svae.gru.w_cand"),   bind("svae.gru.u_cand"),   bind("svae.gru.b_cand")};
  Var h = tape.constant(Tensor({1, config_.gru_hidden}));
  std::vector<Var> states;
  states.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    h = ad::gru_cell(ad::row(emb, t), h, w);
    states.push_back(h);
  }
  return ad::stack_rows(states);
}

GaussianParams SvaeModel::encode(const Binder& bind, Var hidden) const {
  return apply_encoder(bind, "svae.encoder", config_.encoder_widths.size() - 1, hidden);
}

Var SvaeModel::decode(const Binder& bind, Var z) const {
  return apply_decoder(bind, "svae.decoder", config_.decoder_widths.size() - 1, z);
}

SvaeForward SvaeModel::forward(const Binder& bind, std::span<const ItemIndex> sequence, const Tensor* eps) const {
  if (sequence.empty()) throw ContractError("svae_forward: empty sequence");
  std::vector<std::size_t> inputs;
  inputs.reserve(sequence.size());
  inputs.push_back(start_token());
  for (std::size_t t = 0; t + 1 < sequence.size(); ++t) {
    if (sequence[t] >= catalog_size_) throw IndexError("svae_forward: item outside catalog");
    inputs.push_back(sequence[t]);
  }
  if (sequence.back() >= catalog_size_) throw IndexError("svae_forward: item outside catalog");
  Var hidden = hidden_states(bind, inputs);
  SvaeForward out;
  out.q = encode(bind, hidden);
  out.z = eps ? reparameterize(out.q, bind.tape().view(*eps)) : out.q.mu;
  out.log_pi = decode(bind, out.z);
  return out;
}

Var SvaeModel::loss(const Binder& bind, std::span<const ItemIndex> sequence, const Tensor& eps, double kl_weight,
                    std::size_t k, LikelihoodMode mode) const {
  const SvaeForward f = forward(bind, sequence, &eps);
  const std::size_t steps = sequence.size();
  Var ll;
  if (mode == LikelihoodMode::next_k_multiset) {
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t t = 1; t <= steps; ++t) {
      for (ItemIndex i : next_k_targets(sequence, t, k)) cells.emplace_back(t - 1, i);
    }
    ll = ad::sum(ad::gather(f.log_pi, cells));
  } else if (mode == LikelihoodMode::mixture) {
    if (k < 1) throw ContractError("mixture likelihood needs k >= 1");
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    std::vector<std::size_t> windows;
    Tensor log_window({steps});
    for (std::size_t t = 1; t <= steps; ++t) {
      const std::size_t first = t > k ? t - k + 1 : 1;
      for (std::size_t j = first; j <= t; ++j) cells.emplace_back(j - 1, sequence[t - 1]);
      windows.push_back(t - first + 1);
      log_window.data[t - 1] = std::log(static_cast<double>(windows.back()));
    }
    Var lse = ad::segment_logsumexp(ad::gather(f.log_pi, cells), windows);
    ll = ad::sum(ad::sub(lse, bind.tape().constant(std::move(log_window))));
  } else {
    throw ContractError("unknown likelihood mode");
  }
  Var kl = kl_gaussian_standard(f.q);
  return ad::affine(ad::sub(ad::affine(kl, kl_weight, 0.0), ll), 1.0 / static_cast<double>(steps), 0.0);
}

std::vector<double> SvaeModel::score(std::span<const ItemIndex> history) const {
  Tape tape;
  const Binder bind(tape, params_);
  std::vector<std::size_t> inputs{start_token()};
  for (ItemIndex i : history) {
    if (i >= catalog_size_) throw IndexError("svae: history item outside catalog");
    inputs.push_back(i);
  }
  Var hidden = hidden_states(bind, inputs);
  const GaussianParams q = encode(bind, ad::row(hidden, inputs.size() - 1));
  return decode(bind, q.mu).value().data;
}

double SvaeModel::fit_epoch(const std::vector<UserSequence>& train, double kl_weight, int epoch,
                            std::mt19937_64& rng) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const AdamOptions opt = adam();
  double total = 0.0;
  std::size_t updates = 0;
  for (std::size_t b = 0; b < order.size(); ++b) {
    const auto& items = train[order[b]].items;
    if (items.empty()) continue;
    const Tensor eps = standard_normal({items.size(), config_.latent_dim}, rng);
    Tape tape;
    params_.zero_grad();
    Var l = loss(Binder(tape, params_), items, eps, kl_weight, config_.k_horizon, config_.likelihood_mode);
    const double value = l.item();
    check_finite(value, epoch, b);
    tape.backward(l);
    params_.adam_step(opt);
    total += value;
    ++updates;
  }
  return updates ? total / static_cast<double>(updates) : 0.0;
}

// ---------------------------------------------------------------------------

MvaeModel::MvaeModel(const ModelConfig& config, std::size_t catalog_size)
    : VaeModel(ModelKind::mvae, config, catalog_size) {
  std::mt19937_64 rng(config_.seed);
  add_encoder(params_, "mvae.encoder", catalog_size_, config_.encoder_widths, rng);
  add_decoder(params_, "mvae.decoder", config_.decoder_widths, catalog_size_, rng);
}

GaussianParams MvaeModel::encode(const Binder& bind, const std::vector<std::vector<ItemIndex>>& bags) const {
  Tensor x({bags.size(), catalog_size_});
  for (std::size_t b = 0; b < bags.size(); ++b) {
    for (ItemIndex i : bags[b]) {
      if (i >= catalog_size_) throw IndexError("mvae: item outside catalog");
      x.at(b, i) = 1.0;
    }
  }
  return apply_encoder(bind, "mvae.encoder", config_.encoder_widths.size() - 1,
                       bind.tape().constant(std::move(x)));
}

Var MvaeModel::decode(const Binder& bind, Var z) const {
  return apply_decoder(bind, "mvae.decoder", config_.decoder_widths.size() - 1, z);
}

Var MvaeModel::loss(const Binder& bind, const std::vector<std::vector<ItemIndex>>& bags, const Tensor& eps,
                    double kl_weight) const {
  if (bags.empty()) throw ContractError("mvae_loss: empty batch");
  const GaussianParams q = encode(bind, bags);
  Var log_pi = decode(bind, reparameterize(q, bind.tape().view(eps)));
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    for (ItemIndex i : bags[b]) cells.emplace_back(b, i);
  }
  Var ll = ad::sum(ad::gather(log_pi, cells));
  Var kl = kl_gaussian_standard(q);
  return ad::affine(ad::sub(ad::affine(kl, kl_weight, 0.0), ll), 1.0 / static_cast<double>(bags.size()), 0.0);
}

std::vector<double> MvaeModel::score(std::span<const ItemIndex> history) const {
  Tape tape;
  const Binder bind(tape, params_);
  const GaussianParams q = encode(bind, {std::vector<ItemIndex>(history.begin(), history.end())});
  return decode(bind, q.mu).value().data;
}

double MvaeModel::fit_epoch(const std::vector<UserSequence>& train, double kl_weight, int epoch,
                            std::mt19937_64& rng) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const AdamOptions opt = adam();
  double total = 0.0;
  std::size_t updates = 0;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    std::vector<std::vector<ItemIndex>> bags;
    for (std::size_t k = start; k < end; ++k) bags.push_back(train[order[k]].items);
    const Tensor eps = standard_normal({bags.size(), config_.latent_dim}, rng);
    Tape tape;
    params_.zero_grad();
    Var l = loss(Binder(tape, params_), bags, eps, kl_weight);
    const double value = l.item();
    check_finite(value, epoch, updates);
    tape.backward(l);
    params_.adam_step(opt);
    total += value;
    ++updates;
  }
  return updates ? total / static_cast<double>(updates) : 0.0;
}

// ---------------------------------------------------------------------------

RvaeModel::RvaeModel(const ModelConfig& config, std::size_t catalog_size, std::vector<std::size_t> train_users)
    : VaeModel(ModelKind::rvae, config, catalog_size), train_users_(std::move(train_users)) {
  for (std::size_t r = 0; r < train_users_.size(); ++r) {
    if (!rows_.emplace(train_users_[r], r).second) throw ContractError("rvae: duplicate training user");
  }
  std::mt19937_64 rng(config_.seed);
  const std::size_t d = config_.rvae_embedding_dim;
  params_.add("rvae.user_embedding", normal_init({train_users_.size() + 1, d}, 0.01, rng));
  params_.add("rvae.item_embedding", normal_init({catalog_size_, d}, 0.01, rng));
  add_encoder(params_, "rvae.encoder", 2 * d, config_.rvae_encoder_widths, rng);
  // No bias: it cancels in every score difference.
  params_.add("rvae.scorer.weight", glorot_uniform(config_.latent_dim, 1, rng));
}

std::size_t RvaeModel::row_of(std::size_t user_index) const {
  auto it = rows_.find(user_index);
  return it == rows_.end() ? unseen_row() : it->second;
}

GaussianParams RvaeModel::encode(const Binder& bind, std::span<const std::size_t> user_rows,
                                 std::span<const ItemIndex> items) const {
  if (user_rows.size() != items.size()) throw DimensionError("rvae encode: user/item count mismatch");
  Var users = ad::embedding(bind("rvae.user_embedding"), user_rows);
  Var its = ad::embedding(bind("rvae.item_embedding"), items);
  return apply_encoder(bind, "rvae.encoder", config_.rvae_encoder_widths.size() - 1, ad::concat_cols(users, its));
}

Var RvaeModel::scorer(const Binder& bind, Var z) const { return ad::matmul(z, bind("rvae.scorer.weight")); }

Var RvaeModel::pair_loss(const Binder& bind, std::span<const RankingTriple> triples, const Tensor& eps_preferred,
                         const Tensor& eps_other, double kl_weight) const {
  if (triples.empty()) throw ContractError("rvae_pair_loss: no triples");
  std::vector<std::size_t> rows;
  std::vector<ItemIndex> pref;
  std::vector<ItemIndex> other;
  for (const auto& t : triples) {
    if (t.preferred == t.other) throw ContractError("rvae_pair_loss: preferred and other item coincide");
    rows.push_back(t.user_row);
    pref.push_back(t.preferred);
    other.push_back(t.other);
  }
  const GaussianParams qi = encode(bind, rows, pref);
  const GaussianParams qj = encode(bind, rows, other);
  Var si = scorer(bind, reparameterize(qi, bind.tape().view(eps_preferred)));
  Var sj = scorer(bind, reparameterize(qj, bind.tape().view(eps_other)));
  Var ll = ad::sum(ad::log_sigmoid(ad::sub(si, sj)));
  Var kl = ad::add(kl_gaussian_standard(qi), kl_gaussian_standard(qj));
  return ad::affine(ad::sub(ad::affine(kl, kl_weight, 0.0), ll), 1.0 / static_cast<double>(triples.size()), 0.0);
}

std::vector<double> RvaeModel::score_for_row(std::size_t user_row) const {
  if (user_row > unseen_row()) throw IndexError("rvae: user row outside embedding table");
  Tape tape;
  const Binder bind(tape, params_);
  std::vector<std::size_t> rows(catalog_size_, user_row);
  std::vector<ItemIndex> items(catalog_size_);
  std::iota(items.begin(), items.end(), ItemIndex{0});
  const GaussianParams q = encode(bind, rows, items);
  return scorer(bind, q.mu).value().data;
}

std::vector<double> RvaeModel::score(std::span<const ItemIndex>) const { return score_for_row(unseen_row()); }

double RvaeModel::fit_epoch(const std::vector<UserSequence>& train, double kl_weight, int epoch,
                            std::mt19937_64& rng) {
  std::vector<RankingTriple> triples;
  std::uniform_int_distribution<std::size_t> pick(0, catalog_size_ - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (const auto& s : train) {
    const std::unordered_set<ItemIndex> consumed(s.items.begin(), s.items.end());
    if (consumed.size() >= catalog_size_) continue;
    const std::size_t own_row = row_of(s.user_index);
    for (ItemIndex i : s.items) {
      ItemIndex j = pick(rng);
      while (consumed.count(j)) j = pick(rng);
      const std::size_t row = coin(rng) < config_.rvae_unseen_user_rate ? unseen_row() : own_row;
      triples.push_back({row, i, j});
    }
  }
  std::shuffle(triples.begin(), triples.end(), rng);
  const AdamOptions opt = adam();
  double total = 0.0;
  std::size_t updates = 0;
  for (std::size_t start = 0; start < triples.size(); start += config_.batch_size) {
    const std::size_t end = std::min(triples.size(), start + config_.batch_size);
    const std::span<const RankingTriple> batch(triples.data() + start, end - start);
    const Tensor eps_i = standard_normal({batch.size(), config_.latent_dim}, rng);
    const Tensor eps_j = standard_normal({batch.size(), config_.latent_dim}, rng);
    Tape tape;
    params_.zero_grad();
    Var l = pair_loss(Binder(tape, params_), batch, eps_i, eps_j, kl_weight);
    const double value = l.item();
    check_finite(value, epoch, updates);
    tape.backward(l);
    params_.adam_step(opt);
    total += value;
    ++updates;
  }
  return updates ? total / static_cast<double>(updates) : 0.0;
}

// ---------------------------------------------------------------------------

std::unique_ptr<VaeModel> make_model(ModelKind kind, const ModelConfig& config, std::size_t catalog_size,
                                     const std::vector<UserSequence>& train) {
  switch (kind) {
    case ModelKind::svae: return std::make_unique<SvaeModel>(config, catalog_size);
    case ModelKind::mvae: return std::make_unique<MvaeModel>(config, catalog_size);
    case ModelKind::rvae: {
      std::vector<std::size_t> users;
      users.reserve(train.size());
      for (const auto& s : train) users.push_back(s.user_index);
      return std::make_unique<RvaeModel>(config, catalog_size, std::move(users));
    }
  }
  throw ContractError("unknown model kind");
}

RankedList predict_svae(std::span<const ItemIndex> fold_in, const SvaeModel& model,
                        std::span<const ItemIndex> exclude) {
  return rank_items(model.score(fold_in), exclude);
}

RankedList predict_mvae(std::span<const ItemIndex> fold_in, const MvaeModel& model,
                        std::span<const ItemIndex> exclude) {
  return rank_items(model.score(fold_in), exclude);
}

RankedList predict_rvae(std::span<const ItemIndex> fold_in, const RvaeModel& model,
                        std::span<const ItemIndex> exclude) {
  return rank_items(model.score(fold_in), exclude);
}

}  // namespace seqvae
