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

#include "seqvae/training.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "seqvae/errors.hpp"

namespace seqvae {

double kl_weight_at(const ModelConfig& config, int epoch) {
  if (config.kl_anneal_epochs <= 0) return config.kl_weight;
  const double frac = std::min(1.0, static_cast<double>(epoch) / static_cast<double>(config.kl_anneal_epochs));
  return config.kl_weight * frac;
}

TrainResult train(ModelKind kind, const DatasetSplit& split, const ModelConfig& config,
                  const TrainCallbacks& callbacks) {
  if (split.train.empty()) throw ContractError("train: no training users");
  TrainResult result;
  result.model = make_model(kind, config, split.catalog_size(), split.train);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  EvalOptions val_opts;
  val_opts.cutoffs = {100};
  std::vector<Tensor> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = result.model->fit_epoch(split.train, kl_weight_at(config, epoch), epoch, rng);
    if (split.validation.empty()) {
      stats.validation_ndcg100 = std::numeric_limits<double>::quiet_NaN();
      best = result.model->params().snapshot();
      result.best_epoch = epoch;
    } else {
      stats.validation_ndcg100 = evaluate(*result.model, split.validation, val_opts).metric("NDCG@100");
      if (stats.validation_ndcg100 > best_score) {
        best_score = stats.validation_ndcg100;
        best = result.model->params().snapshot();
        result.best_epoch = epoch;
      }
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.curve.push_back(stats);
    if (callbacks.on_epoch) callbacks.on_epoch(stats);
  }
  if (!best.empty()) result.model->params().restore(best);
  result.best_validation = result.best_epoch > 0 && !split.validation.empty() ? best_score : 0.0;
  return result;
}

namespace {

void write_le_doubles(std::ofstream& out, const std::vector<double>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
}

std::vector<double> read_le_doubles(std::ifstream& in, std::size_t count) {
  std::vector<unsigned char> raw(count * sizeof(double));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw IoError("checkpoint blob is truncated");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(raw[i * 8 + b]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const VaeModel& model, const CheckpointInfo& info) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(dir);
  const fs::path staging = target.parent_path() / (target.filename().string() + ".partial");
  fs::remove_all(staging);
  fs::create_directories(staging);

  nlohmann::ordered_json manifest;
  manifest["model"] = to_string(model.kind());
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : model.config().settings()) cfg[k] = v;
  manifest["config"] = cfg;
  manifest["catalog_size"] = model.catalog_size();
  manifest["epoch"] = info.epoch;
  manifest["validation_score"] = std::isfinite(info.validation_score) ? info.validation_score : 0.0;
  manifest["vocabulary_digest"] = info.vocabulary_digest;
  if (const auto* rvae = dynamic_cast<const RvaeModel*>(&model)) manifest["rvae_train_users"] = rvae->train_users();

  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  {
    std::ofstream blob(staging / "model.bin", std::ios::binary);
    if (!blob) throw IoError("cannot write " + (staging / "model.bin").string());
    for (const std::string& name : model.params().names()) {
      const Tensor& t = model.params().get(name);
      tensors.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
      write_le_doubles(blob, t.data);
      offset += t.size();
    }
    if (!blob) throw IoError("write failed for checkpoint blob");
  }
  manifest["tensors"] = tensors;
  {
    std::ofstream mf(staging / "model.json", std::ios::binary);
    if (!mf) throw IoError("cannot write checkpoint manifest");
    mf << manifest.dump(2) << '\n';
    if (!mf) throw IoError("write failed for checkpoint manifest");
  }
  fs::remove_all(target);
  fs::rename(staging, target);
}

LoadedModel load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "model.json");
  if (!mf) throw IoError("cannot read " + (dir / "model.json").string());
  const auto manifest = nlohmann::json::parse(mf, nullptr, false);
  if (manifest.is_discarded()) throw ConfigError("malformed checkpoint manifest in " + dir.string());
  try {
    const ModelKind kind = parse_model_kind(manifest.at("model").get<std::string>());
    ModelConfig config;
    for (const auto& [k, v] : manifest.at("config").items()) {
      if (!config.apply_setting(k, v.get<std::string>())) throw ConfigError("unknown config key '" + k + "'");
    }
    const auto catalog = manifest.at("catalog_size").get<std::size_t>();
    LoadedModel out;
    if (kind == ModelKind::rvae) {
      out.model = std::make_unique<RvaeModel>(config, catalog,
                                              manifest.at("rvae_train_users").get<std::vector<std::size_t>>());
    } else {
      out.model = make_model(kind, config, catalog, {});
    }
    out.info.epoch = manifest.at("epoch").get<int>();
    out.info.validation_score = manifest.at("validation_score").get<double>();
    out.info.vocabulary_digest = manifest.at("vocabulary_digest").get<std::string>();

    ParameterStore& params = out.model->params();
    const auto& tensors = manifest.at("tensors");
    if (tensors.size() != params.size()) throw ConfigError("checkpoint tensor count does not match the model");
    std::ifstream blob(dir / "model.bin", std::ios::binary);
    if (!blob) throw IoError("cannot read " + (dir / "model.bin").string());
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      const auto name = tensors[k].at("name").get<std::string>();
      const auto shape = tensors[k].at("shape").get<Shape>();
      if (name != params.names()[k]) throw ConfigError("checkpoint tensor '" + name + "' out of order");
      Tensor& t = params.get(name);
      if (shape != t.shape) {
        throw DimensionError("checkpoint tensor '" + name + "' has shape " + shape_string(shape) + ", model expects " +
                             shape_string(t.shape));
      }
      t.data = read_le_doubles(blob, t.size());
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint manifest: ") + e.what());
  }
}

}  // namespace seqvae
