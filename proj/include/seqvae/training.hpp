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

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "seqvae/data.hpp"
#include "seqvae/models.hpp"

namespace seqvae {

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  /// NaN when there are no validation users.
  double validation_ndcg100 = 0.0;
  double seconds = 0.0;
};

struct TrainCallbacks {
  std::function<void(const EpochStats&)> on_epoch;
};

struct TrainResult {
  std::unique_ptr<VaeModel> model;
  std::vector<EpochStats> curve;
  /// 0 when no epoch ran.
  int best_epoch = 0;
  double best_validation = 0.0;
};

/// Epoch loop with per-epoch validation NDCG@100; the returned model carries
/// the parameters of the best validation epoch (the last epoch when there are
/// no validation users).
TrainResult train(ModelKind kind, const DatasetSplit& split, const ModelConfig& config,
                  const TrainCallbacks& callbacks = {});

/// KL weight for a 1-based epoch under the configured warm-up.
double kl_weight_at(const ModelConfig& config, int epoch);

struct CheckpointInfo {
  int epoch = 0;
  double validation_score = 0.0;
  std::string vocabulary_digest;
};

struct LoadedModel {
  std::unique_ptr<VaeModel> model;
  CheckpointInfo info;
};

/// Writes model.json (kind, config, catalog size, tensor index) and model.bin
/// (little-endian float64 values in declaration order) into `dir`. The files
/// are staged in a sibling directory and renamed into place.
void save_checkpoint(const std::filesystem::path& dir, const VaeModel& model, const CheckpointInfo& info);
LoadedModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace seqvae
