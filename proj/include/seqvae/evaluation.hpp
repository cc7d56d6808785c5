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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqvae/data.hpp"

namespace seqvae {

/// Ordered item indices, best first, no duplicates.
using RankedList = std::vector<ItemIndex>;

// Binary-relevance ranking metrics. `relevant` must hold distinct items.
//
// IDCG sums 1/log2(i+1) over all |R| relevant items unless cap_idcg is set,
// in which case it stops at min(|R|, n).
double ndcg_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> relevant, std::size_t n,
                 bool cap_idcg = false);
/// Hits in the top n divided by n, even when the list is shorter than n.
double precision_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> relevant,
                      std::size_t n);
double recall_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> relevant, std::size_t n);

/// Sorts items by descending score (ties by ascending index), dropping any
/// item in `exclude`.
RankedList rank_items(std::span<const double> scores, std::span<const ItemIndex> exclude);

/// Anything that can score the whole catalog from a user's fold-in history.
class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual std::string name() const = 0;
  virtual std::size_t catalog_size() const = 0;
  /// One score per catalog item; higher is better.
  virtual std::vector<double> score(std::span<const ItemIndex> history) const = 0;

  /// Ranked catalog with the history items excluded.
  RankedList recommend(std::span<const ItemIndex> history) const;
};

/// Ranks by training interaction count.
class PopularityBaseline : public Recommender {
 public:
  PopularityBaseline(const std::vector<UserSequence>& train, std::size_t catalog_size);
  std::string name() const override { return "pop"; }
  std::size_t catalog_size() const override { return counts_.size(); }
  std::vector<double> score(std::span<const ItemIndex> history) const override;
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }

 private:
  std::vector<std::size_t> counts_;
};

struct EvalOptions {
  std::vector<std::size_t> cutoffs{10, 100};
  bool cap_idcg = false;
  bool keep_per_user = false;
};

struct UserResult {
  std::size_t user_index = 0;
  std::size_t fold_in_length = 0;
  /// Same key order as EvalReport::metrics.
  std::vector<double> values;
};

struct EvalReport {
  std::string model;
  std::string config_digest;
  /// ("NDCG@10", mean), ... grouped by metric then cutoff.
  std::vector<std::pair<std::string, double>> metrics;
  std::size_t users = 0;
  std::vector<UserResult> per_user;

  double metric(const std::string& key) const;  // throws LookupError
  /// {model, config_digest, metrics: {...}, users}
  std::string to_json() const;
};

std::vector<std::string> metric_keys(const std::vector<std::size_t>& cutoffs);

/// Scores every held-out user's fold-in, ranks with fold-in items excluded and
/// compares against the fold-out set. Means are unweighted over users and
/// summed in user-index order; per_user follows the same order.
EvalReport evaluate(const Recommender& model, const std::vector<HeldOutUser>& users,
                    const EvalOptions& options = {});

struct HistoryBucket {
  std::size_t lower = 0;  // inclusive
  std::size_t upper = 0;  // inclusive; 0 means unbounded
  std::size_t users = 0;
  double mean_ndcg = 0.0;
};

/// Fold-in length buckets [1-10], (10-20], (20-40], (40-80], (80, inf).
std::vector<HistoryBucket> ndcg_by_history_length(const EvalReport& report, std::size_t cutoff = 100);

}  // namespace seqvae
