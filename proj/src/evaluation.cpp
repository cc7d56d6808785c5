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

#include "seqvae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "seqvae/errors.hpp"

namespace seqvae {
namespace {

std::size_t hits_at(std::span<const ItemIndex> ranked, const std::unordered_set<ItemIndex>& rel,
                    std::size_t n) {
  std::size_t hits = 0;
  const std::size_t limit = std::min(n, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) hits += rel.count(ranked[i]);
  return hits;
}

std::unordered_set<ItemIndex> as_set(std::span<const ItemIndex> relevant) {
  return {relevant.begin(), relevant.end()};
}

}  // namespace

double ndcg_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> relevant, std::size_t n,
                 bool cap_idcg) {
  if (relevant.empty()) throw ContractError("ndcg_at_n: empty relevant set");
  if (n == 0) throw ContractError("ndcg_at_n: n must be positive");
  const auto rel = as_set(relevant);
  double dcg = 0.0;
  const std::size_t limit = std::min(n, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (rel.count(ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  const std::size_t ideal = cap_idcg ? std::min(n, rel.size()) : rel.size();
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

double precision_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> relevant,
                      std::size_t n) {
  if (n == 0) throw ContractError("precision_at_n: n must be positive");
  return static_cast<double>(hits_at(ranked, as_set(relevant), n)) / static_cast<double>(n);
}

double recall_at_n(std::span<const ItemIndex> ranked, std::span<const ItemIndex> relevant, std::size_t n) {
  if (relevant.empty()) throw ContractError("recall_at_n: empty relevant set");
  const auto rel = as_set(relevant);
  return static_cast<double>(hits_at(ranked, rel, n)) / static_cast<double>(rel.size());
}

RankedList rank_items(std::span<const double> scores, std::span<const ItemIndex> exclude) {
  std::vector<bool> skip(scores.size(), false);
  for (ItemIndex i : exclude) {
    if (i < skip.size()) skip[i] = true;
  }
  RankedList out;
  out.reserve(scores.size());
  for (ItemIndex i = 0; i < scores.size(); ++i) {
    if (!skip[i]) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [&](ItemIndex a, ItemIndex b) { return scores[a] > scores[b]; });
  return out;
}

RankedList Recommender::recommend(std::span<const ItemIndex> history) const {
  const auto s = score(history);
  return rank_items(s, history);
}

PopularityBaseline::PopularityBaseline(const std::vector<UserSequence>& train, std::size_t catalog_size)
    : counts_(catalog_size, 0) {
  for (const auto& s : train) {
    for (ItemIndex i : s.items) {
      if (i >= catalog_size) throw IndexError("popularity: item outside catalog");
      ++counts_[i];
    }
  }
}

std::vector<double> PopularityBaseline::score(std::span<const ItemIndex>) const {
  return {counts_.begin(), counts_.end()};
}

std::vector<std::string> metric_keys(const std::vector<std::size_t>& cutoffs) {
  std::vector<std::string> keys;
  for (const char* metric : {"NDCG", "Precision", "Recall"}) {
    for (std::size_t n : cutoffs) keys.push_back(std::string(metric) + "@" + std::to_string(n));
  }
  return keys;
}

double EvalReport::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics) {
    if (k == key) return v;
  }
  throw LookupError("no metric '" + key + "' in report");
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["config_digest"] = config_digest;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  j["metrics"] = m;
  j["users"] = users;
  return j.dump(2);
}

EvalReport evaluate(const Recommender& model, const std::vector<HeldOutUser>& users,
                    const EvalOptions& options) {
  if (options.cutoffs.empty()) throw ContractError("evaluate: no cutoffs");
  const auto keys = metric_keys(options.cutoffs);
  const std::size_t nc = options.cutoffs.size();
  EvalReport report;
  report.model = model.name();
  std::vector<UserResult> results;
  results.reserve(users.size());
  for (const HeldOutUser& u : users) {
    if (u.folds.fold_out.empty()) {
      throw ContractError("evaluate: user " + std::to_string(u.sequence.user_index) + " has an empty fold-out");
    }
    const RankedList ranked = model.recommend(u.folds.fold_in);
    UserResult r{u.sequence.user_index, u.folds.fold_in.size(), std::vector<double>(keys.size())};
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t n = options.cutoffs[c];
      r.values[c] = ndcg_at_n(ranked, u.folds.fold_out, n, options.cap_idcg);
      r.values[nc + c] = precision_at_n(ranked, u.folds.fold_out, n);
      r.values[2 * nc + c] = recall_at_n(ranked, u.folds.fold_out, n);
    }
    results.push_back(std::move(r));
  }
  // Sum in user-index order so the means do not depend on input order.
  std::stable_sort(results.begin(), results.end(),
                   [](const UserResult& a, const UserResult& b) { return a.user_index < b.user_index; });
  std::vector<double> totals(keys.size(), 0.0);
  for (const UserResult& r : results) {
    for (std::size_t k = 0; k < keys.size(); ++k) totals[k] += r.values[k];
  }
  if (options.keep_per_user) report.per_user = std::move(results);
  report.users = users.size();
  for (std::size_t k = 0; k < keys.size(); ++k) {
    report.metrics.emplace_back(keys[k], users.empty() ? 0.0 : totals[k] / static_cast<double>(users.size()));
  }
  return report;
}

std::vector<HistoryBucket> ndcg_by_history_length(const EvalReport& report, std::size_t cutoff) {
  const std::string key = "NDCG@" + std::to_string(cutoff);
  std::size_t column = report.metrics.size();
  for (std::size_t k = 0; k < report.metrics.size(); ++k) {
    if (report.metrics[k].first == key) column = k;
  }
  if (column == report.metrics.size()) throw LookupError("no metric '" + key + "' in report");
  if (report.per_user.empty() && report.users > 0) {
    throw ContractError("history-length breakdown needs per-user results");
  }
  std::vector<HistoryBucket> buckets{{1, 10}, {11, 20}, {21, 40}, {41, 80}, {81, 0}};
  std::vector<double> sums(buckets.size(), 0.0);
  for (const UserResult& r : report.per_user) {
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      const bool fits = r.fold_in_length >= buckets[b].lower &&
                        (buckets[b].upper == 0 || r.fold_in_length <= buckets[b].upper);
      if (fits) {
        ++buckets[b].users;
        sums[b] += r.values[column];
        break;
      }
    }
  }
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    if (buckets[b].users) buckets[b].mean_ndcg = sums[b] / static_cast<double>(buckets[b].users);
  }
  return buckets;
}

}  // namespace seqvae
