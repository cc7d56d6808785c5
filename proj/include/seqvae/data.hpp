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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seqvae {

using ItemIndex = std::size_t;

struct InteractionRecord {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

struct ImplicitRecord {
  std::string user_id;
  std::string item_id;
  std::int64_t timestamp = 0;
};

/// A user's consumed items, ascending by timestamp.
struct UserSequence {
  std::size_t user_index = 0;
  std::vector<ItemIndex> items;

  bool operator==(const UserSequence&) const = default;
};

/// Bijection between raw item ids and dense indices.
class ItemVocabulary {
 public:
  /// Returns the existing index or assigns the next one.
  ItemIndex intern(const std::string& raw_id);
  ItemIndex index_of(const std::string& raw_id) const;  // throws LookupError
  bool contains(const std::string& raw_id) const { return to_index_.count(raw_id) != 0; }
  const std::string& raw_id(ItemIndex index) const;
  std::size_t size() const noexcept { return raw_.size(); }
  const std::vector<std::string>& raw_ids() const noexcept { return raw_; }
  /// FNV-1a over the serialized vocabulary; used to match checkpoints to splits.
  std::string digest() const;

  bool operator==(const ItemVocabulary& other) const { return raw_ == other.raw_; }

 private:
  std::vector<std::string> raw_;
  std::unordered_map<std::string, ItemIndex> to_index_;
};

struct FoldSplit {
  std::vector<ItemIndex> fold_in;
  /// Held-out items in time order; items are unique so this doubles as the set.
  std::vector<ItemIndex> fold_out;
};

struct HeldOutUser {
  UserSequence sequence;
  FoldSplit folds;
};

struct DatasetSplit {
  std::vector<UserSequence> train;
  std::vector<HeldOutUser> validation;
  std::vector<HeldOutUser> test;
  ItemVocabulary vocabulary;
  double fold_ratio = 0.8;

  std::size_t catalog_size() const noexcept { return vocabulary.size(); }
};

struct FormatDescriptor {
  std::string delimiter = ",";
  double rating_min = 1.0;
  double rating_max = 5.0;
};

/// Reads delimiter-separated rows (user, item, rating, timestamp). Blank lines
/// are skipped; anything else that does not parse raises ParseError.
std::vector<InteractionRecord> ingest(const std::filesystem::path& path,
                                      const FormatDescriptor& format = {});
std::vector<InteractionRecord> parse_records(std::string_view text, const FormatDescriptor& format = {});

/// Keeps records with rating strictly above the threshold.
std::vector<ImplicitRecord> binarize(const std::vector<InteractionRecord>& records,
                                     double threshold = 3.0);

/// Orders raw ids numerically when both are integers, lexicographically
/// otherwise.
bool raw_id_less(std::string_view a, std::string_view b);

struct SequenceSet {
  std::vector<UserSequence> sequences;
  ItemVocabulary vocabulary;
  /// Raw user id per user_index.
  std::vector<std::string> user_ids;
};

/// Groups records per user and sorts by (timestamp, raw item id). Only the
/// earliest interaction of a repeated (user, item) pair is kept. Users get
/// dense indices in raw-id order; items in first appearance over the records
/// ordered by (timestamp, user, item).
SequenceSet build_sequences(const std::vector<ImplicitRecord>& records);

std::vector<UserSequence> filter_min_history(const std::vector<UserSequence>& sequences,
                                             std::size_t min_length = 5);

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct UserPartition {
  std::vector<UserSequence> train;
  std::vector<UserSequence> validation;
  std::vector<UserSequence> test;
};

UserPartition split_users(const std::vector<UserSequence>& sequences, const SplitFractions& fractions,
                          std::uint64_t seed);

/// fold_in is the first floor(ratio * L) items clamped to [1, L - 1].
FoldSplit fold_split(const std::vector<ItemIndex>& sequence, double ratio = 0.8);

/// Default strata on history length: [5, 9), [9, 17), [17, 33), ... up to the
/// longest sequence.
std::vector<std::size_t> default_strata_edges(std::size_t max_length);

/// Per-stratum sample sizes: proportional to 1 / |stratum|, scaled to the
/// target, capped at the stratum size with the excess redistributed.
std::vector<std::size_t> stratum_allocation(const std::vector<std::size_t>& stratum_sizes,
                                            std::size_t target);

/// Stratified sample of users by history length. Output keeps input order.
std::vector<UserSequence> stratified_subsample(const std::vector<UserSequence>& sequences,
                                               std::size_t target,
                                               const std::vector<std::size_t>& strata_edges,
                                               std::uint64_t seed);

struct PipelineConfig {
  FormatDescriptor format;
  double binarize_threshold = 3.0;
  std::size_t min_history = 5;
  /// 0 disables subsampling.
  std::size_t subsample_users = 0;
  /// Empty means default_strata_edges.
  std::vector<std::size_t> strata_edges;
  SplitFractions fractions;
  double fold_ratio = 0.8;
  std::uint64_t seed = 42;
};

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  double average_length = 0.0;
  std::size_t train_users = 0;
  std::size_t validation_users = 0;
  std::size_t test_users = 0;
};

/// Builds held-out users by fold-splitting their sequences.
std::vector<HeldOutUser> make_held_out(const std::vector<UserSequence>& sequences, double ratio);

/// ingest -> binarize -> build_sequences -> filter -> subsample -> split -> fold split.
DatasetSplit prepare_split(const std::vector<InteractionRecord>& records, const PipelineConfig& config);
DatasetStats compute_stats(const DatasetSplit& split);

/// Writes train.tsv, validation.tsv, test.tsv (user_index<TAB>i1,i2,...),
/// vocabulary.tsv (raw_id<TAB>index) and manifest.json. `manifest_extra` is a
/// JSON object string merged into the manifest.
void write_split(const std::filesystem::path& dir, const DatasetSplit& split,
                 const std::string& manifest_extra = "{}");
DatasetSplit read_split(const std::filesystem::path& dir);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace seqvae
