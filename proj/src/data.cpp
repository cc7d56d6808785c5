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

#include "seqvae/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "seqvae/errors.hpp"

namespace seqvae {
namespace {

std::vector<std::string_view> split_fields(std::string_view line, std::string_view delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + delim.size();
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_integer_id(std::string_view s, unsigned long long& out) {
  if (s.empty() || s.size() > 18) return false;
  return parse_number(s, out);
}

std::string join_items(const std::vector<ItemIndex>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(items[i]);
  }
  return out;
}

void write_sequences(const std::filesystem::path& path, const std::vector<const UserSequence*>& seqs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const UserSequence* s : seqs) out << s->user_index << '\t' << join_items(s->items) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<UserSequence> read_sequences(const std::filesystem::path& path, std::size_t catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<UserSequence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, path.filename().string() + ": missing tab");
    UserSequence seq;
    if (!parse_number(std::string_view(line).substr(0, tab), seq.user_index)) {
      throw ParseError(lineno, path.filename().string() + ": bad user index");
    }
    const std::string_view rest = trim(std::string_view(line).substr(tab + 1));
    if (!rest.empty()) {
      for (std::string_view f : split_fields(rest, ",")) {
        ItemIndex item = 0;
        if (!parse_number(f, item)) throw ParseError(lineno, path.filename().string() + ": bad item index");
        if (item >= catalog) {
          throw ParseError(lineno, path.filename().string() + ": item index " + std::to_string(item) +
                                       " outside catalog of " + std::to_string(catalog));
        }
        seq.items.push_back(item);
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace

ItemIndex ItemVocabulary::intern(const std::string& raw_id) {
  auto [it, inserted] = to_index_.emplace(raw_id, raw_.size());
  if (inserted) raw_.push_back(raw_id);
  return it->second;
}

ItemIndex ItemVocabulary::index_of(const std::string& raw_id) const {
  auto it = to_index_.find(raw_id);
  if (it == to_index_.end()) throw LookupError("unknown item id '" + raw_id + "'");
  return it->second;
}

const std::string& ItemVocabulary::raw_id(ItemIndex index) const {
  if (index >= raw_.size()) {
    throw IndexError("item index " + std::to_string(index) + " outside vocabulary of " +
                     std::to_string(raw_.size()));
  }
  return raw_[index];
}

std::string ItemVocabulary::digest() const {
  std::string buf;
  for (std::size_t i = 0; i < raw_.size(); ++i) {
    buf += raw_[i];
    buf += '\t';
    buf += std::to_string(i);
    buf += '\n';
  }
  return fnv1a_hex(buf);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::vector<InteractionRecord> parse_records(std::string_view text, const FormatDescriptor& format) {
  if (format.delimiter.empty()) throw ContractError("empty field delimiter");
  std::vector<InteractionRecord> out;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_fields(line, format.delimiter);
    if (fields.size() != 4) {
      throw ParseError(lineno, "expected 4 fields (user, item, rating, timestamp), got " +
                                   std::to_string(fields.size()));
    }
    InteractionRecord rec;
    rec.user_id = std::string(trim(fields[0]));
    rec.item_id = std::string(trim(fields[1]));
    if (rec.user_id.empty() || rec.item_id.empty()) throw ParseError(lineno, "empty user or item id");
    if (!parse_number(trim(fields[2]), rec.rating) || !std::isfinite(rec.rating)) {
      throw ParseError(lineno, "rating '" + std::string(fields[2]) + "' is not a number");
    }
    if (rec.rating < format.rating_min || rec.rating > format.rating_max) {
      throw ParseError(lineno, "rating " + std::string(trim(fields[2])) + " outside declared range");
    }
    if (!parse_number(trim(fields[3]), rec.timestamp) || rec.timestamp < 0) {
      throw ParseError(lineno, "timestamp '" + std::string(fields[3]) + "' is not a non-negative integer");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<InteractionRecord> ingest(const std::filesystem::path& path, const FormatDescriptor& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return parse_records(ss.str(), format);
}

std::vector<ImplicitRecord> binarize(const std::vector<InteractionRecord>& records, double threshold) {
  std::vector<ImplicitRecord> out;
  for (const auto& r : records) {
    if (r.rating > threshold) out.push_back({r.user_id, r.item_id, r.timestamp});
  }
  return out;
}

bool raw_id_less(std::string_view a, std::string_view b) {
  unsigned long long na = 0;
  unsigned long long nb = 0;
  if (parse_integer_id(a, na) && parse_integer_id(b, nb) && na != nb) return na < nb;
  return a < b;
}

SequenceSet build_sequences(const std::vector<ImplicitRecord>& records) {
  std::vector<const ImplicitRecord*> order(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) order[i] = &records[i];

  // Item indices: first appearance in (timestamp, user, item) order.
  std::sort(order.begin(), order.end(), [](const ImplicitRecord* a, const ImplicitRecord* b) {
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    if (a->user_id != b->user_id) return raw_id_less(a->user_id, b->user_id);
    return raw_id_less(a->item_id, b->item_id);
  });
  SequenceSet out;
  for (const ImplicitRecord* r : order) out.vocabulary.intern(r->item_id);

  // Per-user grouping: (user, timestamp, item).
  std::stable_sort(order.begin(), order.end(), [](const ImplicitRecord* a, const ImplicitRecord* b) {
    if (a->user_id != b->user_id) return raw_id_less(a->user_id, b->user_id);
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    return raw_id_less(a->item_id, b->item_id);
  });
  std::unordered_set<ItemIndex> seen;
  for (const ImplicitRecord* r : order) {
    if (out.user_ids.empty() || out.user_ids.back() != r->user_id) {
      out.user_ids.push_back(r->user_id);
      out.sequences.push_back({out.user_ids.size() - 1, {}});
      seen.clear();
    }
    const ItemIndex item = out.vocabulary.index_of(r->item_id);
    if (seen.insert(item).second) out.sequences.back().items.push_back(item);
  }
  return out;
}

std::vector<UserSequence> filter_min_history(const std::vector<UserSequence>& sequences,
                                             std::size_t min_length) {
  std::vector<UserSequence> out;
  for (const auto& s : sequences) {
    if (s.items.size() >= min_length) out.push_back(s);
  }
  return out;
}

UserPartition split_users(const std::vector<UserSequence>& sequences, const SplitFractions& f,
                          std::uint64_t seed) {
  if (!(f.train > 0 && f.validation > 0 && f.test > 0) ||
      std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
    throw ContractError("split fractions must be positive and sum to 1");
  }
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double n = static_cast<double>(sequences.size());
  const auto n_val = static_cast<std::size_t>(std::floor(f.validation * n + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(f.test * n + 1e-9));
  const std::size_t n_train = sequences.size() - n_val - n_test;

  UserPartition out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const UserSequence& s = sequences[order[k]];
    if (k < n_train) {
      out.train.push_back(s);
    } else if (k < n_train + n_val) {
      out.validation.push_back(s);
    } else {
      out.test.push_back(s);
    }
  }
  auto by_user = [](const UserSequence& a, const UserSequence& b) { return a.user_index < b.user_index; };
  std::sort(out.train.begin(), out.train.end(), by_user);
  std::sort(out.validation.begin(), out.validation.end(), by_user);
  std::sort(out.test.begin(), out.test.end(), by_user);
  return out;
}

FoldSplit fold_split(const std::vector<ItemIndex>& sequence, double ratio) {
  const std::size_t len = sequence.size();
  if (len < 2) throw ContractError("fold_split needs at least 2 items, got " + std::to_string(len));
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("fold ratio must lie in (0, 1)");
  auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(len) + 1e-9));
  cut = std::clamp<std::size_t>(cut, 1, len - 1);
  FoldSplit out;
  out.fold_in.assign(sequence.begin(), sequence.begin() + static_cast<std::ptrdiff_t>(cut));
  out.fold_out.assign(sequence.begin() + static_cast<std::ptrdiff_t>(cut), sequence.end());
  return out;
}

std::vector<std::size_t> default_strata_edges(std::size_t max_length) {
  std::vector<std::size_t> edges{5};
  std::size_t width = 4;
  while (edges.back() <= max_length) {
    edges.push_back(edges.back() + width);
    width *= 2;
  }
  return edges;
}

std::vector<std::size_t> stratum_allocation(const std::vector<std::size_t>& sizes, std::size_t target) {
  const std::size_t population = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (target > population) {
    throw ContractError("subsample target " + std::to_string(target) + " exceeds population " +
                        std::to_string(population));
  }
  std::vector<std::size_t> alloc(sizes.size(), 0);
  std::vector<bool> open(sizes.size());
  for (std::size_t s = 0; s < sizes.size(); ++s) open[s] = sizes[s] > 0;
  std::size_t remaining = target;

  // Cap strata whose share would exceed their size, then redistribute.
  while (remaining > 0) {
    double weight_sum = 0.0;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      if (open[s]) weight_sum += 1.0 / static_cast<double>(sizes[s]);
    }
    bool capped = false;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      if (!open[s]) continue;
      const double share = static_cast<double>(remaining) / static_cast<double>(sizes[s]) / weight_sum;
      if (share >= static_cast<double>(sizes[s])) {
        alloc[s] = sizes[s];
        open[s] = false;
        capped = true;
      }
    }
    if (capped) {
      std::size_t used = 0;
      for (std::size_t s = 0; s < sizes.size(); ++s) {
        if (!open[s]) used += alloc[s];
      }
      remaining = target - used;
      continue;
    }
    // Largest remainder rounding among open strata.
    std::vector<std::pair<double, std::size_t>> fractional;
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      if (!open[s]) continue;
      const double share = static_cast<double>(remaining) / static_cast<double>(sizes[s]) / weight_sum;
      alloc[s] = static_cast<std::size_t>(std::floor(share));
      assigned += alloc[s];
      fractional.emplace_back(share - std::floor(share), s);
    }
    std::stable_sort(fractional.begin(), fractional.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < remaining; ++k) {
      const std::size_t s = fractional[k % fractional.size()].second;
      if (alloc[s] < sizes[s]) {
        ++alloc[s];
        ++assigned;
      }
    }
    break;
  }
  return alloc;
}

std::vector<UserSequence> stratified_subsample(const std::vector<UserSequence>& sequences,
                                               std::size_t target,
                                               const std::vector<std::size_t>& strata_edges,
                                               std::uint64_t seed) {
  if (target > sequences.size()) {
    throw ContractError("subsample target " + std::to_string(target) + " exceeds population " +
                        std::to_string(sequences.size()));
  }
  if (!std::is_sorted(strata_edges.begin(), strata_edges.end())) {
    throw ContractError("strata edges must be ascending");
  }
  // Stratum k holds lengths in [edges[k-1], edges[k]); stratum 0 is below edges[0].
  std::vector<std::vector<std::size_t>> members(strata_edges.size() + 1);
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const std::size_t len = sequences[i].items.size();
    const auto k = static_cast<std::size_t>(
        std::upper_bound(strata_edges.begin(), strata_edges.end(), len) - strata_edges.begin());
    members[k].push_back(i);
  }
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());
  const auto alloc = stratum_allocation(sizes, target);

  std::mt19937_64 rng(seed);
  std::vector<bool> keep(sequences.size(), false);
  for (std::size_t k = 0; k < members.size(); ++k) {
    auto pool = members[k];
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t j = 0; j < alloc[k]; ++j) keep[pool[j]] = true;
  }
  std::vector<UserSequence> out;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (keep[i]) out.push_back(sequences[i]);
  }
  return out;
}

std::vector<HeldOutUser> make_held_out(const std::vector<UserSequence>& sequences, double ratio) {
  std::vector<HeldOutUser> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.push_back({s, fold_split(s.items, ratio)});
  return out;
}

DatasetSplit prepare_split(const std::vector<InteractionRecord>& records, const PipelineConfig& config) {
  const auto implicit = binarize(records, config.binarize_threshold);
  if (implicit.empty()) throw ContractError("no interactions after binarization");
  SequenceSet set = build_sequences(implicit);
  auto sequences = filter_min_history(set.sequences, config.min_history);
  if (sequences.empty()) throw ContractError("no users left after the minimum-history filter");
  if (config.subsample_users > 0 && config.subsample_users < sequences.size()) {
    std::size_t longest = 0;
    for (const auto& s : sequences) longest = std::max(longest, s.items.size());
    const auto edges = config.strata_edges.empty() ? default_strata_edges(longest) : config.strata_edges;
    sequences = stratified_subsample(sequences, config.subsample_users, edges, config.seed);
  }
  auto parts = split_users(sequences, config.fractions, config.seed);
  DatasetSplit split;
  split.train = std::move(parts.train);
  split.validation = make_held_out(parts.validation, config.fold_ratio);
  split.test = make_held_out(parts.test, config.fold_ratio);
  split.vocabulary = std::move(set.vocabulary);
  split.fold_ratio = config.fold_ratio;
  return split;
}

DatasetStats compute_stats(const DatasetSplit& split) {
  DatasetStats st;
  st.items = split.catalog_size();
  st.train_users = split.train.size();
  st.validation_users = split.validation.size();
  st.test_users = split.test.size();
  st.users = st.train_users + st.validation_users + st.test_users;
  for (const auto& s : split.train) st.interactions += s.items.size();
  for (const auto& h : split.validation) st.interactions += h.sequence.items.size();
  for (const auto& h : split.test) st.interactions += h.sequence.items.size();
  st.average_length = st.users ? static_cast<double>(st.interactions) / static_cast<double>(st.users) : 0.0;
  return st;
}

void write_split(const std::filesystem::path& dir, const DatasetSplit& split,
                 const std::string& manifest_extra) {
  std::filesystem::create_directories(dir);
  std::vector<const UserSequence*> train;
  for (const auto& s : split.train) train.push_back(&s);
  std::vector<const UserSequence*> val;
  for (const auto& h : split.validation) val.push_back(&h.sequence);
  std::vector<const UserSequence*> test;
  for (const auto& h : split.test) test.push_back(&h.sequence);
  write_sequences(dir / "train.tsv", train);
  write_sequences(dir / "validation.tsv", val);
  write_sequences(dir / "test.tsv", test);
  {
    std::ofstream out(dir / "vocabulary.tsv", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "vocabulary.tsv").string());
    for (std::size_t i = 0; i < split.vocabulary.size(); ++i) {
      out << split.vocabulary.raw_id(i) << '\t' << i << '\n';
    }
  }
  nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(manifest_extra);
  if (!manifest.is_object()) throw ContractError("manifest extra must be a JSON object");
  const DatasetStats st = compute_stats(split);
  manifest["fold_ratio"] = split.fold_ratio;
  manifest["vocabulary_digest"] = split.vocabulary.digest();
  manifest["counts"] = {{"users", st.users},
                        {"items", st.items},
                        {"interactions", st.interactions},
                        {"train_users", st.train_users},
                        {"validation_users", st.validation_users},
                        {"test_users", st.test_users}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

DatasetSplit read_split(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw IoError("cannot read " + (dir / "manifest.json").string());
  const auto manifest = nlohmann::json::parse(mf, nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("fold_ratio")) {
    throw ConfigError("malformed split manifest in " + dir.string());
  }
  DatasetSplit split;
  split.fold_ratio = manifest["fold_ratio"].get<double>();

  std::ifstream vf(dir / "vocabulary.tsv", std::ios::binary);
  if (!vf) throw IoError("cannot read " + (dir / "vocabulary.tsv").string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(vf, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    std::size_t idx = 0;
    if (tab == std::string::npos || !parse_number(trim(std::string_view(line).substr(tab + 1)), idx)) {
      throw ParseError(lineno, "vocabulary.tsv: expected raw_id<TAB>index");
    }
    if (split.vocabulary.intern(line.substr(0, tab)) != idx) {
      throw ParseError(lineno, "vocabulary.tsv: indices must be dense and in order");
    }
  }
  if (manifest.contains("vocabulary_digest") &&
      manifest["vocabulary_digest"].get<std::string>() != split.vocabulary.digest()) {
    throw ConfigError("vocabulary digest mismatch in " + dir.string());
  }
  const std::size_t n = split.vocabulary.size();
  split.train = read_sequences(dir / "train.tsv", n);
  split.validation = make_held_out(read_sequences(dir / "validation.tsv", n), split.fold_ratio);
  split.test = make_held_out(read_sequences(dir / "test.tsv", n), split.fold_ratio);
  return split;
}

}  // namespace seqvae
