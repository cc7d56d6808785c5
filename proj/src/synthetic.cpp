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

#include "seqvae/synthetic.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>

#include "seqvae/errors.hpp"

namespace seqvae::synthetic {

std::vector<UserSequence> cyclic(std::size_t n_items, std::size_t n_users, std::size_t length, std::uint64_t seed) {
  if (n_items == 0 || length > n_items) throw ContractError("cyclic: length must not exceed the catalog");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> start(0, n_items - 1);
  std::vector<UserSequence> out(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    out[u].user_index = u;
    const std::size_t s = start(rng);
    for (std::size_t t = 0; t < length; ++t) out[u].items.push_back((s + t) % n_items);
  }
  return out;
}

std::vector<UserSequence> burst(std::size_t n_blocks, std::size_t n_users, std::size_t min_length,
                                std::size_t max_length, std::uint64_t seed) {
  const std::size_t n_items = 4 * n_blocks;
  if (n_blocks == 0 || min_length == 0 || min_length > max_length || max_length > n_items) {
    throw ContractError("burst: need 1 <= min_length <= max_length <= catalog size");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> start(0, n_blocks - 1);
  std::uniform_int_distribution<std::size_t> draw_length(min_length, max_length);
  std::vector<UserSequence> out(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    out[u].user_index = u;
    const std::size_t length = draw_length(rng);
    std::size_t block = start(rng);
    while (out[u].items.size() < length) {
      std::array<std::size_t, 4> items{};
      for (std::size_t j = 0; j < 4; ++j) items[j] = 4 * block + j;
      std::shuffle(items.begin() + 1, items.end(), rng);
      for (std::size_t j = 0; j < 4 && out[u].items.size() < length; ++j) out[u].items.push_back(items[j]);
      block = (block + 1) % n_blocks;
    }
  }
  return out;
}

std::vector<UserSequence> popularity(std::size_t n_items, std::size_t n_users, std::size_t length,
                                     std::uint64_t seed) {
  if (length == 0 || length > n_items) throw ContractError("popularity: bad length");
  std::mt19937_64 rng(seed);
  std::vector<UserSequence> out(n_users);
  std::vector<ItemIndex> others(n_items - 1);
  std::iota(others.begin(), others.end(), ItemIndex{1});
  for (std::size_t u = 0; u < n_users; ++u) {
    out[u].user_index = u;
    std::shuffle(others.begin(), others.end(), rng);
    out[u].items.assign(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(length - 1));
    out[u].items.push_back(0);
    std::shuffle(out[u].items.begin(), out[u].items.end(), rng);
  }
  return out;
}

DatasetSplit make_split(std::vector<UserSequence> sequences, std::size_t n_items, std::size_t n_train,
                        std::size_t n_validation, double fold_ratio) {
  if (n_train + n_validation > sequences.size()) throw ContractError("make_split: not enough sequences");
  DatasetSplit split;
  for (std::size_t i = 0; i < n_items; ++i) split.vocabulary.intern(std::to_string(i));
  split.fold_ratio = fold_ratio;
  const auto mid = sequences.begin() + static_cast<std::ptrdiff_t>(n_train);
  const auto val_end = mid + static_cast<std::ptrdiff_t>(n_validation);
  split.train.assign(sequences.begin(), mid);
  split.validation = make_held_out({mid, val_end}, fold_ratio);
  split.test = make_held_out({val_end, sequences.end()}, fold_ratio);
  return split;
}

std::vector<InteractionRecord> to_records(const std::vector<UserSequence>& sequences) {
  std::vector<InteractionRecord> out;
  for (const auto& s : sequences) {
    for (std::size_t t = 0; t < s.items.size(); ++t) {
      out.push_back({"u" + std::to_string(s.user_index), std::to_string(s.items[t]), 5.0,
                     static_cast<std::int64_t>(t)});
    }
  }
  return out;
}

}  // namespace seqvae::synthetic
