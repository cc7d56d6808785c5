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
#include <vector>

#include "seqvae/data.hpp"

namespace seqvae::synthetic {

/// Walks i -> i+1 mod n_items of the given length from a uniform random start.
std::vector<UserSequence> cyclic(std::size_t n_items, std::size_t n_users, std::size_t length, std::uint64_t seed);

/// Items come in blocks of four. Each sequence walks blocks b -> b+1 (mod the
/// block count) from a random start block. A block is emitted as its leading
/// item 4b followed by 4b+1..4b+3 in random order, so the leading item implies
/// the next three without fixing their order. Lengths are uniform in
/// [min_length, max_length].
std::vector<UserSequence> burst(std::size_t n_blocks, std::size_t n_users, std::size_t min_length,
                                std::size_t max_length, std::uint64_t seed);

/// Every user consumes item 0 plus `length - 1` other distinct items drawn
/// uniformly, in random order.
std::vector<UserSequence> popularity(std::size_t n_items, std::size_t n_users, std::size_t length,
                                     std::uint64_t seed);

/// Assigns the first n_train sequences to training, the next n_validation to
/// validation and the rest to test. Raw item ids are the decimal indices.
DatasetSplit make_split(std::vector<UserSequence> sequences, std::size_t n_items, std::size_t n_train,
                        std::size_t n_validation, double fold_ratio = 0.8);

/// Explicit-rating records (rating 5, timestamp = position) reproducing the
/// sequences; user ids are "u<index>", item ids the decimal indices.
std::vector<InteractionRecord> to_records(const std::vector<UserSequence>& sequences);

}  // namespace seqvae::synthetic
