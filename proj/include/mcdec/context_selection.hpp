// Copyright 2026 The mcdec Authors.
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

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcdec/retrieval.hpp"

namespace mcdec {

enum class IrrelevantStrategy { kRandom, kFixed, kFixedPermuted, kMostDistant };

/// CLI spellings: random, fixed, fixed-permuted, most-distant.
std::string_view irrelevant_strategy_name(IrrelevantStrategy s) noexcept;
IrrelevantStrategy parse_irrelevant_strategy(std::string_view name);

/// Whether the strategy draws c- from a retrieval pool.
constexpr bool uses_pool(IrrelevantStrategy s) noexcept {
  return s == IrrelevantStrategy::kRandom || s == IrrelevantStrategy::kMostDistant;
}

enum class RelevantSource { kGold, kRetrieved };

struct ContextPair {
  Passage relevant;
  Passage irrelevant;
  RelevantSource relevant_source = RelevantSource::kRetrieved;
  IrrelevantStrategy strategy = IrrelevantStrategy::kFixed;
  std::optional<std::uint64_t> seed;
};

inline constexpr int kFixedPassageVersion = 1;
inline constexpr std::size_t kDefaultPoolSize = 100;

/// The hand-written uninformative passage (asset data/irrelevant/fixed_v1.txt).
std::string_view fixed_irrelevant_text() noexcept;
Passage fixed_irrelevant_passage();
/// The fixed passage with its whitespace-separated words shuffled.
Passage permuted_irrelevant_passage(std::uint64_t seed);

/// Gold passage when given, else the rank-1 retrieval. Throws NoRetrievalHit.
Passage select_relevant(std::string_view question, const Bm25Index* index,
                        const std::optional<Passage>& gold);

/// Top `pool_size` retrievals for the question minus the rank-1 hit. A
/// question without indexable terms yields an empty pool.
std::vector<Passage> irrelevant_pool(const Bm25Index& index, std::string_view question,
                                     std::size_t pool_size = kDefaultPoolSize);

/// Picks c-. Pool strategies skip any pool entry sharing c+'s id; random draws
/// uniformly with `seed`; most-distant maximizes cosine distance to c+ with
/// ties going to the smaller passage id. Fixed strategies read neither the
/// pool nor the embedder.
///
/// Throws EmptyPool, or EmbedderUnavailable when most-distant has no
/// embedder or the embedder cannot be reached.
Passage select_irrelevant(IrrelevantStrategy strategy, const Passage& c_plus,
                          std::span<const Passage> pool, const Embedder* embedder,
                          std::uint64_t seed);

}  // namespace mcdec
