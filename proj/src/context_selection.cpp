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

#include "mcdec/context_selection.hpp"

#include <algorithm>
#include <sstream>
#include <string>

#include "mcdec/error.hpp"
#include "mcdec/rng.hpp"

namespace mcdec {
namespace {

constexpr std::string_view kFixedText =
    "It was a pleasant weather day, with seasonally average temperatures."
    " The local legislative and academic governing bodies held routine meetings regarding budgets and policies."
    " Students focused on their studies while athletes practiced for upcoming competitions."
    " Residents tended to their jobs and daily tasks around their neighborhood."
    " Nothing particularly eventful occurred in the community."
    " It was an ordinary midweek day."
    " The weather was typical for the time of year without any extreme events."
    " Overall it was an average day in the community with people pursuing their regular daily activities.";

std::vector<Passage> without_id(std::span<const Passage> pool, const std::string& id) {
  std::vector<Passage> out;
  for (const auto& p : pool) {
    if (p.id != id) out.push_back(p);
  }
  return out;
}

}  // namespace

std::string_view irrelevant_strategy_name(IrrelevantStrategy s) noexcept {
  switch (s) {
    case IrrelevantStrategy::kRandom: return "random";
    case IrrelevantStrategy::kFixed: return "fixed";
    case IrrelevantStrategy::kFixedPermuted: return "fixed-permuted";
    case IrrelevantStrategy::kMostDistant: return "most-distant";
  }
  return "unknown";
}

IrrelevantStrategy parse_irrelevant_strategy(std::string_view name) {
  if (name == "random") return IrrelevantStrategy::kRandom;
  if (name == "fixed") return IrrelevantStrategy::kFixed;
  if (name == "fixed-permuted" || name == "fixed_permuted") return IrrelevantStrategy::kFixedPermuted;
  if (name == "most-distant" || name == "most_distant") return IrrelevantStrategy::kMostDistant;
  throw Error(ErrorCode::kInvalidArgument, "unknown irrelevant-context strategy '" + std::string(name) + "'");
}

std::string_view fixed_irrelevant_text() noexcept { return kFixedText; }

Passage fixed_irrelevant_passage() {
  return {"fixed:v" + std::to_string(kFixedPassageVersion), "", std::string(kFixedText)};
}

Passage permuted_irrelevant_passage(std::uint64_t seed) {
  std::vector<std::string> words;
  std::istringstream in{std::string(kFixedText)};
  for (std::string w; in >> w;) words.push_back(std::move(w));
  Rng rng(seed);
  rng.shuffle(std::span(words));
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text.push_back(' ');
    text += w;
  }
  return {"fixed-permuted:v" + std::to_string(kFixedPassageVersion) + ":" + std::to_string(seed), "",
          std::move(text)};
}

Passage select_relevant(std::string_view question, const Bm25Index* index,
                        const std::optional<Passage>& gold) {
  if (gold) return *gold;
  if (index != nullptr) {
    try {
      auto hits = index->search(question, 1);
      if (!hits.empty()) return std::move(hits.front().passage);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyQuery) throw;
    }
  }
  throw Error(ErrorCode::kNoRetrievalHit, "no passage retrieved for question and no gold context");
}

std::vector<Passage> irrelevant_pool(const Bm25Index& index, std::string_view question,
                                     std::size_t pool_size) {
  std::vector<ScoredPassage> hits;
  try {
    hits = index.search(question, pool_size);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyQuery) throw;
  }
  std::vector<Passage> pool;
  for (std::size_t i = 1; i < hits.size(); ++i) pool.push_back(std::move(hits[i].passage));
  return pool;
}

Passage select_irrelevant(IrrelevantStrategy strategy, const Passage& c_plus,
                          std::span<const Passage> pool, const Embedder* embedder,
                          std::uint64_t seed) {
  switch (strategy) {
    case IrrelevantStrategy::kFixed:
      return fixed_irrelevant_passage();
    case IrrelevantStrategy::kFixedPermuted:
      return permuted_irrelevant_passage(seed);
    case IrrelevantStrategy::kRandom: {
      const auto candidates = without_id(pool, c_plus.id);
      if (candidates.empty()) throw Error(ErrorCode::kEmptyPool, "no candidate irrelevant passages");
      Rng rng(seed);
      return candidates[static_cast<std::size_t>(rng.uniform_index(candidates.size()))];
    }
    case IrrelevantStrategy::kMostDistant: {
      const auto candidates = without_id(pool, c_plus.id);
      if (candidates.empty()) throw Error(ErrorCode::kEmptyPool, "no candidate irrelevant passages");
      if (embedder == nullptr) throw Error(ErrorCode::kEmbedderUnavailable, "most-distant needs an embedder");
      std::vector<std::string> texts{c_plus.text};
      for (const auto& p : candidates) texts.push_back(p.text);
      std::vector<EmbeddingVector> vectors;
      try {
        vectors = embedder->embed_batch(texts);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kRemoteUnavailable) {
          throw Error(ErrorCode::kEmbedderUnavailable, e.what());
        }
        throw;
      }
      std::size_t best = 0;
      double best_distance = -1.0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double d = cosine_distance(vectors[i + 1], vectors[0]);
        if (d > best_distance || (d == best_distance && candidates[i].id < candidates[best].id)) {
          best = i;
          best_distance = d;
        }
      }
      return candidates[best];
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown irrelevant-context strategy");
}

}  // namespace mcdec
