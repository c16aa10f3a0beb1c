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

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcdec/language_model.hpp"

namespace mcdec {

enum class TokenUnit { kChar, kWord };

struct NgramConfig {
  int order = 3;
  TokenUnit unit = TokenUnit::kWord;
  /// Weight of n-gram counts taken from the query prefix itself (count
  /// merging). Zero gives a plain add-one n-gram model.
  double prompt_cache_weight = 0.0;
};

/// Add-one smoothed n-gram model used as a deterministic stand-in for a
/// model's parametric memory.
///
/// Vocabulary: ids 0..3 are <unk>, <eos>, <bos> and "\n"; the remaining ids
/// are the distinct training tokens in byte order. Every training document is
/// left-padded with order-1 <bos> tokens and terminated by <eos>; prefixes are
/// padded the same way at query time.
///
/// P(w | h) = (c(h,w) + beta * c_prefix(h,w) + 1) / (c(h) + beta * c_prefix(h) + |V|)
///
/// Logits are the natural log of P.
class NgramBackend final : public LanguageModel {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kNewline = 3;

  static NgramBackend train(const std::vector<std::string>& documents, NgramConfig config);

  /// One document per non-empty line of `text`.
  static NgramBackend train_text(std::string_view text, NgramConfig config);

  /// JSON file: {"corpus": "<path relative to this file>", "order": 3,
  /// "unit": "word"|"char", "prompt_cache_weight": 0.0}
  static NgramBackend from_config_file(const std::filesystem::path& path);

  const BackendDescriptor& descriptor() const noexcept override { return descriptor_; }

  TokenSequence tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;
  LogitVector next_logits(std::span<const TokenId> prefix) const override;
  using LanguageModel::next_logits;

  const NgramConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  TokenId token_id(std::string_view token) const;

  /// Training count of `history` followed by `next`.
  std::int64_t count(std::span<const TokenId> history, TokenId next) const;

 private:
  struct HistoryHash {
    std::size_t operator()(const TokenSequence& h) const noexcept;
  };
  struct Continuations {
    std::int64_t total = 0;
    std::unordered_map<TokenId, std::int64_t> next;
  };

  NgramBackend() = default;
  std::vector<std::string> split(std::string_view text) const;

  NgramConfig config_;
  BackendDescriptor descriptor_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::unordered_map<TokenSequence, Continuations, HistoryHash> counts_;
};

std::string_view token_unit_name(TokenUnit unit) noexcept;
TokenUnit parse_token_unit(std::string_view name);

}  // namespace mcdec
