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
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mcdec/language_model.hpp"

namespace mcdec {

/// How a scripted table is consulted when the exact prefix has no entry.
enum class ScriptMatch {
  kSuffix,  // longest key that is a suffix of the prefix
  kPrefix,  // longest key that is a prefix of the prefix
};

/// A table-driven backend definition.
///
/// File form (JSON):
///
///     {"vocab_size": 3, "eos_id": 2,
///      "tokens": ["A", "B", "<eos>"],        // optional token strings
///      "match": "suffix",                     // or "prefix"
///      "max_context": 128,                    // optional
///      "logits": {"[]": [1.0, 0.0, -1.0], "[0,1]": [...]},
///      "default": [0.0, 0.0, 0.0]}            // optional
struct ScriptedDefinition {
  std::int64_t vocab_size = 0;
  TokenId eos_id = 0;
  std::optional<TokenId> pad_id;
  std::vector<std::string> tokens;
  ScriptMatch match = ScriptMatch::kSuffix;
  std::size_t max_context = kUnboundedContext;
  std::map<TokenSequence, LogitVector> table;
  std::optional<LogitVector> fallback;

  static ScriptedDefinition from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Character-level vocabulary: one token per byte of `alphabet`, plus an
  /// end-of-sequence token appended last.
  static ScriptedDefinition char_level(std::string_view alphabet);

  /// Printable ASCII plus newline, with EOS last.
  static ScriptedDefinition printable_ascii();
};

class ScriptedBackend final : public LanguageModel {
 public:
  explicit ScriptedBackend(ScriptedDefinition definition,
                           std::string identity = "scripted");

  static ScriptedBackend from_file(const std::filesystem::path& path);

  const BackendDescriptor& descriptor() const noexcept override { return descriptor_; }
  std::size_t max_context() const noexcept override { return definition_.max_context; }

  TokenSequence tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;
  LogitVector next_logits(std::span<const TokenId> prefix) const override;
  using LanguageModel::next_logits;

  const ScriptedDefinition& definition() const noexcept { return definition_; }

 private:
  const LogitVector* lookup(std::span<const TokenId> prefix) const;

  ScriptedDefinition definition_;
  BackendDescriptor descriptor_;
  std::unordered_map<std::string, TokenId> token_ids_;
  std::size_t longest_token_ = 0;
};

}  // namespace mcdec
