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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcdec {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

/// Raw next-token scores, one per vocabulary entry.
using LogitVector = std::vector<double>;

struct VocabInfo {
  std::int64_t size = 0;
  TokenId eos_id = 0;
  std::optional<TokenId> pad_id;

  bool operator==(const VocabInfo&) const = default;
};

enum class BackendKind { kScripted, kNgram, kRemote };

std::string_view backend_kind_name(BackendKind kind) noexcept;

struct BackendDescriptor {
  BackendKind kind = BackendKind::kScripted;
  VocabInfo vocab;
  std::string identity;
};

inline constexpr std::size_t kUnboundedContext =
    std::numeric_limits<std::size_t>::max();

/// Uniform access to a language model's tokenizer and next-token logits.
///
/// Implementations must allow concurrent calls to the const query methods
/// from several threads.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const BackendDescriptor& descriptor() const noexcept = 0;
  const VocabInfo& vocab() const noexcept { return descriptor().vocab; }

  /// Longest prefix accepted by next_logits.
  virtual std::size_t max_context() const noexcept { return kUnboundedContext; }

  virtual TokenSequence tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const TokenId> tokens) const = 0;

  virtual LogitVector next_logits(std::span<const TokenId> prefix) const = 0;

  /// Logits for `prompt ++ generated`. Encoder-decoder backends override this
  /// to keep the two parts apart.
  virtual LogitVector next_logits(std::span<const TokenId> prompt,
                                  std::span<const TokenId> generated) const;

 protected:
  /// Throws InvalidArgument for ids outside the vocabulary and PrefixTooLong
  /// when the prefix exceeds max_context().
  void check_prefix(std::span<const TokenId> prefix) const;
};

/// Throws VocabMismatch when the two vocabularies differ.
void require_same_vocab(const VocabInfo& a, const VocabInfo& b);

}  // namespace mcdec
