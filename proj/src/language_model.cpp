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

#include "mcdec/language_model.hpp"

#include "mcdec/error.hpp"

namespace mcdec {

std::string_view backend_kind_name(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::kScripted: return "scripted";
    case BackendKind::kNgram: return "ngram";
    case BackendKind::kRemote: return "remote";
  }
  return "unknown";
}

LogitVector LanguageModel::next_logits(
    std::span<const TokenId> prompt, std::span<const TokenId> generated) const {
  if (generated.empty()) return next_logits(prompt);
  TokenSequence prefix;
  prefix.reserve(prompt.size() + generated.size());
  prefix.insert(prefix.end(), prompt.begin(), prompt.end());
  prefix.insert(prefix.end(), generated.begin(), generated.end());
  return next_logits(prefix);
}

void LanguageModel::check_prefix(std::span<const TokenId> prefix) const {
  const auto size = vocab().size;
  for (TokenId id : prefix) {
    if (id < 0 || id >= size) {
      throw Error(ErrorCode::kInvalidArgument,
                  "token id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(size));
    }
  }
  if (prefix.size() > max_context()) {
    throw Error(ErrorCode::kPrefixTooLong,
                "prefix of " + std::to_string(prefix.size()) +
                    " tokens exceeds maximum context " + std::to_string(max_context()));
  }
}

void require_same_vocab(const VocabInfo& a, const VocabInfo& b) {
  if (a.size != b.size || a.eos_id != b.eos_id) {
    throw Error(ErrorCode::kVocabMismatch,
                "vocabulary mismatch: size " + std::to_string(a.size) + "/eos " +
                    std::to_string(a.eos_id) + " vs size " + std::to_string(b.size) +
                    "/eos " + std::to_string(b.eos_id));
  }
}

}  // namespace mcdec
