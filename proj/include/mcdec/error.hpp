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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcdec {

/// Error categories surfaced by every module. The CLI prints the category
/// name alongside the message.
enum class ErrorCode {
  kInvalidArgument,
  kParseError,
  kIoError,
  // lm_backend
  kRemoteUnavailable,
  kPrefixTooLong,
  kVocabMismatch,
  // decoding
  kLengthMismatch,
  kStrategyBranchMissing,
  // retrieval
  kDuplicatePassageId,
  kEmptyCorpus,
  kEmptyQuery,
  kDimensionMismatch,
  // context selection
  kNoRetrievalHit,
  kEmptyPool,
  kEmbedderUnavailable,
  // prompting
  kMissingContext,
  // conflict generation
  kPoolTooSmall,
  // cli
  kDatasetMismatch,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mcdec
