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

#include "mcdec/error.hpp"

namespace mcdec {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kRemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::kPrefixTooLong: return "PrefixTooLong";
    case ErrorCode::kVocabMismatch: return "VocabMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kStrategyBranchMissing: return "StrategyBranchMissing";
    case ErrorCode::kDuplicatePassageId: return "DuplicatePassageId";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoRetrievalHit: return "NoRetrievalHit";
    case ErrorCode::kEmptyPool: return "EmptyPool";
    case ErrorCode::kEmbedderUnavailable: return "EmbedderUnavailable";
    case ErrorCode::kMissingContext: return "MissingContext";
    case ErrorCode::kPoolTooSmall: return "PoolTooSmall";
    case ErrorCode::kDatasetMismatch: return "DatasetMismatch";
  }
  return "Unknown";
}

}  // namespace mcdec
