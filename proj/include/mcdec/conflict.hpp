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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdec/evaluation.hpp"

namespace mcdec {

struct SubstitutionRecord {
  QaRecord base;
  std::string original_entity;
  std::string substitute_entity;
  std::string new_context;
  /// Span of the substituted entity inside new_context.
  AnswerSpan new_span;
};

struct SkippedRecord {
  std::string id;
  std::string reason;
};

struct ConflictSet {
  std::vector<SubstitutionRecord> records;
  /// Eligible records that could not be substituted.
  std::vector<SkippedRecord> skipped;
  /// Records without a gold context or answer span.
  std::size_t ineligible = 0;
};

/// Every record's spanned entity surface, or its first answer when it has no
/// span. Duplicates are kept, so draws follow answer frequency.
std::vector<std::string> self_entity_pool(const std::vector<QaRecord>& dataset);

/// Newline-separated entity list; blank lines are ignored.
std::vector<std::string> load_entity_pool(const std::filesystem::path& path);

/// Replaces every case-sensitive occurrence of `from` in `text`, scanning left
/// to right without overlap.
std::string replace_all(std::string_view text, std::string_view from, std::string_view to);
std::size_t count_occurrences(std::string_view text, std::string_view needle);

/// For each record with a gold context and span, draws a substitute uniformly
/// from the pool entries that do not normalize to an original answer or to the
/// spanned surface, then replaces every occurrence of the surface. Records are
/// skipped with a reason when no candidate remains, when the substitute already
/// occurs in the context, or when it contains the original surface.
///
/// Throws PoolTooSmall when the pool has fewer than two distinct normalized
/// entries.
ConflictSet generate_conflict_set(const std::vector<QaRecord>& dataset,
                                  const std::vector<std::string>& entity_pool, std::uint64_t seed);

/// The record as evaluation input: answers = [substitute], gold_context =
/// new_context, answer_entity_span = new_span.
QaRecord as_qa_record(const SubstitutionRecord& r);

/// QaRecord JSON plus substitute_entity, original_entity, original_answers and
/// original_context.
nlohmann::json substitution_to_json(const SubstitutionRecord& r);

}  // namespace mcdec
