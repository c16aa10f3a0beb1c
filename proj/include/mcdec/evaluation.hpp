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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mcdec/context_selection.hpp"
#include "mcdec/decoding.hpp"
#include "mcdec/prompting.hpp"

namespace mcdec {

/// Byte offsets [start, end) into the gold context.
struct AnswerSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

struct QaRecord {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  std::optional<std::string> gold_context;
  std::optional<std::int64_t> entity_popularity;
  std::optional<AnswerSpan> answer_entity_span;
};

/// Parses and validates one record: non-empty answers, span inside the gold
/// context and normalizing to one of the answers. Unknown keys are ignored.
QaRecord qa_record_from_json(const nlohmann::json& j);
nlohmann::json qa_record_to_json(const QaRecord& r);
std::vector<QaRecord> load_dataset(const std::filesystem::path& path);

/// Lowercase, strip ASCII punctuation, drop the articles a/an/the, collapse
/// whitespace, trim.
std::string normalize_answer(std::string_view s);

/// The first gold answer equal to the prediction after normalization.
std::optional<std::string> matched_answer(std::string_view prediction,
                                          const std::vector<std::string>& answers);
bool exact_match(std::string_view prediction, const std::vector<std::string>& answers);

inline constexpr int kMaxPopularityBucket = 6;

/// floor(log10(views + 1)) clamped to [0, 6].
int popularity_bucket(std::int64_t views);
/// "10^k–10^{k+1}"
std::string popularity_bucket_label(int bucket);
inline constexpr std::string_view kUnknownBucket = "unknown";

/// Prediction string: generation cut at its first newline, then trimmed.
std::string extract_prediction(std::string_view generation);

struct PipelineConfig {
  std::vector<DecodeStrategy> strategies;
  IrrelevantStrategy irrelevant = IrrelevantStrategy::kMostDistant;
  std::size_t pool_size = kDefaultPoolSize;
  std::vector<FewShotExample> shots;
  PromptTemplates templates;
  DecodeLimits limits;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// Use a record's gold context as c+ when it has one.
  bool use_gold_context = true;
  /// Per-item trace files go under <trace_dir>/<strategy>/ when set.
  std::optional<std::filesystem::path> trace_dir;
  /// Embedded verbatim in every report.
  nlohmann::json resolved_config = nlohmann::json::object();
};

struct EvalResources {
  const LanguageModel* model = nullptr;
  std::shared_ptr<const Bm25Index> index;
  const Embedder* embedder = nullptr;
};

struct ItemResult {
  std::string id;
  std::string prediction;
  std::optional<std::string> matched_answer;
  std::optional<std::string> error;
  std::optional<std::string> traces_path;
  std::string bucket = std::string(kUnknownBucket);
  std::string relevant_id;
  std::string irrelevant_id;

  bool matched() const noexcept { return matched_answer.has_value(); }
};

struct BucketStat {
  double em = 0.0;
  std::size_t count = 0;
};

struct RunReport {
  DecodeStrategy strategy;
  std::string irrelevant_strategy;
  /// Absent for an empty dataset.
  std::optional<double> em;
  std::size_t errored = 0;
  std::map<std::string, BucketStat> per_bucket;
  std::vector<ItemResult> items;
  nlohmann::json config = nlohmann::json::object();
};

/// Decodes every record under every strategy. Per-item failures are recorded
/// in the item and scored as non-matches; records run concurrently on up to
/// `jobs` workers and reports list items in dataset order.
std::vector<RunReport> run_eval(const std::vector<QaRecord>& dataset, const PipelineConfig& config,
                                const EvalResources& resources);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// {"format": "mcdec-report", "format_version": 1, "reports": [...]}
nlohmann::json reports_to_json(const std::vector<RunReport>& reports);
std::vector<RunReport> reports_from_json(const nlohmann::json& j);

/// Sorted-key JSON, two-space indent, trailing newline.
std::string dump_reports(const std::vector<RunReport>& reports);

}  // namespace mcdec
