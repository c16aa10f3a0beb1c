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

#include "mcdec/evaluation.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <thread>

#include "mcdec/error.hpp"
#include "mcdec/jsonl.hpp"
#include "mcdec/rng.hpp"
#include "mcdec/trace_io.hpp"

namespace mcdec {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return std::string(error_code_name(err->code())) + ": " + err->what();
  }
  return std::string("Internal: ") + e.what();
}

std::string safe_file_name(std::string_view id) {
  std::string out;
  for (char c : id) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_' || c == '.' ? c : '_');
  }
  return out.empty() ? std::string("item") : out;
}

struct PreparedItem {
  BranchPrompts prompts;
  std::string relevant_id;
  std::string irrelevant_id;
  std::optional<std::string> relevant_error;
  std::optional<std::string> irrelevant_error;
};

PreparedItem prepare(const QaRecord& record, std::uint64_t seed, const PipelineConfig& config,
                     const EvalResources& res) {
  bool need_relevant = false;
  bool need_irrelevant = false;
  bool need_parametric = false;
  for (const auto& s : config.strategies) {
    need_parametric |= s.needs_parametric();
    need_relevant |= s.needs_relevant();
    need_irrelevant |= s.needs_irrelevant();
  }

  PreparedItem item;
  const auto& model = *res.model;
  if (need_parametric) {
    item.prompts.parametric =
        model.tokenize(render_prompt(PromptMode::kClosed, record.question, std::nullopt, config.shots,
                                     config.templates));
  }
  if (!need_relevant) return item;

  std::optional<Passage> gold;
  if (config.use_gold_context && record.gold_context) {
    gold = Passage{"gold:" + record.id, "", *record.gold_context};
  }
  std::optional<Passage> c_plus;
  try {
    c_plus = select_relevant(record.question, res.index.get(), gold);
    item.relevant_id = c_plus->id;
    item.prompts.relevant = model.tokenize(
        render_prompt(PromptMode::kOpen, record.question, c_plus->text, config.shots, config.templates));
  } catch (const std::exception& e) {
    item.relevant_error = describe(e);
    item.irrelevant_error = item.relevant_error;
    return item;
  }

  if (need_irrelevant) {
    try {
      std::vector<Passage> pool;
      if (uses_pool(config.irrelevant)) {
        if (!res.index) throw Error(ErrorCode::kEmptyPool, "irrelevant-context pool needs an index");
        pool = irrelevant_pool(*res.index, record.question, config.pool_size);
      }
      const Passage c_minus = select_irrelevant(config.irrelevant, *c_plus, pool, res.embedder, seed);
      item.irrelevant_id = c_minus.id;
      item.prompts.irrelevant = model.tokenize(render_prompt(
          PromptMode::kOpen, record.question, c_minus.text, config.shots, config.templates));
    } catch (const std::exception& e) {
      item.irrelevant_error = describe(e);
    }
  }
  return item;
}

nlohmann::json strategy_json(const DecodeStrategy& s) {
  nlohmann::json j = {{"name", strategy_name(s.kind)}, {"alpha_mode", s.alpha_mode()}};
  j["alpha"] = s.alpha_mode() == "fixed" ? nlohmann::json(s.alpha) : nlohmann::json(nullptr);
  return j;
}

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

QaRecord qa_record_from_json(const nlohmann::json& j) {
  QaRecord r;
  try {
    r.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
    r.question = j.at("question").get<std::string>();
    r.answers = j.at("answers").get<std::vector<std::string>>();
    if (j.contains("gold_context") && !j["gold_context"].is_null()) {
      r.gold_context = j["gold_context"].get<std::string>();
    }
    if (j.contains("entity_popularity") && !j["entity_popularity"].is_null()) {
      r.entity_popularity = j["entity_popularity"].get<std::int64_t>();
    }
    if (j.contains("answer_entity_span") && !j["answer_entity_span"].is_null()) {
      const auto& s = j["answer_entity_span"];
      r.answer_entity_span = s.is_array()
                                 ? AnswerSpan{s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()}
                                 : AnswerSpan{s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad QA record: ") + e.what());
  }
  if (r.answers.empty()) throw Error(ErrorCode::kParseError, "QA record '" + r.id + "' has no answers");
  if (r.entity_popularity && *r.entity_popularity < 0) {
    throw Error(ErrorCode::kParseError, "QA record '" + r.id + "' has negative popularity");
  }
  if (r.answer_entity_span) {
    const auto [start, end] = *r.answer_entity_span;
    if (!r.gold_context || start >= end || end > r.gold_context->size()) {
      throw Error(ErrorCode::kParseError, "QA record '" + r.id + "' has a span outside its gold context");
    }
    if (!matched_answer(r.gold_context->substr(start, end - start), r.answers)) {
      throw Error(ErrorCode::kParseError, "QA record '" + r.id + "' span text is not one of its answers");
    }
  }
  return r;
}

nlohmann::json qa_record_to_json(const QaRecord& r) {
  nlohmann::json j = {{"id", r.id}, {"question", r.question}, {"answers", r.answers}};
  if (r.gold_context) j["gold_context"] = *r.gold_context;
  if (r.entity_popularity) j["entity_popularity"] = *r.entity_popularity;
  if (r.answer_entity_span) {
    j["answer_entity_span"] = {r.answer_entity_span->start, r.answer_entity_span->end};
  }
  return j;
}

std::vector<QaRecord> load_dataset(const std::filesystem::path& path) {
  std::vector<QaRecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back(qa_record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

std::string normalize_answer(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u) != 0) continue;
    cleaned.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  std::string out;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && is_space(cleaned[i])) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !is_space(cleaned[j])) ++j;
    if (j > i) {
      std::string_view word(cleaned.data() + i, j - i);
      if (word != "a" && word != "an" && word != "the") {
        if (!out.empty()) out.push_back(' ');
        out += word;
      }
    }
    i = j;
  }
  return out;
}

std::optional<std::string> matched_answer(std::string_view prediction,
                                          const std::vector<std::string>& answers) {
  const auto norm = normalize_answer(prediction);
  for (const auto& a : answers) {
    if (normalize_answer(a) == norm) return a;
  }
  return std::nullopt;
}

bool exact_match(std::string_view prediction, const std::vector<std::string>& answers) {
  return matched_answer(prediction, answers).has_value();
}

int popularity_bucket(std::int64_t views) {
  if (views < 0) throw Error(ErrorCode::kInvalidArgument, "popularity must be non-negative");
  int digits = 0;
  for (auto v = static_cast<std::uint64_t>(views) + 1; v >= 10; v /= 10) ++digits;
  return std::min(digits, kMaxPopularityBucket);
}

std::string popularity_bucket_label(int bucket) {
  return "10^" + std::to_string(bucket) + "–10^" + std::to_string(bucket + 1);
}

std::string extract_prediction(std::string_view generation) {
  return trim(generation.substr(0, generation.find('\n')));
}

std::vector<RunReport> run_eval(const std::vector<QaRecord>& dataset, const PipelineConfig& config,
                                const EvalResources& resources) {
  if (resources.model == nullptr) throw Error(ErrorCode::kInvalidArgument, "run_eval needs a model");
  const auto n_items = dataset.size();
  const auto n_strategies = config.strategies.size();
  // results[s][i]
  std::vector<std::vector<ItemResult>> results(n_strategies, std::vector<ItemResult>(n_items));

  auto process = [&](std::size_t i) {
    const auto& record = dataset[i];
    const auto seed = derive_seed(config.seed, i);
    const std::string bucket = record.entity_popularity
                                   ? popularity_bucket_label(popularity_bucket(*record.entity_popularity))
                                   : std::string(kUnknownBucket);
    std::optional<PreparedItem> prepared;
    std::optional<std::string> prepare_error;
    try {
      prepared = prepare(record, seed, config, resources);
    } catch (const std::exception& e) {
      prepare_error = describe(e);
    }
    for (std::size_t s = 0; s < n_strategies; ++s) {
      auto& item = results[s][i];
      item.id = record.id;
      item.bucket = bucket;
      const auto& strategy = config.strategies[s];
      auto branch_error = prepare_error;
      if (!branch_error && strategy.needs_irrelevant()) branch_error = prepared->irrelevant_error;
      if (!branch_error && strategy.needs_relevant()) branch_error = prepared->relevant_error;
      if (branch_error) {
        item.error = branch_error;
        continue;
      }
      item.relevant_id = config.strategies[s].needs_relevant() ? prepared->relevant_id : "";
      item.irrelevant_id = config.strategies[s].needs_irrelevant() ? prepared->irrelevant_id : "";
      try {
        const auto result = decode(config.strategies[s], prepared->prompts, *resources.model, config.limits);
        item.prediction = extract_prediction(result.text);
        item.matched_answer = matched_answer(item.prediction, record.answers);
        if (config.trace_dir) {
          const auto rel = std::filesystem::path(std::string(strategy_name(config.strategies[s].kind))) /
                           (std::to_string(i) + "_" + safe_file_name(record.id) + ".jsonl");
          const auto path = *config.trace_dir / rel;
          std::filesystem::create_directories(path.parent_path());
          std::ofstream out(path, std::ios::binary | std::ios::trunc);
          if (!out) throw Error(ErrorCode::kIoError, "cannot write trace " + path.string());
          write_trace_jsonl(out, trace_header(config.strategies[s], resources.model->descriptor(), prepared->prompts),
                            result.traces);
          item.traces_path = rel.generic_string();
        }
      } catch (const std::exception& e) {
        item.error = describe(e);
        item.prediction.clear();
        item.matched_answer.reset();
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.jobs, n_items));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_items; ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_items; i = next++) process(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  nlohmann::json pipeline = {
      {"irrelevant", irrelevant_strategy_name(config.irrelevant)},
      {"pool", "top-" + std::to_string(config.pool_size) + " BM25 minus rank 1"},
      {"seed", config.seed},
      {"max_new_tokens", config.limits.max_new_tokens},
      {"stop_strings", config.limits.stop_strings},
      {"shots", config.shots.size()},
      {"use_gold_context", config.use_gold_context},
      {"prediction_rule", "cut at first newline, trim"},
      {"closed_template", config.templates.closed.text},
      {"open_template", config.templates.open.text},
  };

  std::vector<RunReport> reports;
  for (std::size_t s = 0; s < n_strategies; ++s) {
    RunReport report;
    report.strategy = config.strategies[s];
    report.irrelevant_strategy = config.strategies[s].needs_irrelevant()
                                     ? std::string(irrelevant_strategy_name(config.irrelevant))
                                     : std::string();
    report.items = std::move(results[s]);
    report.config = {{"resolved", config.resolved_config}, {"pipeline", pipeline}};
    std::size_t matched = 0;
    std::map<std::string, std::size_t> bucket_matched;
    for (const auto& item : report.items) {
      if (item.error) ++report.errored;
      if (item.matched()) {
        ++matched;
        ++bucket_matched[item.bucket];
      }
      ++report.per_bucket[item.bucket].count;
    }
    if (!report.items.empty()) {
      report.em = static_cast<double>(matched) / static_cast<double>(report.items.size());
    }
    for (auto& [label, stat] : report.per_bucket) {
      stat.em = static_cast<double>(bucket_matched[label]) / static_cast<double>(stat.count);
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json buckets = nlohmann::json::object();
  for (const auto& [label, stat] : report.per_bucket) buckets[label] = {{"em", stat.em}, {"count", stat.count}};
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : report.items) {
    items.push_back({{"id", item.id},
                     {"prediction", item.prediction},
                     {"matched_answer", opt(item.matched_answer)},
                     {"error", opt(item.error)},
                     {"traces_path", opt(item.traces_path)},
                     {"bucket", item.bucket},
                     {"relevant_id", item.relevant_id},
                     {"irrelevant_id", item.irrelevant_id}});
  }
  return {{"strategy", strategy_json(report.strategy)},
          {"irrelevant_strategy", report.irrelevant_strategy},
          {"em", opt(report.em)},
          {"no_items", report.items.empty()},
          {"count", report.items.size()},
          {"errored", report.errored},
          {"per_bucket_em", std::move(buckets)},
          {"items", std::move(items)},
          {"config", report.config}};
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  try {
    const auto& s = j.at("strategy");
    const auto alpha = s.at("alpha").is_null() ? std::nullopt : std::optional<double>(s["alpha"].get<double>());
    r.strategy = parse_strategy(s.at("name").get<std::string>(), alpha);
    r.irrelevant_strategy = j.value("irrelevant_strategy", std::string());
    if (!j.at("em").is_null()) r.em = j["em"].get<double>();
    r.errored = j.value("errored", std::size_t{0});
    for (const auto& [label, stat] : j.at("per_bucket_em").items()) {
      r.per_bucket[label] = {stat.at("em").get<double>(), stat.at("count").get<std::size_t>()};
    }
    for (const auto& it : j.at("items")) {
      ItemResult item;
      item.id = it.at("id").get<std::string>();
      item.prediction = it.at("prediction").get<std::string>();
      if (!it.at("matched_answer").is_null()) item.matched_answer = it["matched_answer"].get<std::string>();
      if (it.contains("error") && !it["error"].is_null()) item.error = it["error"].get<std::string>();
      if (it.contains("traces_path") && !it["traces_path"].is_null()) {
        item.traces_path = it["traces_path"].get<std::string>();
      }
      item.bucket = it.value("bucket", std::string(kUnknownBucket));
      item.relevant_id = it.value("relevant_id", std::string());
      item.irrelevant_id = it.value("irrelevant_id", std::string());
      r.items.push_back(std::move(item));
    }
    r.config = j.value("config", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad run report: ") + e.what());
  }
  return r;
}

nlohmann::json reports_to_json(const std::vector<RunReport>& reports) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : reports) list.push_back(report_to_json(r));
  return {{"format", "mcdec-report"}, {"format_version", 1}, {"reports", std::move(list)}};
}

std::vector<RunReport> reports_from_json(const nlohmann::json& j) {
  std::vector<RunReport> out;
  try {
    if (j.value("format", std::string()) != "mcdec-report") {
      throw Error(ErrorCode::kParseError, "not an mcdec report file");
    }
    for (const auto& r : j.at("reports")) out.push_back(report_from_json(r));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad report file: ") + e.what());
  }
  return out;
}

std::string dump_reports(const std::vector<RunReport>& reports) {
  return reports_to_json(reports).dump(2) + "\n";
}

}  // namespace mcdec
