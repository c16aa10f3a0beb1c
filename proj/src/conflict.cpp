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

#include "mcdec/conflict.hpp"

#include <fstream>
#include <set>

#include "mcdec/error.hpp"
#include "mcdec/rng.hpp"

namespace mcdec {
namespace {

std::string span_text(const QaRecord& r) {
  const auto [start, end] = *r.answer_entity_span;
  return r.gold_context->substr(start, end - start);
}

}  // namespace

std::vector<std::string> self_entity_pool(const std::vector<QaRecord>& dataset) {
  std::vector<std::string> pool;
  pool.reserve(dataset.size());
  for (const auto& r : dataset) {
    if (r.gold_context && r.answer_entity_span) {
      pool.push_back(span_text(r));
    } else {
      pool.push_back(r.answers.front());
    }
  }
  return pool;
}

std::vector<std::string> load_entity_pool(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open entity pool " + path.string());
  std::vector<std::string> pool;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) pool.push_back(line);
  }
  return pool;
}

std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
  if (from.empty()) return std::string(text);
  std::string out;
  std::size_t pos = 0;
  for (auto hit = text.find(from); hit != std::string_view::npos; hit = text.find(from, pos)) {
    out.append(text.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (auto hit = text.find(needle); hit != std::string_view::npos; hit = text.find(needle, hit + needle.size())) {
    ++n;
  }
  return n;
}

ConflictSet generate_conflict_set(const std::vector<QaRecord>& dataset,
                                  const std::vector<std::string>& entity_pool, std::uint64_t seed) {
  std::vector<std::string> pool_norm;
  std::set<std::string> distinct;
  for (const auto& e : entity_pool) {
    pool_norm.push_back(normalize_answer(e));
    distinct.insert(pool_norm.back());
  }
  if (distinct.size() < 2) {
    throw Error(ErrorCode::kPoolTooSmall, "entity pool needs at least 2 distinct normalized entries, has " +
                                              std::to_string(distinct.size()));
  }

  ConflictSet out;
  for (std::size_t ordinal = 0; ordinal < dataset.size(); ++ordinal) {
    const auto& record = dataset[ordinal];
    if (!record.gold_context || !record.answer_entity_span) {
      ++out.ineligible;
      continue;
    }
    const std::string surface = span_text(record);
    std::set<std::string> excluded = {normalize_answer(surface)};
    for (const auto& a : record.answers) excluded.insert(normalize_answer(a));

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < entity_pool.size(); ++i) {
      if (!excluded.contains(pool_norm[i])) candidates.push_back(i);
    }
    if (candidates.empty()) {
      out.skipped.push_back({record.id, "PoolTooSmall: no substitute distinct from the original answer"});
      continue;
    }
    Rng rng(derive_seed(seed, ordinal));
    const std::string& substitute = entity_pool[candidates[rng.uniform_index(candidates.size())]];

    const std::string& context = *record.gold_context;
    if (context.find(substitute) != std::string::npos) {
      out.skipped.push_back({record.id, "substitute '" + substitute + "' already occurs in the context"});
      continue;
    }
    if (substitute.find(surface) != std::string::npos) {
      out.skipped.push_back({record.id, "substitute '" + substitute + "' contains the original entity"});
      continue;
    }
    std::string new_context = replace_all(context, surface, substitute);
    if (count_occurrences(new_context, surface) != 0) {
      out.skipped.push_back({record.id, "original entity still occurs after replacement"});
      continue;
    }
    if (replace_all(new_context, substitute, surface) != context) {
      out.skipped.push_back({record.id, "replacement does not round-trip"});
      continue;
    }

    // Occurrences left of the span shift it by the length difference each.
    const auto start = record.answer_entity_span->start;
    const auto before = count_occurrences(std::string_view(context).substr(0, start), surface);
    const auto new_start = start + before * substitute.size() - before * surface.size();
    SubstitutionRecord sub{record, surface, substitute, std::move(new_context),
                           AnswerSpan{new_start, new_start + substitute.size()}};
    if (sub.new_context.compare(new_start, substitute.size(), substitute) != 0) {
      out.skipped.push_back({record.id, "answer span overlaps another occurrence of the entity"});
      continue;
    }
    out.records.push_back(std::move(sub));
  }
  return out;
}

QaRecord as_qa_record(const SubstitutionRecord& r) {
  QaRecord q = r.base;
  q.answers = {r.substitute_entity};
  q.gold_context = r.new_context;
  q.answer_entity_span = r.new_span;
  return q;
}

nlohmann::json substitution_to_json(const SubstitutionRecord& r) {
  auto j = qa_record_to_json(as_qa_record(r));
  j["substitute_entity"] = r.substitute_entity;
  j["original_entity"] = r.original_entity;
  j["original_answers"] = r.base.answers;
  j["original_context"] = *r.base.gold_context;
  return j;
}

}  // namespace mcdec
