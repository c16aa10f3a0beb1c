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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "mcdec/conflict.hpp"
#include "mcdec/error.hpp"
#include "support.hpp"

using namespace mcdec;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected mcdec::Error");
  return ErrorCode::kInvalidArgument;
}

QaRecord paris_record() {
  const std::string context = "Paris is the capital of France.";
  return {"fr", "What is the capital of France?", {"Paris"}, context, 1000, AnswerSpan{0, 5}};
}

void check_substitution(const SubstitutionRecord& r) {
  const auto& original = *r.base.gold_context;
  CHECK(count_occurrences(r.new_context, r.original_entity) == 0);
  CHECK(count_occurrences(r.new_context, r.substitute_entity) == count_occurrences(original, r.original_entity));
  CHECK(replace_all(r.new_context, r.substitute_entity, r.original_entity) == original);
  CHECK(r.new_context.substr(r.new_span.start, r.new_span.end - r.new_span.start) == r.substitute_entity);
  CHECK_FALSE(exact_match(r.substitute_entity, r.base.answers));
  const auto as_record = qa_record_from_json(substitution_to_json(r));
  CHECK(as_record.answers == std::vector<std::string>{r.substitute_entity});
  CHECK(as_record.gold_context == r.new_context);
}

}  // namespace

TEST_CASE("replacement helpers") {
  CHECK(replace_all("aaa", "aa", "b") == "ba");
  CHECK(replace_all("x Paris y Paris", "Paris", "Lyon") == "x Lyon y Lyon");
  CHECK(replace_all("paris", "Paris", "Lyon") == "paris");
  CHECK(count_occurrences("aaaa", "aa") == 2);
  CHECK(count_occurrences("abc", "") == 0);
}

TEST_CASE("single-entity substitution") {
  const std::vector<std::string> pool{"Paris", "Lyon"};
  const auto set = generate_conflict_set({paris_record()}, pool, 0);
  REQUIRE(set.records.size() == 1);
  const auto& r = set.records[0];
  CHECK(r.substitute_entity == "Lyon");
  CHECK(r.new_context == "Lyon is the capital of France.");
  CHECK(r.new_span.start == 0);
  CHECK(r.new_span.end == 4);
  const auto q = as_qa_record(r);
  CHECK(q.answers == std::vector<std::string>{"Lyon"});
  CHECK(q.gold_context == r.new_context);
  CHECK(q.entity_popularity == 1000);
  check_substitution(r);
}

TEST_CASE("every occurrence is replaced and the span follows") {
  QaRecord rec{"fr2", "q", {"Paris"}, std::string("Paris is in France. The capital is Paris."), std::nullopt,
               AnswerSpan{35, 40}};
  const auto set = generate_conflict_set({rec}, {"Marseille", "Lyon", "Paris"}, 3);
  REQUIRE(set.records.size() == 1);
  const auto& r = set.records[0];
  CHECK(count_occurrences(r.new_context, r.substitute_entity) == 2);
  CHECK(r.new_span.start == 35 + r.substitute_entity.size() - 5);
  check_substitution(r);
}

TEST_CASE("pools without a usable substitute") {
  CHECK(code_of([] { generate_conflict_set({paris_record()}, {"Paris"}, 0); }) == ErrorCode::kPoolTooSmall);
  CHECK(code_of([] { generate_conflict_set({paris_record()}, {"Paris", "paris.", "The Paris"}, 0); }) ==
        ErrorCode::kPoolTooSmall);
  CHECK(code_of([] { generate_conflict_set({paris_record()}, {}, 0); }) == ErrorCode::kPoolTooSmall);
  const auto set = generate_conflict_set({paris_record()}, {"Paris", "paris", "Nice"}, 0);
  CHECK(set.records.size() == 1);

  QaRecord multi = paris_record();
  multi.answers = {"Paris", "Lyon"};
  const auto skipped = generate_conflict_set({multi}, {"Paris", "Lyon"}, 0);
  CHECK(skipped.records.empty());
  REQUIRE(skipped.skipped.size() == 1);
  CHECK(skipped.skipped[0].reason.starts_with("PoolTooSmall"));
}

TEST_CASE("unsafe substitutes are skipped with a reason") {
  QaRecord already{"a", "q", {"Paris"}, std::string("Paris and Lyon."), std::nullopt, AnswerSpan{0, 5}};
  auto set = generate_conflict_set({already}, {"Paris", "Lyon"}, 0);
  REQUIRE(set.skipped.size() == 1);
  CHECK(set.skipped[0].reason.find("already occurs") != std::string::npos);

  set = generate_conflict_set({paris_record()}, {"Paris", "Paris Hilton"}, 0);
  REQUIRE(set.skipped.size() == 1);
  CHECK(set.skipped[0].reason.find("contains the original") != std::string::npos);

  QaRecord no_span{"n", "q", {"Paris"}, std::string("Paris."), std::nullopt, std::nullopt};
  QaRecord no_ctx{"m", "q", {"Paris"}, std::nullopt, std::nullopt, std::nullopt};
  set = generate_conflict_set({no_span, no_ctx, paris_record()}, {"Paris", "Lyon"}, 0);
  CHECK(set.ineligible == 2);
  CHECK(set.records.size() == 1);
}

TEST_CASE("random datasets: zero residuals and exact round trips") {
  std::mt19937_64 gen(11);
  const auto dataset = testing::random_entity_dataset(gen, 200);
  const auto pool = self_entity_pool(dataset);
  CHECK(pool.size() == dataset.size());
  const auto set = generate_conflict_set(dataset, pool, 5);
  CHECK(set.records.size() + set.skipped.size() == dataset.size());
  CHECK(set.records.size() >= 180);
  for (const auto& r : set.records) check_substitution(r);

  const auto again = generate_conflict_set(dataset, pool, 5);
  REQUIRE(again.records.size() == set.records.size());
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    CHECK(substitution_to_json(again.records[i]) == substitution_to_json(set.records[i]));
  }
  const auto other = generate_conflict_set(dataset, pool, 6);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < std::min(other.records.size(), set.records.size()); ++i) {
    differing += other.records[i].substitute_entity != set.records[i].substitute_entity ? 1 : 0;
  }
  CHECK(differing > 0);
}

TEST_CASE("entity pool file") {
  const auto dir = testing::temp_dir("entity_pool");
  std::ofstream(dir / "pool.txt") << "Lyon\n\nNice\r\nMarseille";
  CHECK(load_entity_pool(dir / "pool.txt") == std::vector<std::string>{"Lyon", "Nice", "Marseille"});
}

TEST_CASE("a context-following decoder adopts the substitute") {
  std::mt19937_64 gen(12);
  auto dataset = testing::random_entity_dataset(gen, 30);
  std::map<std::string, std::string> memory;
  for (auto& r : dataset) {
    // Contexts in "Answer: X." form let the reader locate the entity.
    const auto& entity = r.answers[0];
    *r.gold_context += " Answer: " + entity + ".";
    memory[r.question] = entity;
  }
  const auto set = generate_conflict_set(dataset, self_entity_pool(dataset), 1);
  std::vector<QaRecord> conflict;
  for (const auto& r : set.records) conflict.push_back(as_qa_record(r));
  REQUIRE(conflict.size() >= 25);

  testing::ContextReader reader(memory);
  PipelineConfig config;
  config.strategies = {DecodeStrategy::regular_closed(), DecodeStrategy::contrastive_fixed()};
  config.irrelevant = IrrelevantStrategy::kFixed;
  config.limits.max_new_tokens = 40;
  const auto reports = run_eval(conflict, config, {&reader, nullptr, nullptr});
  CHECK(reports[0].em == 0.0);
  CHECK(reports[1].em == 1.0);
  for (std::size_t i = 0; i < conflict.size(); ++i) {
    CHECK(reports[0].items[i].prediction == set.records[i].original_entity);
    CHECK(reports[1].items[i].prediction == set.records[i].substitute_entity);
  }
}
