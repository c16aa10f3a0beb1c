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

#include "mcdec/error.hpp"
#include "mcdec/prompting.hpp"
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

std::size_t occurrences(const std::string& s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

std::vector<FewShotExample> five_shots() {
  std::vector<FewShotExample> shots;
  for (int i = 0; i < 5; ++i) {
    shots.push_back({"Question " + std::to_string(i) + "?", "answer" + std::to_string(i),
                     "Context " + std::to_string(i) + "."});
  }
  return shots;
}

}  // namespace

TEST_CASE("zero-shot prompts") {
  CHECK(render_prompt(PromptMode::kClosed, "What is the capital of France?", std::nullopt, {}) ==
        "Answer the following question. Question: What is the capital of France? Answer: ");
  CHECK(render_prompt(PromptMode::kOpen, "What is the capital of France?",
                      std::string("Paris is the capital of France."), {}) ==
        "Answer the question based on the context below. Context: Paris is the capital of France. "
        "Question: What is the capital of France? Answer: ");
  CHECK(render_prompt(PromptMode::kClosed, "q", std::string("ignored"), {}) ==
        "Answer the following question. Question: q Answer: ");
}

TEST_CASE("few-shot prompts") {
  const auto shots = five_shots();
  for (auto mode : {PromptMode::kClosed, PromptMode::kOpen}) {
    const auto p = render_prompt(mode, "Target?", std::string("Target context."), shots);
    CHECK(occurrences(p, "Answer:") == 6);
    CHECK(p.ends_with("Question: Target? Answer: "));
    CHECK(p.back() == ' ');
    CHECK(p.find("answer0\n\n") != std::string::npos);
    CHECK(p.find("answer4\n\n") != std::string::npos);
    CHECK(p == render_prompt(mode, "Target?", std::string("Target context."), shots));
  }
  const auto closed = render_prompt(PromptMode::kClosed, "Target?", std::nullopt, shots);
  CHECK(closed.find("Context") == std::string::npos);
  CHECK(closed.starts_with("Answer the following question. Question: Question 0? Answer: answer0\n\n"));
  const auto open = render_prompt(PromptMode::kOpen, "Target?", std::string("Target context."), shots);
  CHECK(occurrences(open, "Context: ") == 6);
}

TEST_CASE("missing contexts in open mode") {
  CHECK(code_of([] { render_prompt(PromptMode::kOpen, "q", std::nullopt, {}); }) == ErrorCode::kMissingContext);
  auto shots = five_shots();
  shots[2].context.reset();
  CHECK(code_of([&] { render_prompt(PromptMode::kOpen, "q", std::string("c"), shots); }) ==
        ErrorCode::kMissingContext);
  CHECK_NOTHROW(render_prompt(PromptMode::kClosed, "q", std::nullopt, shots));
}

TEST_CASE("custom templates") {
  PromptTemplates t;
  t.closed.text = "Q: <question> Answer:";
  t.open.text = "C: <context> Q: <question> Answer:";
  CHECK(render_prompt(PromptMode::kClosed, "x", std::nullopt, {}, t) == "Q: x Answer: ");
  CHECK(render_prompt(PromptMode::kOpen, "<context>?", std::string("ctx"), {}, t) ==
        "C: ctx Q: <context>? Answer: ");
  t.closed.text = "C: <context> Q: <question> Answer:";
  CHECK(code_of([&] { render_prompt(PromptMode::kClosed, "x", std::nullopt, {}, t); }) ==
        ErrorCode::kInvalidArgument);
  t.open.text = "Q: <question> Answer:";
  CHECK(code_of([&] { render_prompt(PromptMode::kOpen, "x", std::string("c"), {}, t); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("shot files") {
  const auto shots = load_shots(testing::data_dir() / "synthetic" / "shots.jsonl");
  CHECK(shots.size() == 5);
  for (const auto& s : shots) CHECK(s.context.has_value());
  const auto dir = testing::temp_dir("shots");
  std::ofstream(dir / "bad.jsonl") << R"({"question": "q"})" << "\n";
  CHECK(code_of([&] { load_shots(dir / "bad.jsonl"); }) == ErrorCode::kParseError);
  CHECK(prompt_mode_name(PromptMode::kOpen) == "open");
}
