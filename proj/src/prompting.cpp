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

#include "mcdec/prompting.hpp"

#include "mcdec/error.hpp"
#include "mcdec/jsonl.hpp"

namespace mcdec {
namespace {

constexpr std::string_view kQuestionSlot = "<question>";
constexpr std::string_view kContextSlot = "<context>";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string fill(const PromptTemplate& tmpl, std::string_view question,
                 const std::optional<std::string>& context) {
  std::string out = tmpl.text;
  const bool has_slot = out.find(kContextSlot) != std::string::npos;
  if (tmpl.mode == PromptMode::kOpen) {
    if (!context) throw Error(ErrorCode::kMissingContext, "open-book prompt needs a context");
    if (!has_slot) throw Error(ErrorCode::kInvalidArgument, "open template lacks <context>");
    // Context first so a question containing "<context>" is left alone.
    replace_all(out, kContextSlot, *context);
  } else if (has_slot) {
    throw Error(ErrorCode::kInvalidArgument, "closed template must not contain <context>");
  }
  const auto q = out.find(kQuestionSlot);
  if (q == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "template lacks <question>");
  out.replace(q, kQuestionSlot.size(), question);
  return out;
}

}  // namespace

PromptTemplate PromptTemplate::default_closed() {
  return {PromptMode::kClosed, "Answer the following question. Question: <question> Answer:"};
}

PromptTemplate PromptTemplate::default_open() {
  return {PromptMode::kOpen,
          "Answer the question based on the context below. Context: <context> Question: "
          "<question> Answer:"};
}

std::string render_prompt(PromptMode mode, std::string_view question,
                          const std::optional<std::string>& context,
                          const std::vector<FewShotExample>& shots,
                          const PromptTemplates& templates) {
  const auto& tmpl = templates.for_mode(mode);
  const bool open = mode == PromptMode::kOpen;
  std::string out;
  for (const auto& shot : shots) {
    if (open && !shot.context) {
      throw Error(ErrorCode::kMissingContext, "open-book demonstration lacks a context");
    }
    out += fill(tmpl, shot.question, open ? shot.context : std::nullopt);
    out += ' ';
    out += shot.answer;
    out += "\n\n";
  }
  out += fill(tmpl, question, open ? context : std::nullopt);
  out += ' ';
  return out;
}

std::vector<FewShotExample> load_shots(const std::filesystem::path& path) {
  std::vector<FewShotExample> shots;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      FewShotExample shot{j.at("question").get<std::string>(), j.at("answer").get<std::string>(),
                          std::nullopt};
      if (j.contains("context") && !j["context"].is_null()) shot.context = j["context"].get<std::string>();
      shots.push_back(std::move(shot));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return shots;
}

std::string_view prompt_mode_name(PromptMode mode) noexcept {
  return mode == PromptMode::kClosed ? "closed" : "open";
}

}  // namespace mcdec
