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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcdec {

enum class PromptMode { kClosed, kOpen };

/// Template text with <question> and (open mode) <context> placeholders.
/// Templates end at "Answer:"; rendering appends one space.
struct PromptTemplate {
  PromptMode mode = PromptMode::kClosed;
  std::string text;

  static PromptTemplate default_closed();
  static PromptTemplate default_open();
};

struct PromptTemplates {
  PromptTemplate closed = PromptTemplate::default_closed();
  PromptTemplate open = PromptTemplate::default_open();

  const PromptTemplate& for_mode(PromptMode mode) const {
    return mode == PromptMode::kClosed ? closed : open;
  }
};

struct FewShotExample {
  std::string question;
  std::string answer;
  std::optional<std::string> context;
};

/// Each demonstration is the filled template, a space, its answer and a
/// blank line; the target question follows and the prompt ends with
/// "Answer: ". Closed mode ignores demonstration contexts. Throws
/// MissingContext when open mode lacks the target or a demonstration context,
/// and InvalidArgument when a closed template would need one.
std::string render_prompt(PromptMode mode, std::string_view question,
                          const std::optional<std::string>& context,
                          const std::vector<FewShotExample>& shots,
                          const PromptTemplates& templates = {});

/// JSONL of {"question", "answer"[, "context"]}.
std::vector<FewShotExample> load_shots(const std::filesystem::path& path);

std::string_view prompt_mode_name(PromptMode mode) noexcept;

}  // namespace mcdec
