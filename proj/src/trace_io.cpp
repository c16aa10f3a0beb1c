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

#include "mcdec/trace_io.hpp"

#include "mcdec/error.hpp"
#include "mcdec/hashing.hpp"

namespace mcdec {

nlohmann::json step_trace_to_json(const StepTrace& trace) {
  nlohmann::json top = nlohmann::json::array();
  for (const auto& [token, prob] : trace.top5_combined) top.push_back({token, prob});
  return {{"step_index", trace.step_index},
          {"alpha_used", trace.alpha_used},
          {"confidence_parametric", trace.confidence_parametric},
          {"confidence_relevant", trace.confidence_relevant},
          {"chosen_token", trace.chosen_token},
          {"top5_combined", std::move(top)}};
}

StepTrace step_trace_from_json(const nlohmann::json& j) {
  StepTrace t;
  try {
    t.step_index = j.at("step_index").get<int>();
    t.alpha_used = j.at("alpha_used").get<double>();
    t.confidence_parametric = j.at("confidence_parametric").get<double>();
    t.confidence_relevant = j.at("confidence_relevant").get<double>();
    t.chosen_token = j.at("chosen_token").get<TokenId>();
    for (const auto& pair : j.at("top5_combined")) {
      t.top5_combined.emplace_back(pair.at(0).get<TokenId>(), pair.at(1).get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad trace line: ") + e.what());
  }
  return t;
}

nlohmann::json trace_header(const DecodeStrategy& strategy, const BackendDescriptor& backend,
                            const BranchPrompts& prompts) {
  auto hash = [](const std::optional<TokenSequence>& p) -> nlohmann::json {
    if (!p) return nullptr;
    return hex64(fnv1a_tokens(*p));
  };
  nlohmann::json header = {
      {"strategy", strategy_name(strategy.kind)},
      {"alpha_mode", strategy.alpha_mode()},
      {"backend", backend.identity},
      {"prompt_hashes",
       {{"parametric", hash(prompts.parametric)},
        {"relevant", hash(prompts.relevant)},
        {"irrelevant", hash(prompts.irrelevant)}}},
  };
  if (strategy.alpha_mode() == "fixed") {
    header["alpha"] = strategy.alpha;
  } else {
    header["alpha"] = nullptr;
  }
  return header;
}

void write_trace_jsonl(std::ostream& out, const nlohmann::json& header,
                       const std::vector<StepTrace>& traces) {
  out << header.dump() << '\n';
  for (const auto& t : traces) out << step_trace_to_json(t).dump() << '\n';
}

}  // namespace mcdec
