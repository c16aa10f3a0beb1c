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

#include <ostream>
#include <string>

#include <json.hpp>

#include "mcdec/decoding.hpp"

namespace mcdec {

nlohmann::json step_trace_to_json(const StepTrace& trace);
StepTrace step_trace_from_json(const nlohmann::json& j);

/// Header line of a trace file: strategy, alpha mode, backend identity, and
/// an FNV-1a hash of each branch prompt's token ids (null for absent
/// branches).
nlohmann::json trace_header(const DecodeStrategy& strategy, const BackendDescriptor& backend,
                            const BranchPrompts& prompts);

/// Header line followed by one StepTrace object per line.
void write_trace_jsonl(std::ostream& out, const nlohmann::json& header,
                       const std::vector<StepTrace>& traces);

}  // namespace mcdec
