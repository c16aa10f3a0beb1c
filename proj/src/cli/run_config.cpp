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

#include <cstdlib>
#include <set>

#include "mcdec/cli.hpp"
#include "mcdec/error.hpp"
#include "mcdec/jsonl.hpp"
#include "mcdec/ngram_backend.hpp"
#include "mcdec/remote_backend.hpp"
#include "mcdec/scripted_backend.hpp"

namespace mcdec {
namespace {

using nlohmann::json;

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string rebase(const std::string& path, const std::filesystem::path& base_dir) {
  const std::filesystem::path p(path);
  if (base_dir.empty() || p.is_absolute()) return path;
  return (base_dir / p).lexically_normal().string();
}

std::optional<std::string> opt_path(const json& j, const char* key, const std::filesystem::path& base_dir) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return rebase(j[key].get<std::string>(), base_dir);
}

}  // namespace

BackendSpec BackendSpec::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos || colon + 1 == spec.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "backend spec '" + std::string(spec) + "' must be scripted:<file>, ngram:<config> or remote:<url>");
  }
  const auto kind = spec.substr(0, colon);
  BackendSpec out;
  out.target = std::string(spec.substr(colon + 1));
  if (kind == "scripted") {
    out.kind = BackendKind::kScripted;
  } else if (kind == "ngram") {
    out.kind = BackendKind::kNgram;
  } else if (kind == "remote") {
    out.kind = BackendKind::kRemote;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown backend kind '" + std::string(kind) + "'");
  }
  return out;
}

std::string BackendSpec::str() const {
  switch (kind) {
    case BackendKind::kScripted: return "scripted:" + target;
    case BackendKind::kNgram: return "ngram:" + target;
    case BackendKind::kRemote: return "remote:" + target;
  }
  return target;
}

std::unique_ptr<LanguageModel> make_backend(const BackendSpec& spec) {
  switch (spec.kind) {
    case BackendKind::kScripted:
      return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(spec.target));
    case BackendKind::kNgram:
      return std::make_unique<NgramBackend>(NgramBackend::from_config_file(spec.target));
    case BackendKind::kRemote:
      return std::make_unique<RemoteBackend>(spec.target);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown backend kind");
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {
      "backend", "index", "strategies", "alpha", "irrelevant", "pool_size", "embedder", "shots",
      "dataset", "seed", "max_new_tokens", "stop", "use_gold_context", "jobs", "out", "trace_dir",
      "closed_template", "open_template"};
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::kParseError, "unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    if (j.contains("backend") && !j["backend"].is_null()) {
      c.backend = BackendSpec::parse(j["backend"].get<std::string>());
      if (c.backend->kind != BackendKind::kRemote) c.backend->target = rebase(c.backend->target, base_dir);
    }
    c.index = opt_path(j, "index", base_dir);
    c.shots = opt_path(j, "shots", base_dir);
    c.dataset = opt_path(j, "dataset", base_dir);
    c.out = opt_path(j, "out", base_dir);
    c.trace_dir = opt_path(j, "trace_dir", base_dir);
    if (j.contains("strategies")) c.strategies = j["strategies"].get<std::vector<std::string>>();
    if (j.contains("alpha") && !j["alpha"].is_null()) c.alpha = j["alpha"].get<double>();
    c.irrelevant = j.value("irrelevant", c.irrelevant);
    c.pool_size = j.value("pool_size", c.pool_size);
    c.embedder = j.value("embedder", c.embedder);
    c.seed = j.value("seed", c.seed);
    c.max_new_tokens = j.value("max_new_tokens", c.max_new_tokens);
    if (j.contains("stop")) c.stop = j["stop"].get<std::vector<std::string>>();
    c.use_gold_context = j.value("use_gold_context", c.use_gold_context);
    c.jobs = j.value("jobs", c.jobs);
    if (j.contains("closed_template") && !j["closed_template"].is_null()) {
      c.closed_template = j["closed_template"].get<std::string>();
    }
    if (j.contains("open_template") && !j["open_template"].is_null()) {
      c.open_template = j["open_template"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bad config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

json RunConfig::to_json() const {
  return {{"backend", backend ? json(backend->str()) : json(nullptr)},
          {"index", opt(index)},
          {"strategies", strategies},
          {"alpha", opt(alpha)},
          {"irrelevant", irrelevant},
          {"pool_size", pool_size},
          {"embedder", embedder},
          {"shots", opt(shots)},
          {"dataset", opt(dataset)},
          {"seed", seed},
          {"max_new_tokens", max_new_tokens},
          {"stop", stop},
          {"use_gold_context", use_gold_context},
          {"jobs", jobs},
          {"out", opt(out)},
          {"trace_dir", opt(trace_dir)},
          {"closed_template", opt(closed_template)},
          {"open_template", opt(open_template)}};
}

void RunConfig::apply_env() {
  if (const char* url = std::getenv("MCDEC_BACKEND_URL"); url != nullptr && *url != '\0') {
    if (!backend || backend->kind == BackendKind::kRemote) backend = BackendSpec{BackendKind::kRemote, url};
  }
  if (const char* url = std::getenv("MCDEC_EMBEDDER_URL"); url != nullptr && *url != '\0') {
    if (embedder.rfind("remote:", 0) == 0) embedder = std::string("remote:") + url;
  }
}

std::vector<DecodeStrategy> RunConfig::parsed_strategies() const {
  if (strategies.empty()) throw Error(ErrorCode::kInvalidArgument, "no strategies given");
  std::vector<DecodeStrategy> out;
  for (const auto& name : strategies) out.push_back(parse_strategy(name, alpha));
  return out;
}

DecodeLimits RunConfig::limits() const {
  DecodeLimits l;
  l.max_new_tokens = max_new_tokens;
  l.stop_strings = stop;
  return l;
}

PromptTemplates RunConfig::templates() const {
  PromptTemplates t;
  if (closed_template) t.closed.text = *closed_template;
  if (open_template) t.open.text = *open_template;
  return t;
}

}  // namespace mcdec
