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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdec/evaluation.hpp"

namespace mcdec {

/// "scripted:<file>", "ngram:<config.json>" or "remote:<url>".
struct BackendSpec {
  BackendKind kind = BackendKind::kScripted;
  std::string target;

  static BackendSpec parse(std::string_view spec);
  std::string str() const;
};

std::unique_ptr<LanguageModel> make_backend(const BackendSpec& spec);

/// Everything a run needs. Paths are kept as given; relative paths in a
/// config file are resolved against the file's directory when loaded.
struct RunConfig {
  std::optional<BackendSpec> backend;
  std::optional<std::string> index;
  std::vector<std::string> strategies = {"ours-fixed"};
  std::optional<double> alpha;
  std::string irrelevant = "most-distant";
  std::size_t pool_size = kDefaultPoolSize;
  /// "tfidf" or "remote:<url>".
  std::string embedder = "tfidf";
  std::optional<std::string> shots;
  std::optional<std::string> dataset;
  std::uint64_t seed = 0;
  std::size_t max_new_tokens = DecodeLimits::kDefaultMaxNewTokens;
  std::vector<std::string> stop = {"\n"};
  bool use_gold_context = true;
  std::size_t jobs = 1;
  std::optional<std::string> out;
  std::optional<std::string> trace_dir;
  std::optional<std::string> closed_template;
  std::optional<std::string> open_template;

  /// Unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static RunConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// MCDEC_BACKEND_URL replaces the endpoint of a remote backend (or supplies
  /// one when no backend is set); MCDEC_EMBEDDER_URL replaces a remote
  /// embedder's endpoint.
  void apply_env();

  std::vector<DecodeStrategy> parsed_strategies() const;
  DecodeLimits limits() const;
  PromptTemplates templates() const;
};

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 2;
inline constexpr int kExitStrictErrors = 3;

/// Runs the command line; output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcdec
