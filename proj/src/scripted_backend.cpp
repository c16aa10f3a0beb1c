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

#include "mcdec/scripted_backend.hpp"

#include <cmath>
#include <fstream>

#include "mcdec/error.hpp"

namespace mcdec {
namespace {

void validate_logits(const LogitVector& logits, std::int64_t vocab_size,
                     const std::string& where) {
  if (static_cast<std::int64_t>(logits.size()) != vocab_size) {
    throw Error(ErrorCode::kInvalidArgument,
                where + ": expected " + std::to_string(vocab_size) + " logits, got " +
                    std::to_string(logits.size()));
  }
  for (double v : logits) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, where + ": non-finite logit");
    }
  }
}

TokenSequence parse_key(const std::string& key) {
  try {
    return nlohmann::json::parse(key).get<TokenSequence>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "bad scripted prefix key '" + key + "': " + e.what());
  }
}

}  // namespace

ScriptedDefinition ScriptedDefinition::from_json(const nlohmann::json& j) {
  ScriptedDefinition def;
  try {
    def.vocab_size = j.at("vocab_size").get<std::int64_t>();
    def.eos_id = j.at("eos_id").get<TokenId>();
    if (j.contains("pad_id") && !j["pad_id"].is_null()) def.pad_id = j["pad_id"].get<TokenId>();
    if (j.contains("tokens")) def.tokens = j["tokens"].get<std::vector<std::string>>();
    if (j.contains("match")) {
      const auto m = j["match"].get<std::string>();
      if (m == "suffix") {
        def.match = ScriptMatch::kSuffix;
      } else if (m == "prefix") {
        def.match = ScriptMatch::kPrefix;
      } else {
        throw Error(ErrorCode::kParseError, "unknown scripted match mode '" + m + "'");
      }
    }
    if (j.contains("max_context") && !j["max_context"].is_null()) {
      def.max_context = j["max_context"].get<std::size_t>();
    }
    if (j.contains("logits")) {
      for (const auto& [key, value] : j["logits"].items()) {
        def.table.emplace(parse_key(key), value.get<LogitVector>());
      }
    }
    if (j.contains("default") && !j["default"].is_null()) {
      def.fallback = j["default"].get<LogitVector>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("scripted definition: ") + e.what());
  }
  return def;
}

nlohmann::json ScriptedDefinition::to_json() const {
  nlohmann::json j;
  j["vocab_size"] = vocab_size;
  j["eos_id"] = eos_id;
  if (pad_id) j["pad_id"] = *pad_id;
  if (!tokens.empty()) j["tokens"] = tokens;
  j["match"] = match == ScriptMatch::kSuffix ? "suffix" : "prefix";
  if (max_context != kUnboundedContext) j["max_context"] = max_context;
  nlohmann::json table_json = nlohmann::json::object();
  for (const auto& [key, logits] : table) table_json[nlohmann::json(key).dump()] = logits;
  j["logits"] = std::move(table_json);
  if (fallback) j["default"] = *fallback;
  return j;
}

ScriptedDefinition ScriptedDefinition::char_level(std::string_view alphabet) {
  ScriptedDefinition def;
  for (char c : alphabet) def.tokens.emplace_back(1, c);
  def.tokens.emplace_back("<eos>");
  def.vocab_size = static_cast<std::int64_t>(def.tokens.size());
  def.eos_id = static_cast<TokenId>(def.tokens.size() - 1);
  return def;
}

ScriptedDefinition ScriptedDefinition::printable_ascii() {
  std::string alphabet = "\n";
  for (char c = 0x20; c < 0x7f; ++c) alphabet.push_back(c);
  return char_level(alphabet);
}

ScriptedBackend::ScriptedBackend(ScriptedDefinition definition, std::string identity)
    : definition_(std::move(definition)) {
  if (definition_.vocab_size <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "scripted vocab_size must be positive");
  }
  if (definition_.eos_id < 0 || definition_.eos_id >= definition_.vocab_size) {
    throw Error(ErrorCode::kInvalidArgument, "scripted eos_id outside vocabulary");
  }
  if (!definition_.tokens.empty() &&
      static_cast<std::int64_t>(definition_.tokens.size()) != definition_.vocab_size) {
    throw Error(ErrorCode::kInvalidArgument, "scripted tokens must list every vocabulary entry");
  }
  for (const auto& [key, logits] : definition_.table) {
    for (TokenId id : key) {
      if (id < 0 || id >= definition_.vocab_size) {
        throw Error(ErrorCode::kInvalidArgument, "scripted key holds out-of-range id");
      }
    }
    validate_logits(logits, definition_.vocab_size, "scripted entry " + nlohmann::json(key).dump());
  }
  if (definition_.fallback) {
    validate_logits(*definition_.fallback, definition_.vocab_size, "scripted default");
  }
  for (std::size_t i = 0; i < definition_.tokens.size(); ++i) {
    const auto& tok = definition_.tokens[i];
    if (tok.empty() || static_cast<TokenId>(i) == definition_.eos_id) continue;
    token_ids_.emplace(tok, static_cast<TokenId>(i));
    longest_token_ = std::max(longest_token_, tok.size());
  }
  descriptor_.kind = BackendKind::kScripted;
  descriptor_.vocab = {definition_.vocab_size, definition_.eos_id, definition_.pad_id};
  descriptor_.identity = std::move(identity);
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scripted definition " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return ScriptedBackend(ScriptedDefinition::from_json(j), "scripted:" + path.filename().string());
}

TokenSequence ScriptedBackend::tokenize(std::string_view text) const {
  TokenSequence ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool matched = false;
    for (std::size_t len = std::min(longest_token_, text.size() - pos); len > 0; --len) {
      auto it = token_ids_.find(std::string(text.substr(pos, len)));
      if (it != token_ids_.end()) {
        ids.push_back(it->second);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scripted backend cannot tokenize text at byte " + std::to_string(pos));
    }
  }
  return ids;
}

std::string ScriptedBackend::detokenize(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId id : tokens) {
    if (id < 0 || id >= definition_.vocab_size) {
      throw Error(ErrorCode::kInvalidArgument, "token id outside vocabulary");
    }
    if (id == definition_.eos_id) continue;
    if (definition_.tokens.empty()) {
      out += "<" + std::to_string(id) + ">";
    } else {
      out += definition_.tokens[static_cast<std::size_t>(id)];
    }
  }
  return out;
}

const LogitVector* ScriptedBackend::lookup(std::span<const TokenId> prefix) const {
  const auto& table = definition_.table;
  for (std::size_t len = prefix.size() + 1; len-- > 0;) {
    auto part = definition_.match == ScriptMatch::kSuffix
                    ? prefix.subspan(prefix.size() - len)
                    : prefix.first(len);
    auto it = table.find(TokenSequence(part.begin(), part.end()));
    if (it != table.end()) return &it->second;
  }
  return definition_.fallback ? &*definition_.fallback : nullptr;
}

LogitVector ScriptedBackend::next_logits(std::span<const TokenId> prefix) const {
  check_prefix(prefix);
  const LogitVector* found = lookup(prefix);
  if (found == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "scripted backend has no entry for prefix of length " +
                    std::to_string(prefix.size()));
  }
  return *found;
}

}  // namespace mcdec
