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

#include "mcdec/remote_backend.hpp"

#include <cmath>

#include <httplib.h>

namespace mcdec {

HttpPool::HttpPool(std::string base_url, double timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

HttpPool::~HttpPool() = default;

std::unique_ptr<httplib::Client> HttpPool::acquire() const {
  {
    std::lock_guard lock(mutex_);
    if (!idle_.empty()) {
      auto client = std::move(idle_.back());
      idle_.pop_back();
      return client;
    }
  }
  auto client = std::make_unique<httplib::Client>(base_url_);
  const auto timeout = std::chrono::duration<double>(timeout_seconds_);
  client->set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client->set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client->set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client->set_keep_alive(true);
  client->set_tcp_nodelay(true);
  return client;
}

void HttpPool::release(std::unique_ptr<httplib::Client> client) const {
  std::lock_guard lock(mutex_);
  idle_.push_back(std::move(client));
}

nlohmann::json HttpPool::request(const std::string& path, const nlohmann::json* body,
                                 ErrorCode unavailable_code) const {
  auto client = acquire();
  httplib::Result result = body == nullptr
                               ? client->Get(path)
                               : client->Post(path, body->dump(), "application/json");
  if (!result) {
    throw Error(unavailable_code, base_url_ + path + ": " + httplib::to_string(result.error()));
  }
  release(std::move(client));
  const int status = result->status;
  if (status == 413) throw Error(ErrorCode::kPrefixTooLong, base_url_ + path + ": " + result->body);
  if (status == 400) throw Error(ErrorCode::kInvalidArgument, base_url_ + path + ": " + result->body);
  if (status != 200) {
    throw Error(unavailable_code,
                base_url_ + path + ": HTTP " + std::to_string(status) + " " + result->body);
  }
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, base_url_ + path + ": " + e.what());
  }
}

RemoteBackend::RemoteBackend(std::string base_url, double timeout_seconds)
    : pool_(std::move(base_url), timeout_seconds) {
  const auto meta = pool_.request("/v1/meta", nullptr, ErrorCode::kRemoteUnavailable);
  try {
    descriptor_.kind = BackendKind::kRemote;
    descriptor_.vocab.size = meta.at("vocab_size").get<std::int64_t>();
    descriptor_.vocab.eos_id = meta.at("eos_id").get<TokenId>();
    if (meta.contains("pad_id") && !meta["pad_id"].is_null()) {
      descriptor_.vocab.pad_id = meta["pad_id"].get<TokenId>();
    }
    if (meta.contains("max_context") && !meta["max_context"].is_null()) {
      max_context_ = meta["max_context"].get<std::size_t>();
    }
    model_id_ = meta.value("model_id", std::string("unknown"));
    encoder_decoder_ = meta.value("architecture", std::string()) == "encoder-decoder";
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "bad /v1/meta reply: " + std::string(e.what()));
  }
  if (descriptor_.vocab.size <= 0 || descriptor_.vocab.eos_id < 0 ||
      descriptor_.vocab.eos_id >= descriptor_.vocab.size) {
    throw Error(ErrorCode::kInvalidArgument, "remote /v1/meta reports an invalid vocabulary");
  }
  descriptor_.identity = "remote:" + pool_.base_url() + "#" + model_id_;
}

TokenSequence RemoteBackend::tokenize(std::string_view text) const {
  const nlohmann::json body = {{"text", std::string(text)}};
  const auto reply = pool_.request("/v1/tokenize", &body, ErrorCode::kRemoteUnavailable);
  try {
    return reply.at("ids").get<TokenSequence>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "bad /v1/tokenize reply: " + std::string(e.what()));
  }
}

std::string RemoteBackend::detokenize(std::span<const TokenId> tokens) const {
  const nlohmann::json body = {{"ids", TokenSequence(tokens.begin(), tokens.end())}};
  const auto reply = pool_.request("/v1/detokenize", &body, ErrorCode::kRemoteUnavailable);
  try {
    return reply.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "bad /v1/detokenize reply: " + std::string(e.what()));
  }
}

LogitVector RemoteBackend::fetch_logits(const nlohmann::json& body) const {
  const auto reply = pool_.request("/v1/logits", &body, ErrorCode::kRemoteUnavailable);
  LogitVector logits;
  try {
    logits = reply.at("logits").get<LogitVector>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "bad /v1/logits reply: " + std::string(e.what()));
  }
  if (static_cast<std::int64_t>(logits.size()) != descriptor_.vocab.size) {
    throw Error(ErrorCode::kVocabMismatch,
                "server returned " + std::to_string(logits.size()) +
                    " logits but reported vocab_size " + std::to_string(descriptor_.vocab.size));
  }
  for (double v : logits) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kParseError, "server returned a non-finite logit");
  }
  return logits;
}

LogitVector RemoteBackend::next_logits(std::span<const TokenId> prefix) const {
  check_prefix(prefix);
  return fetch_logits({{"ids", TokenSequence(prefix.begin(), prefix.end())}});
}

LogitVector RemoteBackend::next_logits(std::span<const TokenId> prompt,
                                       std::span<const TokenId> generated) const {
  if (!encoder_decoder_) return LanguageModel::next_logits(prompt, generated);
  check_prefix(prompt);
  check_prefix(generated);
  return fetch_logits({{"ids", TokenSequence(prompt.begin(), prompt.end())},
                       {"decoder_ids", TokenSequence(generated.begin(), generated.end())}});
}

}  // namespace mcdec
