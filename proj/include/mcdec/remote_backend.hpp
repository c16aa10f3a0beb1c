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

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcdec/error.hpp"
#include "mcdec/language_model.hpp"

namespace httplib {
class Client;
}

namespace mcdec {

/// Small pool of keep-alive HTTP clients for one endpoint; each request
/// borrows a client for its duration.
class HttpPool {
 public:
  HttpPool(std::string base_url, double timeout_seconds);
  ~HttpPool();

  HttpPool(const HttpPool&) = delete;
  HttpPool& operator=(const HttpPool&) = delete;

  /// GET or POST (when `body` is non-null) returning the parsed JSON reply.
  /// Transport failures and unexpected statuses raise `unavailable_code`;
  /// HTTP 400 raises InvalidArgument and HTTP 413 raises PrefixTooLong.
  nlohmann::json request(const std::string& path, const nlohmann::json* body,
                         ErrorCode unavailable_code) const;

  const std::string& base_url() const noexcept { return base_url_; }

 private:
  std::unique_ptr<httplib::Client> acquire() const;
  void release(std::unique_ptr<httplib::Client> client) const;

  std::string base_url_;
  double timeout_seconds_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<httplib::Client>> idle_;
};

/// Client for a logits server speaking the /v1 JSON protocol.
///
///     GET  /v1/meta        -> {"vocab_size", "eos_id", "max_context", "model_id"}
///     POST /v1/tokenize    {"text"} -> {"ids"}
///     POST /v1/detokenize  {"ids"}  -> {"text"}
///     POST /v1/logits      {"ids"[, "decoder_ids"]} -> {"logits"}
///
/// The handshake (GET /v1/meta) happens in the constructor. A logits reply
/// whose length differs from the handshake vocab size raises VocabMismatch.
class RemoteBackend final : public LanguageModel {
 public:
  static constexpr std::size_t kDefaultMaxContext = 4096;

  explicit RemoteBackend(std::string base_url, double timeout_seconds = 30.0);

  const BackendDescriptor& descriptor() const noexcept override { return descriptor_; }
  std::size_t max_context() const noexcept override { return max_context_; }

  TokenSequence tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;
  LogitVector next_logits(std::span<const TokenId> prefix) const override;
  LogitVector next_logits(std::span<const TokenId> prompt,
                          std::span<const TokenId> generated) const override;

  bool encoder_decoder() const noexcept { return encoder_decoder_; }
  const std::string& model_id() const noexcept { return model_id_; }

 private:
  LogitVector fetch_logits(const nlohmann::json& body) const;

  HttpPool pool_;
  BackendDescriptor descriptor_;
  std::size_t max_context_ = kDefaultMaxContext;
  std::string model_id_;
  bool encoder_decoder_ = false;
};

}  // namespace mcdec
