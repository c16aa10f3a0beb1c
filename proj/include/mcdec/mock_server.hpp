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
#include <optional>
#include <string>
#include <thread>

#include "mcdec/language_model.hpp"
#include "mcdec/retrieval.hpp"

namespace httplib {
class Server;
}

namespace mcdec {

struct MockServerOptions {
  std::string host = "127.0.0.1";
  /// 0 binds a free port.
  int port = 0;
  std::string model_id = "mock";
  /// Declares "architecture": "encoder-decoder" and honors "decoder_ids".
  bool encoder_decoder = false;
  /// Advertised in /v1/meta instead of the model's real vocab size.
  std::optional<std::size_t> advertised_vocab_size;
  /// Advertised max_context; defaults to the model's own bound, or 4096 when
  /// the model is unbounded. Longer requests get HTTP 413.
  std::optional<std::size_t> max_context;
};

/// Serves a LanguageModel (and optionally an Embedder) over the /v1 protocol
/// on a background thread. Stops on destruction.
class MockServer {
 public:
  MockServer(const LanguageModel& model, MockServerOptions options = {},
             const Embedder* embedder = nullptr);
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const noexcept { return port_; }
  std::string url() const;

  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  const LanguageModel& model_;
  const Embedder* embedder_;
  MockServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace mcdec
