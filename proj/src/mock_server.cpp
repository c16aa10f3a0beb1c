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

#include "mcdec/mock_server.hpp"

#include <httplib.h>
#include <json.hpp>

#include "mcdec/error.hpp"

namespace mcdec {
namespace {

using nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

TokenSequence read_ids(const json& body, const char* key) {
  if (!body.contains(key)) return {};
  return body.at(key).get<TokenSequence>();
}

}  // namespace

MockServer::MockServer(const LanguageModel& model, MockServerOptions options, const Embedder* embedder)
    : model_(model), embedder_(embedder), options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  server_->set_tcp_nodelay(true);
  const std::size_t max_context =
      options_.max_context.value_or(model_.max_context() == kUnboundedContext ? 4096 : model_.max_context());

  server_->Get("/v1/meta", [this, max_context](const httplib::Request&, httplib::Response& res) {
    const auto& vocab = model_.vocab();
    json meta = {{"vocab_size", options_.advertised_vocab_size.value_or(static_cast<std::size_t>(vocab.size))},
                 {"eos_id", vocab.eos_id},
                 {"max_context", max_context},
                 {"model_id", options_.model_id},
                 {"architecture", options_.encoder_decoder ? "encoder-decoder" : "decoder-only"}};
    meta["pad_id"] = vocab.pad_id ? json(*vocab.pad_id) : json(nullptr);
    reply(res, 200, meta);
  });

  // Every handler maps malformed input to 400 and over-long prefixes to 413.
  auto guarded = [](auto body_fn) {
    return [body_fn](const httplib::Request& req, httplib::Response& res) {
      try {
        body_fn(json::parse(req.body), res);
      } catch (const json::exception& e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const Error& e) {
        reply(res, e.code() == ErrorCode::kPrefixTooLong ? 413 : 400, {{"error", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
      }
    };
  };

  server_->Post("/v1/tokenize", guarded([this](const json& body, httplib::Response& res) {
    reply(res, 200, {{"ids", model_.tokenize(body.at("text").get<std::string>())}});
  }));
  server_->Post("/v1/detokenize", guarded([this](const json& body, httplib::Response& res) {
    const auto ids = read_ids(body, "ids");
    reply(res, 200, {{"text", model_.detokenize(ids)}});
  }));
  server_->Post("/v1/logits", guarded([this, max_context](const json& body, httplib::Response& res) {
    const auto ids = body.at("ids").get<TokenSequence>();
    const auto decoder_ids = read_ids(body, "decoder_ids");
    if (ids.size() + decoder_ids.size() > max_context) {
      throw Error(ErrorCode::kPrefixTooLong, "prefix of " + std::to_string(ids.size() + decoder_ids.size()) +
                                                 " tokens exceeds " + std::to_string(max_context));
    }
    const auto logits = options_.encoder_decoder ? model_.next_logits(ids, decoder_ids) : model_.next_logits(ids);
    reply(res, 200, {{"logits", logits}});
  }));
  server_->Post("/v1/embed", guarded([this](const json& body, httplib::Response& res) {
    if (embedder_ == nullptr) {
      reply(res, 404, {{"error", "no embedder configured"}});
      return;
    }
    const auto vectors = embedder_->embed_batch(body.at("texts").get<std::vector<std::string>>());
    json out = json::array();
    for (const auto& v : vectors) out.push_back(v.values);
    reply(res, 200, {{"vectors", out}});
  }));

  port_ = options_.port == 0 ? server_->bind_to_any_port(options_.host)
                             : (server_->bind_to_port(options_.host, options_.port) ? options_.port : -1);
  if (port_ <= 0) {
    throw Error(ErrorCode::kIoError, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockServer::~MockServer() {
  stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::url() const { return "http://" + options_.host + ":" + std::to_string(port_); }

void MockServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void MockServer::stop() { server_->stop(); }

}  // namespace mcdec
