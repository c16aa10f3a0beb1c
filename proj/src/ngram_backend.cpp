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

#include "mcdec/ngram_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mcdec/error.hpp"
#include "mcdec/hashing.hpp"

namespace mcdec {
namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::string_view token_unit_name(TokenUnit unit) noexcept {
  return unit == TokenUnit::kChar ? "char" : "word";
}

TokenUnit parse_token_unit(std::string_view name) {
  if (name == "char") return TokenUnit::kChar;
  if (name == "word") return TokenUnit::kWord;
  throw Error(ErrorCode::kInvalidArgument, "unknown token unit '" + std::string(name) + "'");
}

std::size_t NgramBackend::HistoryHash::operator()(const TokenSequence& h) const noexcept {
  return static_cast<std::size_t>(fnv1a_tokens(h));
}

std::vector<std::string> NgramBackend::split(std::string_view text) const {
  std::vector<std::string> out;
  if (config_.unit == TokenUnit::kChar) {
    for (char c : text) out.emplace_back(1, c);
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == '\n') {
      out.emplace_back("\n");
      ++i;
    } else if (std::isspace(c) != 0) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, static_cast<char>(c));
      ++i;
    }
  }
  return out;
}

NgramBackend NgramBackend::train(const std::vector<std::string>& documents, NgramConfig config) {
  if (config.order < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  if (!(config.prompt_cache_weight >= 0.0) || !std::isfinite(config.prompt_cache_weight)) {
    throw Error(ErrorCode::kInvalidArgument, "prompt_cache_weight must be finite and >= 0");
  }
  NgramBackend lm;
  lm.config_ = config;
  lm.tokens_ = {"<unk>", "<eos>", "<bos>", "\n"};

  std::vector<std::vector<std::string>> split_docs;
  std::set<std::string> distinct;
  for (const auto& doc : documents) {
    auto pieces = lm.split(doc);
    if (pieces.empty()) continue;
    distinct.insert(pieces.begin(), pieces.end());
    split_docs.push_back(std::move(pieces));
  }
  if (split_docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "n-gram training corpus is empty");
  for (const auto& special : lm.tokens_) distinct.erase(special);
  lm.tokens_.insert(lm.tokens_.end(), distinct.begin(), distinct.end());
  for (std::size_t i = 0; i < lm.tokens_.size(); ++i) {
    lm.ids_.emplace(lm.tokens_[i], static_cast<TokenId>(i));
  }

  const auto hist_len = static_cast<std::size_t>(config.order - 1);
  std::uint64_t corpus_hash = kFnvOffset;
  for (const auto& pieces : split_docs) {
    TokenSequence seq(hist_len, kBos);
    for (const auto& p : pieces) seq.push_back(lm.ids_.at(p));
    seq.push_back(kEos);
    for (const auto& p : pieces) corpus_hash = fnv1a(std::string_view(p.data(), p.size() + 1), corpus_hash);
    corpus_hash = fnv1a("\n", corpus_hash);
    for (std::size_t i = hist_len; i < seq.size(); ++i) {
      TokenSequence history(seq.begin() + static_cast<std::ptrdiff_t>(i - hist_len),
                            seq.begin() + static_cast<std::ptrdiff_t>(i));
      auto& cont = lm.counts_[history];
      ++cont.total;
      ++cont.next[seq[i]];
    }
  }

  lm.descriptor_.kind = BackendKind::kNgram;
  lm.descriptor_.vocab = {static_cast<std::int64_t>(lm.tokens_.size()), kEos, std::nullopt};
  std::ostringstream identity;
  identity << "ngram:order=" << config.order << ",unit=" << token_unit_name(config.unit)
           << ",cache=" << config.prompt_cache_weight << ",corpus=" << std::hex << corpus_hash;
  lm.descriptor_.identity = identity.str();
  return lm;
}

NgramBackend NgramBackend::train_text(std::string_view text, NgramConfig config) {
  std::vector<std::string> docs;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) docs.emplace_back(line);
    start = end + 1;
  }
  return train(docs, config);
}

NgramBackend NgramBackend::from_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open n-gram config " + path.string());
  nlohmann::json j;
  NgramConfig config;
  std::filesystem::path corpus;
  try {
    in >> j;
    corpus = j.at("corpus").get<std::string>();
    config.order = j.value("order", 3);
    config.unit = parse_token_unit(j.value("unit", std::string("word")));
    config.prompt_cache_weight = j.value("prompt_cache_weight", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  if (corpus.is_relative()) corpus = path.parent_path() / corpus;
  std::ifstream corpus_in(corpus, std::ios::binary);
  if (!corpus_in) throw Error(ErrorCode::kIoError, "cannot open n-gram corpus " + corpus.string());
  std::stringstream buffer;
  buffer << corpus_in.rdbuf();
  return train_text(buffer.str(), config);
}

TokenId NgramBackend::token_id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

TokenSequence NgramBackend::tokenize(std::string_view text) const {
  TokenSequence ids;
  for (const auto& piece : split(text)) ids.push_back(token_id(piece));
  return ids;
}

std::string NgramBackend::detokenize(std::span<const TokenId> tokens) const {
  std::string out;
  bool after_newline = true;
  for (TokenId id : tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
      throw Error(ErrorCode::kInvalidArgument, "token id outside vocabulary");
    }
    if (id == kEos || id == kBos) continue;
    const auto& tok = tokens_[static_cast<std::size_t>(id)];
    if (config_.unit == TokenUnit::kWord) {
      const bool punct = tok.size() == 1 && !is_word_byte(static_cast<unsigned char>(tok[0]));
      if (!after_newline && !punct && id != kNewline) out.push_back(' ');
      after_newline = id == kNewline;
    }
    out += tok;
  }
  return out;
}

std::int64_t NgramBackend::count(std::span<const TokenId> history, TokenId next) const {
  auto it = counts_.find(TokenSequence(history.begin(), history.end()));
  if (it == counts_.end()) return 0;
  auto n = it->second.next.find(next);
  return n == it->second.next.end() ? 0 : n->second;
}

LogitVector NgramBackend::next_logits(std::span<const TokenId> prefix) const {
  check_prefix(prefix);
  const auto hist_len = static_cast<std::size_t>(config_.order - 1);
  TokenSequence padded(hist_len, kBos);
  padded.insert(padded.end(), prefix.begin(), prefix.end());
  const TokenSequence history(padded.end() - static_cast<std::ptrdiff_t>(hist_len), padded.end());

  const auto vocab_size = tokens_.size();
  std::vector<double> counts(vocab_size, 1.0);
  double denominator = static_cast<double>(vocab_size);

  if (auto it = counts_.find(history); it != counts_.end()) {
    denominator += static_cast<double>(it->second.total);
    for (const auto& [tok, c] : it->second.next) counts[static_cast<std::size_t>(tok)] += static_cast<double>(c);
  }

  const double beta = config_.prompt_cache_weight;
  if (beta > 0.0) {
    for (std::size_t i = hist_len; i < padded.size(); ++i) {
      if (std::equal(history.begin(), history.end(),
                     padded.begin() + static_cast<std::ptrdiff_t>(i - hist_len))) {
        counts[static_cast<std::size_t>(padded[i])] += beta;
        denominator += beta;
      }
    }
  }

  LogitVector logits(vocab_size);
  const double log_denominator = std::log(denominator);
  for (std::size_t w = 0; w < vocab_size; ++w) logits[w] = std::log(counts[w]) - log_denominator;
  return logits;
}

}  // namespace mcdec
