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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "mcdec/decoding.hpp"
#include "mcdec/error.hpp"
#include "mcdec/hashing.hpp"
#include "mcdec/ngram_backend.hpp"
#include "mcdec/scripted_backend.hpp"
#include "support.hpp"

using namespace mcdec;
using doctest::Approx;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected mcdec::Error");
  return ErrorCode::kInvalidArgument;
}

double sum_softmax(const LogitVector& z) {
  double s = 0;
  for (double p : softmax(z)) s += p;
  return s;
}

}  // namespace

TEST_CASE("scripted tokenize and detokenize") {
  ScriptedBackend model(ScriptedDefinition::char_level("abhi"));
  CHECK(model.tokenize("").empty());
  CHECK(model.tokenize("ab") == TokenSequence{0, 1});
  CHECK(model.detokenize(TokenSequence{}).empty());
  CHECK(model.detokenize(TokenSequence{2, 3}) == "hi");
  CHECK(model.detokenize(TokenSequence{2, 3, model.vocab().eos_id}) == "hi");
  CHECK(code_of([&] { model.tokenize("xyz"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("scripted tokenizer prefers the longest token") {
  ScriptedDefinition def;
  def.vocab_size = 4;
  def.eos_id = 3;
  def.tokens = {"a", "ab", "b", "<eos>"};
  ScriptedBackend model(def);
  CHECK(model.tokenize("abab") == TokenSequence{1, 1});
  CHECK(model.tokenize("aab") == TokenSequence{0, 1});
}

TEST_CASE("scripted lookup") {
  ScriptedDefinition def;
  def.vocab_size = 3;
  def.eos_id = 2;
  def.table[{}] = {1.0, 0.0, -1.0};
  def.table[{1}] = {0.0, 1.0, 0.0};
  def.table[{0, 1}] = {0.0, 0.0, 1.0};

  SUBCASE("exact and suffix") {
    ScriptedBackend model(def);
    CHECK(model.next_logits(TokenSequence{}) == LogitVector{1.0, 0.0, -1.0});
    CHECK(model.next_logits(TokenSequence{0, 1}) == LogitVector{0.0, 0.0, 1.0});
    CHECK(model.next_logits(TokenSequence{2, 0, 1}) == LogitVector{0.0, 0.0, 1.0});
    CHECK(model.next_logits(TokenSequence{2, 1}) == LogitVector{0.0, 1.0, 0.0});
    // The empty key is a suffix of everything.
    CHECK(model.next_logits(TokenSequence{2, 2}) == LogitVector{1.0, 0.0, -1.0});
  }
  SUBCASE("prefix matching") {
    def.match = ScriptMatch::kPrefix;
    ScriptedBackend model(def);
    CHECK(model.next_logits(TokenSequence{0, 1, 2}) == LogitVector{0.0, 0.0, 1.0});
    CHECK(model.next_logits(TokenSequence{1, 0}) == LogitVector{0.0, 1.0, 0.0});
    CHECK(model.next_logits(TokenSequence{2, 1}) == LogitVector{1.0, 0.0, -1.0});
  }
  SUBCASE("fallback and misses") {
    def.table.erase(TokenSequence{});
    ScriptedBackend no_default(def);
    CHECK_THROWS_AS(no_default.next_logits(TokenSequence{2}), Error);
    def.fallback = LogitVector{0.5, 0.5, 0.5};
    ScriptedBackend with_default(def);
    CHECK(with_default.next_logits(TokenSequence{2}) == LogitVector{0.5, 0.5, 0.5});
  }
  SUBCASE("validation") {
    def.table[{0}] = {1.0, 2.0};
    CHECK(code_of([&] { ScriptedBackend m(def); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("scripted prefix checks") {
  auto def = ScriptedDefinition::char_level("ab");
  def.fallback = LogitVector{0, 0, 0};
  def.max_context = 3;
  ScriptedBackend model(def);
  CHECK(code_of([&] { model.next_logits(TokenSequence{0, 7}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { model.next_logits(TokenSequence{0, 1, 0, 1}); }) == ErrorCode::kPrefixTooLong);
  CHECK(model.next_logits(TokenSequence{0, 1, 0}).size() == 3);
}

TEST_CASE("scripted definition JSON round trip") {
  std::mt19937_64 gen(1);
  auto def = testing::random_scripted(gen, 5);
  def.table[{0, 3, 1}] = testing::random_logits(gen, 5);
  def.max_context = 99;
  const auto again = ScriptedDefinition::from_json(def.to_json());
  CHECK(again.table == def.table);
  CHECK(again.fallback == def.fallback);
  CHECK(again.tokens == def.tokens);
  CHECK(again.max_context == 99);

  const auto dir = testing::temp_dir("scripted_json");
  std::ofstream(dir / "s.json") << def.to_json().dump();
  const auto loaded = ScriptedBackend::from_file(dir / "s.json");
  CHECK(loaded.next_logits(TokenSequence{0, 3, 1}) == def.table.at({0, 3, 1}));
}

TEST_CASE("n-gram bigram counts on aaab") {
  const std::string corpus = "aaab";
  auto lm = NgramBackend::train({corpus}, {2, TokenUnit::kChar, 0.0});
  const TokenId a = lm.token_id("a");
  const TokenId b = lm.token_id("b");

  // Oracle: scan the padded character sequence directly.
  std::map<std::pair<std::string, std::string>, int> bigrams;
  std::map<std::string, int> history_totals;
  std::vector<std::string> seq = {"<bos>"};
  for (char c : corpus) seq.emplace_back(1, c);
  seq.emplace_back("<eos>");
  for (std::size_t i = 1; i < seq.size(); ++i) {
    ++bigrams[{seq[i - 1], seq[i]}];
    ++history_totals[seq[i - 1]];
  }
  CHECK(bigrams[{"a", "a"}] == 2);
  CHECK(lm.count(TokenSequence{a}, a) == bigrams[{"a", "a"}]);
  CHECK(lm.count(TokenSequence{a}, b) == bigrams[{"a", "b"}]);
  CHECK(lm.count(TokenSequence{NgramBackend::kBos}, a) == bigrams[{"<bos>", "a"}]);
  CHECK(lm.count(TokenSequence{b}, NgramBackend::kEos) == bigrams[{"b", "<eos>"}]);

  const auto z = lm.next_logits(TokenSequence{a, a});
  CHECK(argmax(z) == a);
  const double v = static_cast<double>(lm.vocab().size);
  CHECK(v == 6);  // four specials plus a, b
  const auto p = softmax(z);
  CHECK(p[static_cast<std::size_t>(a)] == Approx((2 + 1) / (history_totals["a"] + v)).epsilon(1e-12));
  CHECK(p[static_cast<std::size_t>(b)] == Approx((1 + 1) / (history_totals["a"] + v)).epsilon(1e-12));
  CHECK(p[0] == Approx(1 / (history_totals["a"] + v)).epsilon(1e-12));
}

TEST_CASE("n-gram unseen history is uniform and every token has mass") {
  auto lm = NgramBackend::train({"the cat sat", "the dog sat"}, {3, TokenUnit::kWord, 0.0});
  const auto z = lm.next_logits(lm.tokenize("dog dog"));
  for (double x : z) CHECK(x == Approx(z[0]));
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(lm.vocab().size - 1));
  for (int i = 0; i < 50; ++i) {
    TokenSequence prefix(static_cast<std::size_t>(i % 6));
    for (auto& t : prefix) t = tok(gen);
    const auto logits = lm.next_logits(prefix);
    CHECK(sum_softmax(logits) == Approx(1.0).epsilon(1e-9));
    const auto p = softmax(logits);
    CHECK(*std::min_element(p.begin(), p.end()) > 0.0);
    CHECK(lm.next_logits(prefix) == logits);
  }
}

TEST_CASE("n-gram prompt cache merges counts from the prefix") {
  const double beta = 4.0;
  auto lm = NgramBackend::train({"x y old"}, {2, TokenUnit::kWord, beta});
  const TokenId y = lm.token_id("y");
  const TokenId old_id = lm.token_id("old");
  const TokenId x = lm.token_id("x");
  const double v = static_cast<double>(lm.vocab().size);

  // Prefix "y x y" contains the bigram (y -> x) once; history is "y".
  const auto p = softmax(lm.next_logits(TokenSequence{y, x, y}));
  const double denom = 1 + beta + v;  // one training continuation of "y", one cached
  CHECK(p[static_cast<std::size_t>(old_id)] == Approx(2 / denom).epsilon(1e-12));
  CHECK(p[static_cast<std::size_t>(x)] == Approx((1 + beta) / denom).epsilon(1e-12));
  CHECK(argmax(lm.next_logits(TokenSequence{y, x, y})) == x);

  auto plain = NgramBackend::train({"x y old"}, {2, TokenUnit::kWord, 0.0});
  CHECK(argmax(plain.next_logits(TokenSequence{y, x, y})) == old_id);
}

TEST_CASE("n-gram word tokenization") {
  auto lm = NgramBackend::train({"Question: What is it? Answer: Paris.", "caf\xc3\xa9 au lait"},
                                {3, TokenUnit::kWord, 0.0});
  const auto ids = lm.tokenize("Question: What is it?\nAnswer: Paris.");
  CHECK(ids.size() == 11);
  CHECK(ids[6] == NgramBackend::kNewline);
  CHECK(lm.detokenize(ids) == "Question: What is it?\nAnswer: Paris.");
  CHECK(lm.tokenize("caf\xc3\xa9")[0] != NgramBackend::kUnk);
  CHECK(lm.tokenize("unknownword") == TokenSequence{NgramBackend::kUnk});
  // Normalization: whitespace runs collapse.
  CHECK(lm.detokenize(lm.tokenize("What   is  it ?")) == "What is it?");
}

TEST_CASE("n-gram char unit round trip") {
  auto lm = NgramBackend::train({"abc def"}, {3, TokenUnit::kChar, 0.0});
  CHECK(lm.detokenize(lm.tokenize("fed cab")) == "fed cab");
}

TEST_CASE("n-gram training errors and identity") {
  CHECK(code_of([] { NgramBackend::train({"", ""}, {}); }) == ErrorCode::kEmptyCorpus);
  CHECK(code_of([] { NgramBackend::train({"a"}, {0, TokenUnit::kWord, 0}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { NgramBackend::train({"a"}, {2, TokenUnit::kWord, -1}); }) == ErrorCode::kInvalidArgument);
  const auto a = NgramBackend::train({"one two"}, {});
  const auto b = NgramBackend::train({"one three"}, {});
  CHECK(a.descriptor().identity != b.descriptor().identity);
  CHECK(a.descriptor().identity == NgramBackend::train({"one two"}, {}).descriptor().identity);
}

TEST_CASE("n-gram config file") {
  const auto dir = testing::temp_dir("ngram_cfg");
  std::ofstream(dir / "corpus.txt") << "alpha beta\n\ngamma delta\n";
  std::ofstream(dir / "lm.json") << R"({"corpus": "corpus.txt", "order": 2, "unit": "word"})";
  const auto lm = NgramBackend::from_config_file(dir / "lm.json");
  CHECK(lm.config().order == 2);
  CHECK(lm.tokens().size() == 8);
  const auto synthetic = NgramBackend::from_config_file(testing::data_dir() / "synthetic" / "ngram.json");
  CHECK(synthetic.config().order == 5);
  CHECK(synthetic.config().prompt_cache_weight == 4.0);
}

TEST_CASE("vocabulary equality guard") {
  CHECK_NOTHROW(require_same_vocab({5, 4, std::nullopt}, {5, 4, std::nullopt}));
  CHECK(code_of([] { require_same_vocab({5, 4, std::nullopt}, {6, 4, std::nullopt}); }) == ErrorCode::kVocabMismatch);
  CHECK(code_of([] { require_same_vocab({5, 4, std::nullopt}, {5, 3, std::nullopt}); }) == ErrorCode::kVocabMismatch);
}

TEST_CASE("fnv-1a reference values") {
  // Published FNV-1a 64-bit test vectors.
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}
