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
#include <sstream>

#include "mcdec/context_selection.hpp"
#include "mcdec/error.hpp"
#include "support.hpp"

using namespace mcdec;

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

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::multiset<std::string> words(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::multiset<std::string> out;
  for (std::string w; in >> w;) out.insert(w);
  return out;
}

std::multiset<char> chars_without_space(std::string_view text) {
  std::multiset<char> out;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.insert(c);
  }
  return out;
}

class FixedEmbedder final : public Embedder {
 public:
  explicit FixedEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {}
  EmbeddingVector embed(std::string_view text) const override {
    return normalize_embedding(table_.at(std::string(text)));
  }
  std::string identity() const override { return "fixed-table"; }

 private:
  std::map<std::string, std::vector<double>> table_;
};

class PoisonedEmbedder final : public Embedder {
 public:
  EmbeddingVector embed(std::string_view) const override { FAIL("embedder was read"); return {}; }
  std::string identity() const override { return "poisoned"; }
};

class DownEmbedder final : public Embedder {
 public:
  EmbeddingVector embed(std::string_view) const override {
    throw Error(ErrorCode::kRemoteUnavailable, "connection refused");
  }
  std::string identity() const override { return "down"; }
};

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

}  // namespace

TEST_CASE("fixed passage matches the shipped asset") {
  const auto text = fixed_irrelevant_text();
  CHECK(text.starts_with("It was a pleasant weather day, with seasonally average temperatures."));
  CHECK(trim(read_file(testing::data_dir() / "irrelevant" / "fixed_v1.txt")) == text);
  const auto p = fixed_irrelevant_passage();
  CHECK(p.id == "fixed:v1");
  CHECK(p.text == text);
}

TEST_CASE("permuted passage keeps the word and character multisets") {
  const auto reference = trim(read_file(std::filesystem::path(MCDEC_TEST_FIXTURES) / "fixed_permuted_reference.txt"));
  CHECK(words(reference) == words(fixed_irrelevant_text()));
  CHECK(chars_without_space(reference) == chars_without_space(fixed_irrelevant_text()));
  CHECK(words(reference).size() == 88);
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xffffffffffffffffULL}) {
    const auto p = permuted_irrelevant_passage(seed);
    CHECK(words(p.text) == words(fixed_irrelevant_text()));
    CHECK(chars_without_space(p.text) == chars_without_space(reference));
    CHECK(p.text == permuted_irrelevant_passage(seed).text);
    CHECK(p.id == "fixed-permuted:v1:" + std::to_string(seed));
  }
  CHECK(permuted_irrelevant_passage(1).text != permuted_irrelevant_passage(2).text);
  CHECK(permuted_irrelevant_passage(1).text != fixed_irrelevant_text());
}

TEST_CASE("strategy names") {
  for (auto s : {IrrelevantStrategy::kRandom, IrrelevantStrategy::kFixed, IrrelevantStrategy::kFixedPermuted,
                 IrrelevantStrategy::kMostDistant}) {
    CHECK(parse_irrelevant_strategy(irrelevant_strategy_name(s)) == s);
  }
  CHECK(parse_irrelevant_strategy("most_distant") == IrrelevantStrategy::kMostDistant);
  CHECK(code_of([] { parse_irrelevant_strategy("farthest"); }) == ErrorCode::kInvalidArgument);
  CHECK(uses_pool(IrrelevantStrategy::kRandom));
  CHECK_FALSE(uses_pool(IrrelevantStrategy::kFixedPermuted));
}

TEST_CASE("random selection") {
  const Passage c_plus{"a", "", "alpha"};
  const std::vector<Passage> two{{"a", "", "alpha"}, {"b", "", "beta"}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(select_irrelevant(IrrelevantStrategy::kRandom, c_plus, two, nullptr, seed).id == "b");
  }

  std::vector<Passage> pool;
  for (int i = 0; i < 10; ++i) pool.push_back({"p" + std::to_string(i), "", "text"});
  CHECK(select_irrelevant(IrrelevantStrategy::kRandom, c_plus, pool, nullptr, 77).id ==
        select_irrelevant(IrrelevantStrategy::kRandom, c_plus, pool, nullptr, 77).id);

  std::map<std::string, int> counts;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) {
    ++counts[select_irrelevant(IrrelevantStrategy::kRandom, c_plus, pool, nullptr, static_cast<std::uint64_t>(i)).id];
  }
  const double expected = kDraws / 10.0;
  const double sigma = std::sqrt(kDraws * 0.1 * 0.9);
  CHECK(counts.size() == 10);
  for (const auto& [id, n] : counts) {
    INFO(id);
    CHECK(std::abs(n - expected) < 3 * sigma);
  }
}

TEST_CASE("most-distant selection on a hand-built pool") {
  FixedEmbedder emb({{"plus", {1, 0}}, {"near", {1, 0.1}}, {"far", {-1, 0.2}}, {"ortho", {0, 1}}});
  const Passage c_plus{"c", "", "plus"};
  std::vector<Passage> pool{{"n", "", "near"}, {"f", "", "far"}, {"o", "", "ortho"}};
  CHECK(select_irrelevant(IrrelevantStrategy::kMostDistant, c_plus, pool, &emb, 0).id == "f");
  std::reverse(pool.begin(), pool.end());
  CHECK(select_irrelevant(IrrelevantStrategy::kMostDistant, c_plus, pool, &emb, 0).id == "f");

  FixedEmbedder tie({{"plus", {1, 0}}, {"x", {0, 1}}, {"y", {0, -1}}});
  const std::vector<Passage> tied{{"z9", "", "x"}, {"z1", "", "y"}};
  CHECK(select_irrelevant(IrrelevantStrategy::kMostDistant, c_plus, tied, &tie, 0).id == "z1");
}

TEST_CASE("most-distant matches brute force on the toy corpus") {
  const auto corpus = testing::toy_corpus();
  auto index = std::make_shared<const Bm25Index>(Bm25Index::build(corpus));
  TfidfEmbedder emb(index);
  std::mt19937_64 gen(4);
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const auto& c_plus = corpus[c];
    std::vector<Passage> pool = corpus;
    std::shuffle(pool.begin(), pool.end(), gen);
    const auto got = select_irrelevant(IrrelevantStrategy::kMostDistant, c_plus, pool, &emb, 0);
    CHECK(got.id != c_plus.id);

    const auto plus_vec = testing::brute_force_tfidf(corpus, c_plus.text);
    std::string best;
    double best_d = -1;
    for (const auto& p : corpus) {
      if (p.id == c_plus.id) continue;
      const double d = 1.0 - testing::dot(plus_vec, testing::brute_force_tfidf(corpus, p.text));
      if (d > best_d + 1e-12 || (std::abs(d - best_d) <= 1e-12 && p.id < best)) {
        best = p.id;
        best_d = d;
      }
    }
    CHECK(got.id == best);
  }
}

TEST_CASE("fixed strategies read neither the pool nor the embedder") {
  PoisonedEmbedder poisoned;
  const Passage c_plus{"c", "", "anything"};
  CHECK(select_irrelevant(IrrelevantStrategy::kFixed, c_plus, {}, &poisoned, 0).text == fixed_irrelevant_text());
  CHECK(select_irrelevant(IrrelevantStrategy::kFixedPermuted, c_plus, {}, nullptr, 5).text ==
        permuted_irrelevant_passage(5).text);
}

TEST_CASE("selection errors") {
  const Passage c_plus{"a", "", "alpha"};
  const std::vector<Passage> only_self{c_plus};
  CHECK(code_of([&] { select_irrelevant(IrrelevantStrategy::kRandom, c_plus, {}, nullptr, 0); }) ==
        ErrorCode::kEmptyPool);
  CHECK(code_of([&] { select_irrelevant(IrrelevantStrategy::kMostDistant, c_plus, only_self, nullptr, 0); }) ==
        ErrorCode::kEmptyPool);
  const std::vector<Passage> pool{{"b", "", "beta"}};
  CHECK(code_of([&] { select_irrelevant(IrrelevantStrategy::kMostDistant, c_plus, pool, nullptr, 0); }) ==
        ErrorCode::kEmbedderUnavailable);
  DownEmbedder down;
  CHECK(code_of([&] { select_irrelevant(IrrelevantStrategy::kMostDistant, c_plus, pool, &down, 0); }) ==
        ErrorCode::kEmbedderUnavailable);
}

TEST_CASE("relevant context and retrieval pool") {
  const auto index = Bm25Index::build(testing::toy_corpus());
  const Passage gold{"g", "", "gold text"};
  CHECK(select_relevant("anything", &index, gold) == gold);
  CHECK(select_relevant("zebrafish biology", &index, std::nullopt).id == "toy19");
  CHECK(code_of([&] { select_relevant("xylophone", &index, std::nullopt); }) == ErrorCode::kNoRetrievalHit);
  CHECK(code_of([&] { select_relevant("?", &index, std::nullopt); }) == ErrorCode::kNoRetrievalHit);
  CHECK(code_of([] { select_relevant("zebrafish", nullptr, std::nullopt); }) == ErrorCode::kNoRetrievalHit);

  const auto hits = index.search("capital of Japan", 100);
  const auto pool = irrelevant_pool(index, "capital of Japan", 100);
  REQUIRE(pool.size() == hits.size() - 1);
  for (std::size_t i = 0; i < pool.size(); ++i) CHECK(pool[i] == hits[i + 1].passage);
  CHECK(irrelevant_pool(index, "capital of Japan", 3).size() == 2);
  CHECK(irrelevant_pool(index, "...", 3).empty());
}
