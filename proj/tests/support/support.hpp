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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mcdec/evaluation.hpp"
#include "mcdec/language_model.hpp"
#include "mcdec/retrieval.hpp"
#include "mcdec/scripted_backend.hpp"

namespace mcdec::testing {

inline std::filesystem::path data_dir() { return MCDEC_DATA_DIR; }

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mcdec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline LogitVector random_logits(std::mt19937_64& gen, std::size_t n, double scale = 3.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  LogitVector v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

/// Vocabulary t0..t{n-2} plus <eos>; logits depend on the last token only,
/// with a separate random row for the empty prefix.
inline ScriptedDefinition random_scripted(std::mt19937_64& gen, std::size_t vocab_size = 8) {
  ScriptedDefinition def;
  def.vocab_size = static_cast<std::int64_t>(vocab_size);
  def.eos_id = static_cast<TokenId>(vocab_size - 1);
  for (std::size_t i = 0; i + 1 < vocab_size; ++i) def.tokens.push_back("t" + std::to_string(i) + " ");
  def.tokens.push_back("<eos>");
  def.match = ScriptMatch::kSuffix;
  for (std::size_t t = 0; t < vocab_size; ++t) {
    def.table[{static_cast<TokenId>(t)}] = random_logits(gen, vocab_size);
  }
  def.fallback = random_logits(gen, vocab_size);
  return def;
}

/// Independent re-statement of the analyzer: lowercase ASCII, split on
/// anything that is not an ASCII letter, digit, or a byte >= 0x80.
inline std::vector<std::string> oracle_terms(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct OracleHit {
  std::string id;
  double score;
};

/// Exhaustive BM25: scores every passage from scratch.
inline std::vector<OracleHit> brute_force_bm25(const std::vector<Passage>& corpus, const std::string& query,
                                               std::size_t k, double k1 = 1.2, double b = 0.75) {
  std::vector<std::vector<std::string>> docs;
  double total = 0;
  for (const auto& p : corpus) {
    docs.push_back(oracle_terms(p.text));
    total += static_cast<double>(docs.back().size());
  }
  const double n = static_cast<double>(corpus.size());
  const double avgdl = total / n;
  const auto q = oracle_terms(query);
  const std::set<std::string> distinct(q.begin(), q.end());

  std::vector<OracleHit> hits;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    double score = 0.0;
    for (const auto& term : distinct) {
      double df = 0;
      for (const auto& doc : docs) df += std::count(doc.begin(), doc.end(), term) > 0 ? 1 : 0;
      const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), term));
      if (tf == 0) continue;
      const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
      const double dl = static_cast<double>(docs[d].size());
      score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
    }
    if (score > 0) hits.push_back({corpus[d].id, score});
  }
  std::sort(hits.begin(), hits.end(), [](const OracleHit& x, const OracleHit& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.id < y.id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

/// Exhaustive TF-IDF vector over the sorted corpus vocabulary, L2-normalized.
inline std::vector<double> brute_force_tfidf(const std::vector<Passage>& corpus, const std::string& text) {
  std::set<std::string> vocab;
  std::vector<std::vector<std::string>> docs;
  for (const auto& p : corpus) {
    docs.push_back(oracle_terms(p.text));
    vocab.insert(docs.back().begin(), docs.back().end());
  }
  const auto terms = oracle_terms(text);
  std::vector<double> v;
  for (const auto& term : vocab) {
    double df = 0;
    for (const auto& doc : docs) df += std::count(doc.begin(), doc.end(), term) > 0 ? 1 : 0;
    const double tf = static_cast<double>(std::count(terms.begin(), terms.end(), term));
    v.push_back(tf * (std::log((1.0 + static_cast<double>(docs.size())) / (1.0 + df)) + 1.0));
  }
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0) {
    for (double& x : v) x /= norm;
  }
  return v;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Random corpus over a small vocabulary so that terms repeat across passages.
inline std::vector<Passage> random_corpus(std::mt19937_64& gen, std::size_t n_passages, std::size_t vocab = 40) {
  std::uniform_int_distribution<std::size_t> len(1, 30);
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::vector<Passage> corpus;
  for (std::size_t i = 0; i < n_passages; ++i) {
    std::string text;
    const auto n = len(gen);
    for (std::size_t w = 0; w < n; ++w) {
      if (w > 0) text += (w % 7 == 0) ? ", " : " ";
      text += "w" + std::to_string(word(gen));
    }
    corpus.push_back({"d" + std::to_string(1000 + i), "", text});
  }
  return corpus;
}

inline std::string random_query(std::mt19937_64& gen, std::size_t vocab = 40) {
  std::uniform_int_distribution<std::size_t> len(1, 5);
  std::uniform_int_distribution<std::size_t> word(0, vocab + 5);
  std::string q;
  const auto n = len(gen);
  for (std::size_t w = 0; w < n; ++w) q += "W" + std::to_string(word(gen)) + " ";
  return q;
}

/// Twenty hand-written passages used by several suites.
inline std::vector<Passage> toy_corpus() {
  const std::vector<std::string> texts = {
      "Nanjing was the capital of the Republic of China for many years.",
      "Taipei is the largest city in Taiwan and hosts many museums.",
      "The Yangtze river flows through Nanjing and Wuhan.",
      "Paris is the capital of France and sits on the Seine.",
      "Lyon is known for its cuisine and silk weaving history.",
      "The Eiffel Tower was completed in 1889 in Paris.",
      "Mount Everest is the highest mountain above sea level.",
      "The Pacific Ocean is the largest and deepest ocean.",
      "Photosynthesis converts light energy into chemical energy.",
      "The Beatles were an English rock band formed in Liverpool.",
      "Liverpool has a famous waterfront and two football clubs.",
      "Tokyo is the capital of Japan and a very large metropolis.",
      "Kyoto was the imperial capital of Japan for over a thousand years.",
      "The Nile is often regarded as the longest river in the world.",
      "Cairo lies on the banks of the Nile river.",
      "Quantum mechanics describes nature at the smallest scales.",
      "The violin is a string instrument played with a bow.",
      "Chess is a board game for two players on a checkered board.",
      "Honey bees communicate through a waggle dance.",
      "The zebrafish is a model organism in developmental biology.",
  };
  std::vector<Passage> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back({"toy" + std::string(i < 10 ? "0" : "") + std::to_string(i), "", texts[i]});
  }
  return out;
}

/// Invented capitalized name from random syllables.
inline std::string random_name(std::mt19937_64& gen) {
  static const std::vector<std::string> syllables = {"ka", "lo", "mir", "ten", "sa", "vor", "eli", "dun",
                                                     "qua", "ris", "pe", "zan", "tho", "gal", "bri", "nok"};
  std::uniform_int_distribution<std::size_t> pick(0, syllables.size() - 1);
  std::uniform_int_distribution<int> count(2, 4);
  std::string name;
  for (int i = count(gen); i > 0; --i) name += syllables[pick(gen)];
  name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
  return name;
}

/// Records whose gold context mentions the answer entity one to three times,
/// with the span on a random occurrence.
inline std::vector<QaRecord> random_entity_dataset(std::mt19937_64& gen, std::size_t n) {
  std::vector<QaRecord> out;
  std::uniform_int_distribution<int> mentions(1, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string entity = random_name(gen) + (i % 4 == 0 ? " " + random_name(gen) : "");
    const std::string place = "Region" + std::to_string(i);
    std::string context = "Notes on " + place + ".";
    const int m = mentions(gen);
    std::uniform_int_distribution<int> which(0, m - 1);
    const int span_at = which(gen);
    AnswerSpan span;
    for (int k = 0; k < m; ++k) {
      context += k == 0 ? " The seat of " + place + " is " : " Travellers often visit ";
      if (k == span_at) span = {context.size(), context.size() + entity.size()};
      context += entity + ".";
    }
    out.push_back({"e" + std::to_string(i), "What is the seat of " + place + "?", {entity}, context,
                   std::nullopt, span});
  }
  return out;
}

/// Character-level reader over printable ASCII. For the final prompt block it
/// spells the X of an "Answer: X." found inside the block's context, falling
/// back to a memorized answer keyed by the question, then a newline.
class ContextReader final : public LanguageModel {
 public:
  explicit ContextReader(std::map<std::string, std::string> memory, double strength = 5.0)
      : chars_(ScriptedDefinition::printable_ascii()), memory_(std::move(memory)), strength_(strength) {}

  const BackendDescriptor& descriptor() const noexcept override { return chars_.descriptor(); }
  TokenSequence tokenize(std::string_view text) const override { return chars_.tokenize(text); }
  std::string detokenize(std::span<const TokenId> ids) const override { return chars_.detokenize(ids); }

  LogitVector next_logits(std::span<const TokenId> prefix) const override {
    const std::string text = chars_.detokenize(prefix);
    const auto block_start = text.rfind("\n\n");
    const std::string block = block_start == std::string::npos ? text : text.substr(block_start + 2);
    const auto answer_at = block.rfind("Answer: ");
    LogitVector z(static_cast<std::size_t>(chars_.vocab().size), 0.0);
    if (answer_at == std::string::npos) {
      z[0] = strength_;
      return z;
    }
    const std::string generated = block.substr(answer_at + 8);
    const std::string head = block.substr(0, answer_at);
    std::string target;
    const auto ctx = head.find("Context: ");
    const auto q = head.rfind("Question: ");
    if (ctx != std::string::npos && q != std::string::npos && q > ctx) {
      const std::string context = head.substr(ctx + 9, q - ctx - 9);
      const auto a = context.find("Answer: ");
      if (a != std::string::npos) target = context.substr(a + 8, context.find('.', a) - a - 8);
    }
    if (target.empty() && q != std::string::npos) {
      const auto it = memory_.find(head.substr(q + 10, head.size() - q - 11));
      if (it != memory_.end()) target = it->second;
    }
    if (generated.size() < target.size() && target.compare(0, generated.size(), generated) == 0) {
      z[chars_.tokenize(target.substr(generated.size(), 1))[0]] = strength_;
    } else {
      z[0] = strength_;
    }
    return z;
  }

 private:
  ScriptedBackend chars_;
  std::map<std::string, std::string> memory_;
  double strength_;
};

}  // namespace mcdec::testing
