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

#include "mcdec/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "mcdec/error.hpp"
#include "mcdec/jsonl.hpp"

namespace mcdec {
namespace {

bool is_term_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

constexpr const char* kManifest = "manifest.json";
constexpr const char* kPassages = "passages.jsonl";
constexpr const char* kPostings = "postings.tsv";

}  // namespace

std::vector<std::string> analyze(std::string_view text) {
  std::vector<std::string> terms;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_term_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      terms.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) terms.push_back(std::move(current));
  return terms;
}

std::vector<Passage> load_corpus(const std::filesystem::path& path) {
  std::vector<Passage> corpus;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      corpus.push_back({j.at("id").get<std::string>(), j.value("title", std::string()),
                        j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return corpus;
}

Bm25Index Bm25Index::build(std::vector<Passage> corpus, Bm25Params params) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot index an empty corpus");
  if (!(params.k1 > 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "BM25 requires k1 > 0 and b in [0, 1]");
  }
  std::set<std::string_view> seen;
  for (const auto& p : corpus) {
    if (p.text.empty()) throw Error(ErrorCode::kInvalidArgument, "passage '" + p.id + "' has empty text");
    if (!seen.insert(p.id).second) {
      throw Error(ErrorCode::kDuplicatePassageId, "duplicate passage id '" + p.id + "'");
    }
  }

  Bm25Index index;
  index.params_ = params;
  index.passages_ = std::move(corpus);

  std::map<std::string, std::vector<Posting>> postings;
  for (std::size_t d = 0; d < index.passages_.size(); ++d) {
    const auto terms = analyze(index.passages_[d].text);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
    std::map<std::string_view, std::uint32_t> tf;
    for (const auto& t : terms) ++tf[t];
    for (const auto& [term, count] : tf) {
      postings[std::string(term)].push_back({static_cast<std::uint32_t>(d), count});
    }
  }
  for (auto& [term, list] : postings) {
    index.terms_.push_back(term);
    index.postings_.push_back(std::move(list));
  }
  index.finalize();
  return index;
}

void Bm25Index::finalize() {
  const double total = std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), 0.0);
  avgdl_ = total / static_cast<double>(doc_lengths_.size());
  term_lookup_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i) term_lookup_.emplace(terms_[i], i);
}

std::ptrdiff_t Bm25Index::term_index(std::string_view term) const {
  auto it = term_lookup_.find(term);
  return it == term_lookup_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::uint32_t Bm25Index::doc_freq(std::string_view term) const {
  const auto i = term_index(term);
  return i < 0 ? 0 : static_cast<std::uint32_t>(postings_[static_cast<std::size_t>(i)].size());
}

double Bm25Index::idf(std::uint32_t df) const {
  const auto n = static_cast<double>(passages_.size());
  const auto d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

std::vector<ScoredPassage> Bm25Index::search(std::string_view query, std::size_t k) const {
  auto terms = analyze(query);
  if (terms.empty()) throw Error(ErrorCode::kEmptyQuery, "query has no indexable terms");
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  std::vector<double> scores(passages_.size(), 0.0);
  const double k1 = params_.k1;
  const double b = params_.b;
  for (const auto& term : terms) {
    const auto ti = term_index(term);
    if (ti < 0) continue;
    const auto& list = postings_[static_cast<std::size_t>(ti)];
    const double term_idf = idf(static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      const double tf = p.tf;
      const double dl = doc_lengths_[p.doc];
      scores[p.doc] += term_idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl_));
    }
  }

  std::vector<std::size_t> hits;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    if (scores[d] > 0.0) hits.push_back(d);
  }
  auto better = [&](std::size_t x, std::size_t y) {
    if (scores[x] != scores[y]) return scores[x] > scores[y];
    return passages_[x].id < passages_[y].id;
  };
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(), better);

  std::vector<ScoredPassage> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({passages_[hits[i]], scores[hits[i]], static_cast<int>(i + 1)});
  }
  return out;
}

void Bm25Index::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    return out;
  };

  nlohmann::json manifest = {
      {"format", "mcdec-bm25"},
      {"format_version", kFormatVersion},
      {"k1", params_.k1},
      {"b", params_.b},
      {"num_docs", passages_.size()},
      {"num_terms", terms_.size()},
      {"avgdl", avgdl_},
  };
  open(kManifest) << manifest.dump(2) << '\n';

  auto passages_out = open(kPassages);
  for (std::size_t d = 0; d < passages_.size(); ++d) {
    const auto& p = passages_[d];
    passages_out << nlohmann::json{{"id", p.id}, {"title", p.title}, {"text", p.text},
                                   {"length", doc_lengths_[d]}}
                        .dump()
                 << '\n';
  }

  auto postings_out = open(kPostings);
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    postings_out << terms_[t] << '\t' << postings_[t].size() << '\t';
    for (std::size_t i = 0; i < postings_[t].size(); ++i) {
      if (i > 0) postings_out << ' ';
      postings_out << postings_[t][i].doc << ':' << postings_[t][i].tf;
    }
    postings_out << '\n';
  }
}

Bm25Index Bm25Index::load(const std::filesystem::path& dir) {
  Bm25Index index;
  std::ifstream manifest_in(dir / kManifest);
  if (!manifest_in) throw Error(ErrorCode::kIoError, "no index manifest in " + dir.string());
  std::size_t num_docs = 0;
  std::size_t num_terms = 0;
  try {
    nlohmann::json manifest;
    manifest_in >> manifest;
    if (manifest.at("format").get<std::string>() != "mcdec-bm25" ||
        manifest.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::kParseError, "unsupported index format in " + dir.string());
    }
    index.params_.k1 = manifest.at("k1").get<double>();
    index.params_.b = manifest.at("b").get<double>();
    num_docs = manifest.at("num_docs").get<std::size_t>();
    num_terms = manifest.at("num_terms").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, (dir / kManifest).string() + ": " + e.what());
  }

  for_each_jsonl(dir / kPassages, [&](const nlohmann::json& j, std::size_t line) {
    try {
      index.passages_.push_back({j.at("id").get<std::string>(), j.at("title").get<std::string>(),
                                 j.at("text").get<std::string>()});
      index.doc_lengths_.push_back(j.at("length").get<std::uint32_t>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, std::string(kPassages) + ":" + std::to_string(line) + ": " + e.what());
    }
  });

  std::ifstream postings_in(dir / kPostings, std::ios::binary);
  if (!postings_in) throw Error(ErrorCode::kIoError, "no postings file in " + dir.string());
  std::string line;
  while (std::getline(postings_in, line)) {
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos) {
      throw Error(ErrorCode::kParseError, "malformed postings line in " + dir.string());
    }
    index.terms_.push_back(line.substr(0, tab1));
    const auto df = std::stoul(line.substr(tab1 + 1, tab2 - tab1 - 1));
    std::vector<Posting> list;
    std::istringstream entries(line.substr(tab2 + 1));
    std::string entry;
    while (entries >> entry) {
      const auto colon = entry.find(':');
      if (colon == std::string::npos) throw Error(ErrorCode::kParseError, "malformed posting '" + entry + "'");
      const auto doc = std::stoul(entry.substr(0, colon));
      if (doc >= num_docs) throw Error(ErrorCode::kParseError, "posting refers to unknown document");
      list.push_back({static_cast<std::uint32_t>(doc),
                      static_cast<std::uint32_t>(std::stoul(entry.substr(colon + 1)))});
    }
    if (list.size() != df) throw Error(ErrorCode::kParseError, "document frequency mismatch for '" + index.terms_.back() + "'");
    index.postings_.push_back(std::move(list));
  }
  if (index.passages_.size() != num_docs || index.terms_.size() != num_terms || num_docs == 0) {
    throw Error(ErrorCode::kParseError, "index in " + dir.string() + " is inconsistent with its manifest");
  }
  index.finalize();
  return index;
}

EmbeddingVector normalize_embedding(std::vector<double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq == 0.0) return {std::move(values), false};
  const double norm = std::sqrt(sq);
  for (double& v : values) v /= norm;
  return {std::move(values), true};
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding dimensions differ: " + std::to_string(a.values.size()) + " vs " +
                    std::to_string(b.values.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return dot;
}

double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  return std::clamp(1.0 - cosine_similarity(a, b), 0.0, 2.0);
}

std::vector<EmbeddingVector> Embedder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

TfidfEmbedder::TfidfEmbedder(std::shared_ptr<const Bm25Index> index) : index_(std::move(index)) {
  const auto n = static_cast<double>(index_->num_docs());
  idf_.reserve(index_->terms().size());
  for (std::size_t t = 0; t < index_->terms().size(); ++t) {
    const auto df = static_cast<double>(index_->postings(t).size());
    idf_.push_back(std::log((1.0 + n) / (1.0 + df)) + 1.0);
  }
}

EmbeddingVector TfidfEmbedder::embed(std::string_view text) const {
  std::vector<double> values(idf_.size(), 0.0);
  for (const auto& term : analyze(text)) {
    const auto t = index_->term_index(term);
    if (t >= 0) values[static_cast<std::size_t>(t)] += 1.0;
  }
  for (std::size_t t = 0; t < values.size(); ++t) values[t] *= idf_[t];
  return normalize_embedding(std::move(values));
}

RemoteEmbedder::RemoteEmbedder(std::string base_url, double timeout_seconds)
    : pool_(std::move(base_url), timeout_seconds) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  return embed_batch({std::string(text)}).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
  const nlohmann::json body = {{"texts", texts}};
  const auto reply = pool_.request("/v1/embed", &body, ErrorCode::kRemoteUnavailable);
  std::vector<EmbeddingVector> out;
  try {
    for (const auto& v : reply.at("vectors")) out.push_back(normalize_embedding(v.get<std::vector<double>>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, "bad /v1/embed reply: " + std::string(e.what()));
  }
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::kParseError, "/v1/embed returned a different number of vectors");
  }
  return out;
}

}  // namespace mcdec
