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

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mcdec/remote_backend.hpp"

namespace mcdec {

struct Passage {
  std::string id;
  std::string title;
  std::string text;

  bool operator==(const Passage&) const = default;
};

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter/digit; bytes >= 0x80 are kept inside terms. Empty terms are dropped.
std::vector<std::string> analyze(std::string_view text);

/// Reads a JSONL corpus, one {"id","title","text"} object per line.
std::vector<Passage> load_corpus(const std::filesystem::path& path);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredPassage {
  Passage passage;
  double score = 0.0;
  int rank = 0;
};

/// Okapi BM25 over an in-memory inverted index.
///
/// score(q, d) = sum over distinct query terms t present in d of
///   idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
/// idf(t)     = ln((N - df + 0.5) / (df + 0.5) + 1)
///
/// Immutable after construction; search is safe from any number of threads.
class Bm25Index {
 public:
  static constexpr int kFormatVersion = 1;

  struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;
  };

  /// Throws EmptyCorpus, DuplicatePassageId, or InvalidArgument (empty text,
  /// out-of-range parameters).
  static Bm25Index build(std::vector<Passage> corpus, Bm25Params params = {});

  /// Directory layout documented in docs/index_format.md.
  void save(const std::filesystem::path& dir) const;
  static Bm25Index load(const std::filesystem::path& dir);

  /// Top-k passages with positive score, ties broken by passage id. Throws
  /// EmptyQuery when the query has no terms after analysis.
  std::vector<ScoredPassage> search(std::string_view query, std::size_t k) const;

  std::size_t num_docs() const noexcept { return passages_.size(); }
  double avgdl() const noexcept { return avgdl_; }
  const Bm25Params& params() const noexcept { return params_; }
  const std::vector<Passage>& passages() const noexcept { return passages_; }
  const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }

  /// Sorted index vocabulary; a term's position is its dimension in TF-IDF
  /// embeddings.
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  /// Returns -1 for terms outside the vocabulary.
  std::ptrdiff_t term_index(std::string_view term) const;
  std::uint32_t doc_freq(std::string_view term) const;
  const std::vector<Posting>& postings(std::size_t term_index) const { return postings_[term_index]; }

  double idf(std::uint32_t df) const;

 private:
  Bm25Index() = default;
  void finalize();

  Bm25Params params_;
  std::vector<Passage> passages_;
  std::vector<std::uint32_t> doc_lengths_;
  double avgdl_ = 0.0;
  std::vector<std::string> terms_;
  std::vector<std::vector<Posting>> postings_;
  std::map<std::string, std::size_t, std::less<>> term_lookup_;
};

struct EmbeddingVector {
  std::vector<double> values;
  bool normalized = false;
};

/// 1 - dot(a, b). Throws DimensionMismatch.
double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
  virtual std::string identity() const = 0;
};

/// TF-IDF over an index vocabulary: weight = tf * (ln((1 + N) / (1 + df)) + 1),
/// L2-normalized. Text without indexed terms embeds to the zero vector.
class TfidfEmbedder final : public Embedder {
 public:
  explicit TfidfEmbedder(std::shared_ptr<const Bm25Index> index);

  EmbeddingVector embed(std::string_view text) const override;
  std::string identity() const override { return "tfidf"; }

 private:
  std::shared_ptr<const Bm25Index> index_;
  std::vector<double> idf_;
};

/// POST /v1/embed {"texts": [...]} -> {"vectors": [[...], ...]}. Returned
/// vectors are L2-normalized client-side. Transport errors raise
/// RemoteUnavailable.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(std::string base_url, double timeout_seconds = 30.0);

  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;
  std::string identity() const override { return "remote:" + pool_.base_url(); }

 private:
  HttpPool pool_;
};

/// Scales to unit L2 norm; zero vectors are returned unchanged and flagged
/// as not normalized.
EmbeddingVector normalize_embedding(std::vector<double> values);

}  // namespace mcdec
