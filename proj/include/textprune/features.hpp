// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "textprune/corpus.hpp"

namespace textprune::features {

inline constexpr std::size_t kDefaultDim = std::size_t{1} << 18;

/// Lowercases (ASCII), splits on Unicode whitespace, strips leading/trailing
/// punctuation from each token except '#' and '@' prefixes, and emits emoji
/// code points as their own tokens. Deterministic.
std::vector<std::string> tokenize(std::string_view text);

/// Sparse vector with entries sorted by index and no stored zeros.
/// L2 norm is 1 for any text that yields at least one token, 0 otherwise.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t nnz() const noexcept { return entries.size(); }
};

/// Hashed unigram+bigram TF-IDF featurizer. No stored vocabulary: n-grams are
/// FNV-1a-64 hashed and masked into a power-of-two dimension, so memory stays
/// bounded on large pools and transform is stateless beyond the idf table.
/// Immutable after fit; transform may be called concurrently.
class Vectorizer {
 public:
  /// Fits document frequencies over the corpus. idf[b] = ln((1+N)/(1+df_b))+1.
  /// Throws DataError on an empty corpus, ConfigError if dim is not a power
  /// of two.
  static Vectorizer fit(const corpus::Dataset& corpus,
                        std::size_t dim = kDefaultDim);

  /// Hashed term frequencies of 1- and 2-grams weighted by idf (unseen
  /// buckets weigh 1), then L2-normalized.
  FeatureVector transform(std::string_view text) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t documents_fitted() const noexcept { return n_documents_; }

  /// idf of a bucket; 1.0 for buckets unseen during fit.
  double idf(std::uint32_t bucket) const noexcept;

  /// Versioned JSON sidecar (dim, document count, sorted idf entries).
  void save(const std::filesystem::path& path) const;
  static Vectorizer load(const std::filesystem::path& path);

  /// Bucket of one n-gram under this vectorizer's dimension. Bigrams are the
  /// two tokens joined with '\x1f' before hashing.
  std::uint32_t bucket_of(std::string_view ngram) const noexcept;

 private:
  Vectorizer() = default;

  std::size_t dim_ = 0;
  std::size_t n_documents_ = 0;
  std::unordered_map<std::uint32_t, double> idf_;
};

/// Byte separator used to join bigram tokens before hashing.
inline constexpr char kNgramJoin = '\x1f';

}  // namespace textprune::features
