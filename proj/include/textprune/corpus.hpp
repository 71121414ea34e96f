// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace textprune::corpus {

/// Binary class. Positive means sarcastic.
enum class Label : std::uint8_t { negative = 0, positive = 1 };

/// Where an example came from.
enum class Source : std::uint8_t { base, pool, synthetic };

/// One labeled short text.
struct Example {
  std::string id;
  std::string text;
  Label label = Label::negative;
  Source source = Source::base;
};

struct ClassCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
};

/// Ordered, immutable-after-build collection of examples. Iteration order is
/// insertion order. Ids are unique within a dataset; texts are nonempty after
/// whitespace trimming (enforced on add).
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::string name) : name_(std::move(name)) {}

  /// Appends an example. Throws DataError on empty/duplicate id or on text
  /// that is empty after trimming.
  void add(Example e);

  void reserve(std::size_t n) { examples_.reserve(n); }

  const std::vector<Example>& examples() const noexcept { return examples_; }
  const Example& operator[](std::size_t i) const { return examples_[i]; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const std::string& name() const noexcept { return name_; }
  bool contains_id(const std::string& id) const { return ids_.count(id) > 0; }

  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }

 private:
  std::string name_;
  std::vector<Example> examples_;
  std::unordered_set<std::string> ids_;
};

ClassCounts class_counts(const Dataset& d) noexcept;

enum class FileFormat : std::uint8_t { csv, jsonl };

/// generic: texts stored verbatim. sarc: every standalone "/s" token (the
/// distant-supervision label marker) is stripped from the text so the label
/// source cannot leak into features.
enum class Schema : std::uint8_t { generic, sarc };

/// Normalizes a label field: "0"/"1" or "sarcastic"/"not_sarcastic".
/// Throws DataError on anything else.
Label parse_label(std::string_view value);

/// Removes each whitespace-delimited "/s" token. The match is whole-token
/// only ("/sarcasm" is untouched); surviving tokens are re-joined with single
/// spaces and the result is trimmed.
std::string strip_sarc_markers(std::string_view text);

/// Loads a dataset from CSV (header `id,text,label`) or JSONL (objects with
/// keys `id`, `text`, `label`). File order is preserved. When `name` is
/// nonempty, ids are namespaced as "<name>/<id>" so that datasets from
/// different sources can never collide under augment; when empty, ids are
/// kept verbatim and the dataset is named after the file stem.
Dataset load_dataset(const std::filesystem::path& path, FileFormat format,
                     Schema schema, std::string_view name = {});

/// Writes the CSV schema bit-exactly: header `id,text,label`, LF line
/// endings, labels as 0/1, fields quoted only when needed.
void write_dataset(const Dataset& d, const std::filesystem::path& path);

/// Concatenation: base order then extra order. Throws DataError on id
/// collision.
Dataset augment(const Dataset& base, const Dataset& extra, std::string name);

/// Parameters of the synthetic noisy-pool generator. Default noise rates
/// model distant supervision: 2% false negatives, 1% false positives.
struct NoisePoolConfig {
  std::size_t n_pool = 10000;
  std::size_t n_base = 500;
  std::size_t dim_latent = 16;
  double separation = 4.0;  ///< distance between class centers in latent space
  double false_negative_rate = 0.02;  ///< positives relabeled negative
  double false_positive_rate = 0.01;  ///< negatives relabeled positive
  std::uint64_t seed = 0;
};

struct SyntheticBundle {
  Dataset base;                          ///< clean labels
  Dataset pool;                          ///< labels flipped at configured rates
  std::vector<Label> clean_pool_labels;  ///< pre-flip pool labels, pool order
};

/// Deterministic synthetic scenario: latent points are drawn from two
/// Gaussian class clusters whose centers sit `separation` apart; each point is
/// rendered as one pseudo-token per latent coordinate, "f<i>_+" or "f<i>_-"
/// after the coordinate's sign, so the hashed featurizer recovers the latent
/// signal nearly losslessly. Pool labels are then flipped: round-half-up
/// counts of fn_rate x positives and fp_rate x negatives. Fully determined by
/// the seed.
SyntheticBundle generate_synthetic(const NoisePoolConfig& config);

/// Extra clean draw from the same latent mixture (e.g. a test split).
Dataset generate_clean_set(const NoisePoolConfig& config, std::size_t n,
                           std::uint64_t seed, std::string name);

}  // namespace textprune::corpus
