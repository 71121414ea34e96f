// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "textprune/corpus.hpp"
#include "textprune/features.hpp"
#include "textprune/linear_model.hpp"

namespace textprune::pruning {

/// Pool example annotated with the teacher's verdict. Confidence is |logit|,
/// the distance from the decision boundary, so "misclassified with high
/// confidence" reads as "confidently wrong".
struct ScoredExample {
  corpus::Example example;
  double logit = 0.0;
  corpus::Label predicted = corpus::Label::negative;
  bool correct = false;  ///< predicted == gold label
  double confidence = 0.0;
};

enum class StrategyKind : std::uint8_t { easy, hard, random };

struct SelectionStrategy {
  StrategyKind kind = StrategyKind::easy;
  std::size_t k = 10000;
  std::uint64_t random_seed = 0;  ///< consulted by random only
};

/// One ScoredExample per pool example, in pool order. Pure function of its
/// inputs. Throws DataError when the teacher and vectorizer dimensions
/// disagree.
std::vector<ScoredExample> score_pool(const model::LinearModel& teacher,
                                      const features::Vectorizer& v,
                                      const corpus::Dataset& pool);

/// External-teacher hook: builds the scored list from a CSV of `id,logit`
/// rows using the same tie and confidence rules as score_pool. The file's ids
/// must exactly cover the pool; the result is in pool order.
std::vector<ScoredExample> import_scores(const corpus::Dataset& pool,
                                         const std::filesystem::path& path);

struct SelectionResult {
  corpus::Dataset subset;
  StrategyKind kind = StrategyKind::easy;
  std::size_t requested = 0;  ///< the strategy's k
  std::size_t eligible = 0;   ///< size of the candidate set before taking k
  bool shortfall = false;     ///< eligible < requested (reported, not an error)
};

/// Easy:   misclassified only, ascending (confidence, id), first k.
/// Hard:   misclassified only, descending confidence with ascending id
///         tiebreak, first k.
/// Random: k drawn uniformly without replacement from the FULL scored list
///         (misclassified or not) by a forward partial Fisher-Yates pass over
///         pool indices under SplitMix64(random_seed); the subset keeps pool
///         order.
/// When the candidate set has fewer than k members, all of them are returned
/// and the shortfall flag is set.
SelectionResult select(std::span<const ScoredExample> scored,
                       const SelectionStrategy& strategy);

struct SelectionReport {
  StrategyKind kind = StrategyKind::easy;
  std::size_t requested = 0;
  std::size_t selected = 0;
  std::size_t eligible = 0;
  bool shortfall = false;
  bool empty = false;
  std::size_t n_positive = 0;  ///< gold labels of the subset
  std::size_t n_negative = 0;
  double confidence_min = 0.0;
  double confidence_mean = 0.0;
  double confidence_max = 0.0;
};

/// Class balance and confidence statistics of a selection. Throws DataError
/// if the subset contains an id that is not in the scored list.
SelectionReport selection_report(const SelectionResult& result,
                                 std::span<const ScoredExample> scored);

/// CLI vocabulary: easy | hard | random.
StrategyKind parse_strategy(std::string_view token);
std::string_view strategy_label(StrategyKind kind) noexcept;

/// Scores CSV (`id,logit`) as consumed by import_scores.
void write_scores_csv(std::span<const ScoredExample> scored,
                      const std::filesystem::path& path);

}  // namespace textprune::pruning
