// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

#include "textprune/corpus.hpp"

namespace textprune::metrics {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

/// Counts with positive = sarcastic. Throws DataError on length mismatch or
/// empty input.
ConfusionMatrix confusion(std::span<const corpus::Label> predictions,
                          std::span<const corpus::Label> gold);

/// Positive-class precision/recall/F1. Any 0/0 denominator yields 0.
struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Scores scores(const ConfusionMatrix& cm) noexcept;
double f1(const ConfusionMatrix& cm) noexcept;

}  // namespace textprune::metrics
