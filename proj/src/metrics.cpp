// SPDX-License-Identifier: Apache-2.0
#include "textprune/metrics.hpp"

#include <string>

#include "textprune/errors.hpp"

namespace textprune::metrics {

ConfusionMatrix confusion(std::span<const corpus::Label> predictions,
                          std::span<const corpus::Label> gold) {
  if (predictions.size() != gold.size()) {
    throw DataError("confusion: got " + std::to_string(predictions.size()) +
                    " predictions for " + std::to_string(gold.size()) +
                    " gold labels");
  }
  if (predictions.empty()) throw DataError("confusion: empty input");

  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool pred_pos = predictions[i] == corpus::Label::positive;
    const bool gold_pos = gold[i] == corpus::Label::positive;
    if (pred_pos && gold_pos) ++cm.tp;
    else if (pred_pos && !gold_pos) ++cm.fp;
    else if (!pred_pos && gold_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

Scores scores(const ConfusionMatrix& cm) noexcept {
  // 0/0 denominators yield 0 so degenerate all-negative predictors stay
  // well-defined.
  Scores s;
  const double tp = static_cast<double>(cm.tp);
  if (cm.tp + cm.fp > 0) s.precision = tp / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn > 0) s.recall = tp / static_cast<double>(cm.tp + cm.fn);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

double f1(const ConfusionMatrix& cm) noexcept { return scores(cm).f1; }

}  // namespace textprune::metrics
