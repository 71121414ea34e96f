// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "textprune/corpus.hpp"
#include "textprune/features.hpp"
#include "textprune/losses.hpp"

namespace textprune::model {

/// Dense linear binary classifier: logit = w . x + b.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dim() const noexcept { return weights.size(); }
};

/// Zero weights and bias (convex objective, nothing to symmetry-break; a
/// fresh model predicts negative everywhere under the tie rule).
LinearModel init_model(std::size_t dim);

/// Sparse dot product plus bias. Throws DataError when a feature index is out
/// of range for the model.
double logit(const LinearModel& m, const features::FeatureVector& x);

/// Positive iff logit > 0; a tie at exactly 0 resolves negative.
corpus::Label predict(const LinearModel& m, const features::FeatureVector& x);

/// Mini-batch SGD with linear warmup and decoupled weight decay.
struct TrainConfig {
  std::size_t batch_size = 32;
  double weight_decay = 0.01;
  std::size_t warmup_steps = 500;
  std::size_t epochs = 5;
  double base_lr = 0.05;
  std::uint64_t seed = 0;
  bool shuffle_each_epoch = true;
};

struct TrainHistory {
  std::vector<double> step_loss;   ///< mean batch loss per step
  std::vector<double> epoch_loss;  ///< mean per-example loss per epoch
  std::size_t steps_total = 0;
};

struct TrainResult {
  LinearModel model;
  TrainHistory history;
};

/// Deterministic training loop:
///   - epoch shuffles come from a counter-based generator keyed on
///     (cfg.seed, epoch) via mix_seed(seed, "shuffle/<epoch>");
///   - batch gradient = mean over the batch of loss_grad(spec, logit, y) * x,
///     logits computed before any update, accumulation in example order;
///   - lr at 1-based step t = base_lr * min(1, t / warmup_steps)
///     (warmup_steps = 0 means no warmup);
///   - after the gradient step, weights *= (1 - lr_t * weight_decay); the
///     bias is never decayed;
///   - the last partial batch is kept, averaged over its actual size.
/// Identical inputs give bit-identical parameters and history. Throws
/// DataError on an empty dataset and NumericError (naming the step) when a
/// non-finite loss appears.
TrainResult train(const corpus::Dataset& data, const features::Vectorizer& v,
                  const losses::LossSpec& spec, const TrainConfig& cfg);

/// Versioned JSON model file (dim, bias, dense weights).
void save_model(const LinearModel& m, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

/// `step,mean_loss` CSV, one row per training step.
void write_history_csv(const TrainHistory& h, const std::filesystem::path& path);

}  // namespace textprune::model
