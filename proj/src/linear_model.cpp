// SPDX-License-Identifier: Apache-2.0
#include "textprune/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "textprune/errors.hpp"
#include "textprune/rng.hpp"

namespace textprune::model {

LinearModel init_model(std::size_t dim) {
  if (dim == 0) throw ConfigError("model dimension must be positive");
  LinearModel m;
  m.weights.assign(dim, 0.0);
  m.bias = 0.0;
  return m;
}

double logit(const LinearModel& m, const features::FeatureVector& x) {
  // Entries are sorted by index, so the last one bounds the range check.
  if (!x.entries.empty() && x.entries.back().first >= m.dim()) {
    throw DataError("feature index " + std::to_string(x.entries.back().first) +
                    " out of range for model dim " + std::to_string(m.dim()));
  }
  double s = m.bias;
  for (const auto& [idx, val] : x.entries) s += m.weights[idx] * val;
  return s;
}

corpus::Label predict(const LinearModel& m, const features::FeatureVector& x) {
  return logit(m, x) > 0.0 ? corpus::Label::positive : corpus::Label::negative;
}

namespace {

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (cfg.epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(cfg.base_lr >= 0.0) || !std::isfinite(cfg.base_lr)) {
    throw ConfigError("base_lr must be finite and >= 0");
  }
  if (!(cfg.weight_decay >= 0.0) || !std::isfinite(cfg.weight_decay)) {
    throw ConfigError("weight_decay must be finite and >= 0");
  }
}

}  // namespace

TrainResult train(const corpus::Dataset& data, const features::Vectorizer& v,
                  const losses::LossSpec& spec, const TrainConfig& cfg) {
  validate(cfg);
  losses::validate(spec);
  if (data.empty()) throw DataError("cannot train on an empty dataset");

  const std::size_t n = data.size();
  std::vector<features::FeatureVector> feats;
  std::vector<int> labels;
  feats.reserve(n);
  labels.reserve(n);
  for (const corpus::Example& e : data) {
    feats.push_back(v.transform(e.text));
    labels.push_back(losses::margin_label(e.label));
  }

  TrainResult out;
  out.model = init_model(v.dim());
  std::vector<double>& w = out.model.weights;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<double> grads(cfg.batch_size);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle_each_epoch) {
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      Rng rng(mix_seed(cfg.seed, "shuffle/" + std::to_string(epoch)));
      rng.shuffle(order);
    }

    double epoch_loss_sum = 0.0;
    for (std::size_t batch_start = 0; batch_start < n;
         batch_start += cfg.batch_size) {
      const std::size_t batch_end = std::min(n, batch_start + cfg.batch_size);
      const std::size_t batch_n = batch_end - batch_start;
      ++step;

      // Logits and gradients against the pre-step parameters.
      double loss_sum = 0.0;
      for (std::size_t b = 0; b < batch_n; ++b) {
        const std::size_t i = order[batch_start + b];
        const double s = logit(out.model, feats[i]);
        loss_sum += losses::loss_value(spec, s, labels[i]);
        grads[b] = losses::loss_grad(spec, s, labels[i]);
      }
      const double mean_loss = loss_sum / static_cast<double>(batch_n);
      if (!std::isfinite(mean_loss)) {
        throw NumericError("non-finite loss at step " + std::to_string(step));
      }
      out.history.step_loss.push_back(mean_loss);
      epoch_loss_sum += loss_sum;

      const double warm =
          cfg.warmup_steps == 0
              ? 1.0
              : std::min(1.0, static_cast<double>(step) /
                                  static_cast<double>(cfg.warmup_steps));
      const double lr = cfg.base_lr * warm;

      // Gradient step, accumulated in example order within the batch.
      for (std::size_t b = 0; b < batch_n; ++b) {
        const std::size_t i = order[batch_start + b];
        const double coef = -lr * grads[b] / static_cast<double>(batch_n);
        if (coef == 0.0) continue;
        for (const auto& [idx, val] : feats[i].entries) w[idx] += coef * val;
        out.model.bias += coef;
      }

      // Decoupled weight decay; the bias is never decayed.
      if (cfg.weight_decay > 0.0 && lr > 0.0) {
        const double shrink = 1.0 - lr * cfg.weight_decay;
        for (double& wi : w) wi *= shrink;
      }
    }
    out.history.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(n));
  }
  out.history.steps_total = step;
  return out;
}

void save_model(const LinearModel& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "textprune.model.v1";
  j["dim"] = m.dim();
  j["bias"] = m.bias;
  j["weights"] = m.weights;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump() << '\n';
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(path.string() + ": malformed model file: " + ex.what());
  }
  if (!j.is_object() || j.value("format", "") != "textprune.model.v1") {
    throw DataError(path.string() + ": not a textprune.model.v1 file");
  }
  LinearModel m;
  m.bias = j.at("bias").get<double>();
  m.weights = j.at("weights").get<std::vector<double>>();
  if (m.weights.size() != j.at("dim").get<std::size_t>()) {
    throw DataError(path.string() + ": weight count does not match dim");
  }
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw DataError(path.string() + ": non-finite weight");
  }
  if (!std::isfinite(m.bias)) throw DataError(path.string() + ": non-finite bias");
  return m;
}

void write_history_csv(const TrainHistory& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "step,mean_loss\n";
  char buf[64];
  for (std::size_t i = 0; i < h.step_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i + 1, h.step_loss[i]);
    out << buf;
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace textprune::model
