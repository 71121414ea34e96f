// SPDX-License-Identifier: Apache-2.0
#include "textprune/losses.hpp"

#include <cmath>

#include "textprune/errors.hpp"

namespace textprune::losses {

namespace {

void check_inputs(double s, int y) {
  if (!std::isfinite(s)) throw NumericError("non-finite logit passed to loss");
  if (y != 1 && y != -1) throw ConfigError("loss label must be +1 or -1");
}

double cross_entropy(double m) noexcept {
  if (m < -30.0) return -m;
  if (m > 30.0) return std::exp(-m);
  return std::log1p(std::exp(-m));
}

// sigma(-m) = 1 / (1 + exp(m)), stable on both tails.
double sigmoid_neg(double m) noexcept {
  if (m >= 0.0) {
    const double t = std::exp(-m);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double class_weight(const LossSpec& spec, int y) noexcept {
  return y > 0 ? spec.w_positive : spec.w_negative;
}

}  // namespace

double loss_value(const LossSpec& spec, double s, int y) {
  check_inputs(s, y);
  const double m = static_cast<double>(y) * s;
  switch (spec.kind) {
    case LossKind::cross_entropy:
      return cross_entropy(m);
    case LossKind::weighted_cross_entropy:
      return class_weight(spec, y) * cross_entropy(m);
    case LossKind::hinge:
      return std::max(0.0, 1.0 - m);
    case LossKind::squared_hinge: {
      const double gap = std::max(0.0, 1.0 - m);
      return gap * gap;
    }
  }
  throw ConfigError("unknown loss kind");
}

double loss_grad(const LossSpec& spec, double s, int y) {
  check_inputs(s, y);
  const double yd = static_cast<double>(y);
  const double m = yd * s;
  switch (spec.kind) {
    case LossKind::cross_entropy:
      return -yd * sigmoid_neg(m);
    case LossKind::weighted_cross_entropy:
      return class_weight(spec, y) * -yd * sigmoid_neg(m);
    case LossKind::hinge:
      return m < 1.0 ? -yd : 0.0;  // subgradient 0 at the kink
    case LossKind::squared_hinge:
      return -2.0 * yd * std::max(0.0, 1.0 - m);
  }
  throw ConfigError("unknown loss kind");
}

LossSpec parse_loss(std::string_view token) {
  LossSpec spec;
  if (token == "ce") {
    spec.kind = LossKind::cross_entropy;
  } else if (token == "wce") {
    spec.kind = LossKind::weighted_cross_entropy;
  } else if (token == "hinge") {
    spec.kind = LossKind::hinge;
  } else if (token == "sq_hinge") {
    spec.kind = LossKind::squared_hinge;
  } else {
    throw ConfigError("unknown loss '" + std::string(token) +
                      "' (expected ce|wce|hinge|sq_hinge)");
  }
  return spec;
}

std::string_view loss_label(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::cross_entropy: return "ce";
    case LossKind::weighted_cross_entropy: return "wce";
    case LossKind::hinge: return "hinge";
    case LossKind::squared_hinge: return "sq_hinge";
  }
  return "?";
}

void validate(const LossSpec& spec) {
  auto in_unit = [](double w) { return w > 0.0 && w < 1.0; };
  if (!in_unit(spec.w_positive) || !in_unit(spec.w_negative)) {
    throw ConfigError("class weights must lie in (0, 1)");
  }
}

}  // namespace textprune::losses
