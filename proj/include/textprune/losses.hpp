// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "textprune/corpus.hpp"

namespace textprune::losses {

enum class LossKind : std::uint8_t {
  cross_entropy,
  weighted_cross_entropy,
  hinge,
  squared_hinge,
};

/// Training objective. Class weights are consulted only by
/// weighted_cross_entropy; the defaults put 0.75 on the sarcastic class.
struct LossSpec {
  LossKind kind = LossKind::cross_entropy;
  double w_positive = 0.75;
  double w_negative = 0.25;
};

// All four losses are functions of the margin m = y*s for label y in {-1,+1}
// (+1 = sarcastic) and logit s.
//
//   cross_entropy           ln(1 + exp(-m)), stable branches for |m| > 30
//   weighted_cross_entropy  w_y * cross_entropy
//   hinge                   max(0, 1 - m)
//   squared_hinge           max(0, 1 - m)^2

/// Loss value; >= 0 everywhere. Throws NumericError on non-finite s,
/// ConfigError unless y is +1 or -1.
double loss_value(const LossSpec& spec, double s, int y);

/// d loss / d s. Hinge uses subgradient 0 at m = 1.
double loss_grad(const LossSpec& spec, double s, int y);

/// CLI vocabulary: ce | wce | hinge | sq_hinge. Throws ConfigError on
/// anything else.
LossSpec parse_loss(std::string_view token);

std::string_view loss_label(LossKind kind) noexcept;

/// Maps the corpus binary label onto the margin encoding.
inline int margin_label(corpus::Label label) noexcept {
  return label == corpus::Label::positive ? +1 : -1;
}

/// Throws ConfigError unless both weights lie in (0, 1).
void validate(const LossSpec& spec);

}  // namespace textprune::losses
