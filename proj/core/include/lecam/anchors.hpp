#pragma once

#include <cstdint>

namespace lecam {

/// Exponential-moving-average pair tracking the discriminator's mean
/// predictions on real (alpha_r) and generated (alpha_f) batches.
struct AnchorState {
  double alpha_r = 0.0;
  double alpha_f = 0.0;
  double gamma = 0.99;  // decay factor, in [0, 1)
  std::uint64_t step = 0;
};

/// Validates gamma and returns a zero-initialized state.
AnchorState make_anchors(double gamma);

/// One EMA step: alpha' = gamma * alpha + (1 - gamma) * v, both sides.
/// Throws std::invalid_argument on non-finite observations.
AnchorState ema_update(const AnchorState& state, double v_real, double v_fake);

/// The single-anchor reduction alpha = alpha_r; callers treat the fake-side
/// anchor as -alpha.
double single_anchor_view(const AnchorState& state);

}  // namespace lecam
