#include "lecam/anchors.hpp"

#include <cmath>
#include <stdexcept>

namespace lecam {

AnchorState make_anchors(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("anchors: gamma must be in [0, 1)");
  }
  AnchorState s;
  s.gamma = gamma;
  return s;
}

AnchorState ema_update(const AnchorState& state, double v_real, double v_fake) {
  if (!std::isfinite(v_real) || !std::isfinite(v_fake)) {
    throw std::invalid_argument("anchors: non-finite observation");
  }
  if (!(state.gamma >= 0.0 && state.gamma < 1.0)) {
    throw std::invalid_argument("anchors: gamma must be in [0, 1)");
  }
  AnchorState next = state;
  next.alpha_r = state.gamma * state.alpha_r + (1.0 - state.gamma) * v_real;
  next.alpha_f = state.gamma * state.alpha_f + (1.0 - state.gamma) * v_fake;
  next.step = state.step + 1;
  return next;
}

double single_anchor_view(const AnchorState& state) { return state.alpha_r; }

}  // namespace lecam
