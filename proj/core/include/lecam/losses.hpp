#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lecam/anchors.hpp"

namespace lecam {

enum class LossFamily { WGAN, Hinge, NonSaturated, LeastSquares, RaHinge };

LossFamily loss_family_from_string(const std::string& name);
const char* to_string(LossFamily family);

/// Selects the loss family via its per-prediction mapping functions and the
/// regularizer configuration.
struct LossSpec {
  LossFamily family = LossFamily::Hinge;
  double lambda = 0.3;
  bool reg_real = true;
  bool reg_fake = true;
  bool single_anchor = false;
};

void validate(const LossSpec& spec);

/// Raw (pre-activation) discriminator outputs for one real and one generated
/// batch.
struct BatchPredictions {
  std::vector<double> d_real;
  std::vector<double> d_fake;
};

/// The anchor pair the regularizer actually targets: (alpha_r, alpha_f), or
/// (alpha, -alpha) in single-anchor mode.
std::pair<double, double> effective_anchors(const LossSpec& spec,
                                            const AnchorState& anchors);

/// Anchor regularizer: mean over real batch of (D(x) - alpha_f)^2 plus mean
/// over fake batch of (D(G(z)) - alpha_r)^2, each term gated by its reg flag.
double r_lc(const LossSpec& spec, const BatchPredictions& preds,
            const AnchorState& anchors);

/// Regularized discriminator objective -V_D + lambda * R_LC.
double discriminator_objective(const LossSpec& spec,
                               const BatchPredictions& preds,
                               const AnchorState& anchors);

struct DiscriminatorLossGrad {
  double value = 0.0;
  double r_lc_value = 0.0;
  std::vector<double> grad_real;  // d(value)/d d_real[i]
  std::vector<double> grad_fake;  // d(value)/d d_fake[j]
};

/// Objective value plus analytic gradients with respect to every raw
/// prediction. Anchors are treated as constants.
DiscriminatorLossGrad discriminator_objective_grad(const LossSpec& spec,
                                                   const BatchPredictions& preds,
                                                   const AnchorState& anchors);

/// Generator objective mean g_G(D(G(z))). d_real is consulted only by
/// RaHinge and may be empty otherwise.
double generator_objective(const LossSpec& spec,
                           const std::vector<double>& d_fake,
                           const std::vector<double>& d_real = {});

struct GeneratorLossGrad {
  double value = 0.0;
  std::vector<double> grad_fake;  // d(value)/d d_fake[j]; real preds are
                                  // constants w.r.t. the generator
};

GeneratorLossGrad generator_objective_grad(const LossSpec& spec,
                                           const std::vector<double>& d_fake,
                                           const std::vector<double>& d_real = {});

/// True when single-anchor mode is active, the live anchor alpha is positive,
/// and lambda >= 1/(2 alpha). The trainer logs a warning and continues.
bool lambda_constraint_violated(const LossSpec& spec,
                                const AnchorState& anchors);

}  // namespace lecam
