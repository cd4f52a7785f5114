#include "lecam/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace lecam {

namespace {

// log(sigmoid(x)) = -softplus(-x), computed without overflow.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_nonempty(const BatchPredictions& preds) {
  if (preds.d_real.empty() || preds.d_fake.empty()) {
    throw std::invalid_argument("losses: empty prediction batch");
  }
}

// -V_D contribution of one real prediction: -f_D(d).
double neg_f_real(LossFamily family, double d) {
  switch (family) {
    case LossFamily::WGAN: return -d;
    case LossFamily::Hinge: return -std::min(0.0, -1.0 + d);
    case LossFamily::NonSaturated: return -log_sigmoid(d);
    case LossFamily::LeastSquares: return (d - 1.0) * (d - 1.0);
    case LossFamily::RaHinge: break;  // batch-level, handled by the caller
  }
  throw std::logic_error("losses: per-sample mapping undefined");
}

double neg_f_real_deriv(LossFamily family, double d) {
  switch (family) {
    case LossFamily::WGAN: return -1.0;
    case LossFamily::Hinge: return d < 1.0 ? -1.0 : 0.0;
    case LossFamily::NonSaturated: return -sigmoid(-d);
    case LossFamily::LeastSquares: return 2.0 * (d - 1.0);
    case LossFamily::RaHinge: break;
  }
  throw std::logic_error("losses: per-sample mapping undefined");
}

// -V_D contribution of one fake prediction: -f_G(d).
double neg_f_fake(LossFamily family, double d) {
  switch (family) {
    case LossFamily::WGAN: return d;
    case LossFamily::Hinge: return -std::min(0.0, -1.0 - d);
    case LossFamily::NonSaturated: return -log_sigmoid(-d);
    case LossFamily::LeastSquares: return d * d;
    case LossFamily::RaHinge: break;
  }
  throw std::logic_error("losses: per-sample mapping undefined");
}

double neg_f_fake_deriv(LossFamily family, double d) {
  switch (family) {
    case LossFamily::WGAN: return 1.0;
    case LossFamily::Hinge: return d > -1.0 ? 1.0 : 0.0;
    case LossFamily::NonSaturated: return sigmoid(d);
    case LossFamily::LeastSquares: return 2.0 * d;
    case LossFamily::RaHinge: break;
  }
  throw std::logic_error("losses: per-sample mapping undefined");
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

// Relativistic average hinge discriminator loss and its prediction gradients.
// -V_D = mean_i relu(1 - (dr_i - mean_f)) + mean_j relu(1 + (df_j - mean_r)).
void rahinge_discriminator(const BatchPredictions& preds, double& value,
                           std::vector<double>* grad_real,
                           std::vector<double>* grad_fake) {
  const double mr = mean(preds.d_real);
  const double mf = mean(preds.d_fake);
  const double nr = static_cast<double>(preds.d_real.size());
  const double nf = static_cast<double>(preds.d_fake.size());

  double real_term = 0.0;
  double real_active = 0.0;  // count of active hinges in the real sum
  for (double d : preds.d_real) {
    const double arg = 1.0 - (d - mf);
    real_term += relu(arg);
    if (arg > 0.0) real_active += 1.0;
  }
  real_term /= nr;

  double fake_term = 0.0;
  double fake_active = 0.0;
  for (double d : preds.d_fake) {
    const double arg = 1.0 + (d - mr);
    fake_term += relu(arg);
    if (arg > 0.0) fake_active += 1.0;
  }
  fake_term /= nf;

  value = real_term + fake_term;
  if (grad_real) {
    grad_real->resize(preds.d_real.size());
    for (std::size_t i = 0; i < preds.d_real.size(); ++i) {
      const double own = (1.0 - (preds.d_real[i] - mf) > 0.0) ? -1.0 / nr : 0.0;
      const double through_mean = -fake_active / (nf * nr);
      (*grad_real)[i] = own + through_mean;
    }
  }
  if (grad_fake) {
    grad_fake->resize(preds.d_fake.size());
    for (std::size_t j = 0; j < preds.d_fake.size(); ++j) {
      const double own = (1.0 + (preds.d_fake[j] - mr) > 0.0) ? 1.0 / nf : 0.0;
      const double through_mean = real_active / (nr * nf);
      (*grad_fake)[j] = own + through_mean;
    }
  }
}

// Symmetric relativistic hinge generator loss:
// L_G = mean_j relu(1 - (df_j - mean_r)) + mean_i relu(1 + (dr_i - mean_f)).
// Real predictions do not depend on G, so only d df_j gradients are reported;
// mean_f does depend on them through the second term.
void rahinge_generator(const std::vector<double>& d_fake,
                       const std::vector<double>& d_real, double& value,
                       std::vector<double>* grad_fake) {
  if (d_real.empty()) {
    throw std::invalid_argument("losses: RaHinge generator needs d_real");
  }
  double mr = 0.0, mf = 0.0;
  for (double d : d_real) mr += d;
  mr /= static_cast<double>(d_real.size());
  for (double d : d_fake) mf += d;
  mf /= static_cast<double>(d_fake.size());
  const double nr = static_cast<double>(d_real.size());
  const double nf = static_cast<double>(d_fake.size());

  double fake_term = 0.0;
  for (double d : d_fake) fake_term += relu(1.0 - (d - mr));
  fake_term /= nf;

  double real_term = 0.0;
  double real_active = 0.0;
  for (double d : d_real) {
    const double arg = 1.0 + (d - mf);
    real_term += relu(arg);
    if (arg > 0.0) real_active += 1.0;
  }
  real_term /= nr;

  value = fake_term + real_term;
  if (grad_fake) {
    grad_fake->resize(d_fake.size());
    for (std::size_t j = 0; j < d_fake.size(); ++j) {
      const double own = (1.0 - (d_fake[j] - mr) > 0.0) ? -1.0 / nf : 0.0;
      const double through_mean = -real_active / (nr * nf);
      (*grad_fake)[j] = own + through_mean;
    }
  }
}

}  // namespace

LossFamily loss_family_from_string(const std::string& name) {
  if (name == "wgan") return LossFamily::WGAN;
  if (name == "hinge") return LossFamily::Hinge;
  if (name == "nonsaturated") return LossFamily::NonSaturated;
  if (name == "leastsquares") return LossFamily::LeastSquares;
  if (name == "rahinge") return LossFamily::RaHinge;
  throw std::invalid_argument("losses: unknown loss family '" + name + "'");
}

const char* to_string(LossFamily family) {
  switch (family) {
    case LossFamily::WGAN: return "wgan";
    case LossFamily::Hinge: return "hinge";
    case LossFamily::NonSaturated: return "nonsaturated";
    case LossFamily::LeastSquares: return "leastsquares";
    case LossFamily::RaHinge: return "rahinge";
  }
  throw std::logic_error("losses: unknown family");
}

void validate(const LossSpec& spec) {
  if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) {
    throw std::invalid_argument("losses: lambda must be finite and >= 0");
  }
}

std::pair<double, double> effective_anchors(const LossSpec& spec,
                                            const AnchorState& anchors) {
  if (spec.single_anchor) {
    const double alpha = single_anchor_view(anchors);
    return {alpha, -alpha};
  }
  return {anchors.alpha_r, anchors.alpha_f};
}

double r_lc(const LossSpec& spec, const BatchPredictions& preds,
            const AnchorState& anchors) {
  require_nonempty(preds);
  const auto [alpha_r, alpha_f] = effective_anchors(spec, anchors);
  if (!std::isfinite(alpha_r) || !std::isfinite(alpha_f)) {
    throw std::invalid_argument("losses: non-finite anchors");
  }
  double value = 0.0;
  if (spec.reg_real) {
    double s = 0.0;
    for (double d : preds.d_real) {
      const double e = d - alpha_f;
      s += e * e;
    }
    value += s / static_cast<double>(preds.d_real.size());
  }
  if (spec.reg_fake) {
    double s = 0.0;
    for (double d : preds.d_fake) {
      const double e = d - alpha_r;
      s += e * e;
    }
    value += s / static_cast<double>(preds.d_fake.size());
  }
  return value;
}

double discriminator_objective(const LossSpec& spec,
                               const BatchPredictions& preds,
                               const AnchorState& anchors) {
  require_nonempty(preds);
  validate(spec);
  double neg_v_d = 0.0;
  if (spec.family == LossFamily::RaHinge) {
    rahinge_discriminator(preds, neg_v_d, nullptr, nullptr);
  } else {
    double real_sum = 0.0, fake_sum = 0.0;
    for (double d : preds.d_real) real_sum += neg_f_real(spec.family, d);
    for (double d : preds.d_fake) fake_sum += neg_f_fake(spec.family, d);
    neg_v_d = real_sum / static_cast<double>(preds.d_real.size()) +
              fake_sum / static_cast<double>(preds.d_fake.size());
  }
  return neg_v_d + spec.lambda * r_lc(spec, preds, anchors);
}

DiscriminatorLossGrad discriminator_objective_grad(const LossSpec& spec,
                                                   const BatchPredictions& preds,
                                                   const AnchorState& anchors) {
  require_nonempty(preds);
  validate(spec);
  DiscriminatorLossGrad out;
  const double nr = static_cast<double>(preds.d_real.size());
  const double nf = static_cast<double>(preds.d_fake.size());

  double neg_v_d = 0.0;
  if (spec.family == LossFamily::RaHinge) {
    rahinge_discriminator(preds, neg_v_d, &out.grad_real, &out.grad_fake);
  } else {
    out.grad_real.resize(preds.d_real.size());
    out.grad_fake.resize(preds.d_fake.size());
    double real_sum = 0.0, fake_sum = 0.0;
    for (std::size_t i = 0; i < preds.d_real.size(); ++i) {
      real_sum += neg_f_real(spec.family, preds.d_real[i]);
      out.grad_real[i] = neg_f_real_deriv(spec.family, preds.d_real[i]) / nr;
    }
    for (std::size_t j = 0; j < preds.d_fake.size(); ++j) {
      fake_sum += neg_f_fake(spec.family, preds.d_fake[j]);
      out.grad_fake[j] = neg_f_fake_deriv(spec.family, preds.d_fake[j]) / nf;
    }
    neg_v_d = real_sum / nr + fake_sum / nf;
  }

  out.r_lc_value = r_lc(spec, preds, anchors);
  out.value = neg_v_d + spec.lambda * out.r_lc_value;

  const auto [alpha_r, alpha_f] = effective_anchors(spec, anchors);
  if (spec.reg_real) {
    for (std::size_t i = 0; i < preds.d_real.size(); ++i) {
      out.grad_real[i] += spec.lambda * 2.0 * (preds.d_real[i] - alpha_f) / nr;
    }
  }
  if (spec.reg_fake) {
    for (std::size_t j = 0; j < preds.d_fake.size(); ++j) {
      out.grad_fake[j] += spec.lambda * 2.0 * (preds.d_fake[j] - alpha_r) / nf;
    }
  }
  return out;
}

double generator_objective(const LossSpec& spec,
                           const std::vector<double>& d_fake,
                           const std::vector<double>& d_real) {
  if (d_fake.empty()) {
    throw std::invalid_argument("losses: empty generator batch");
  }
  if (spec.family == LossFamily::RaHinge) {
    double value = 0.0;
    rahinge_generator(d_fake, d_real, value, nullptr);
    return value;
  }
  double sum = 0.0;
  for (double d : d_fake) {
    switch (spec.family) {
      case LossFamily::WGAN:
      case LossFamily::Hinge: sum += -d; break;
      case LossFamily::NonSaturated: sum += -log_sigmoid(d); break;
      case LossFamily::LeastSquares: sum += (d - 1.0) * (d - 1.0); break;
      case LossFamily::RaHinge: break;
    }
  }
  return sum / static_cast<double>(d_fake.size());
}

GeneratorLossGrad generator_objective_grad(const LossSpec& spec,
                                           const std::vector<double>& d_fake,
                                           const std::vector<double>& d_real) {
  if (d_fake.empty()) {
    throw std::invalid_argument("losses: empty generator batch");
  }
  GeneratorLossGrad out;
  if (spec.family == LossFamily::RaHinge) {
    rahinge_generator(d_fake, d_real, out.value, &out.grad_fake);
    return out;
  }
  const double nf = static_cast<double>(d_fake.size());
  out.grad_fake.resize(d_fake.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < d_fake.size(); ++j) {
    const double d = d_fake[j];
    switch (spec.family) {
      case LossFamily::WGAN:
      case LossFamily::Hinge:
        sum += -d;
        out.grad_fake[j] = -1.0 / nf;
        break;
      case LossFamily::NonSaturated:
        sum += -log_sigmoid(d);
        out.grad_fake[j] = -sigmoid(-d) / nf;
        break;
      case LossFamily::LeastSquares:
        sum += (d - 1.0) * (d - 1.0);
        out.grad_fake[j] = 2.0 * (d - 1.0) / nf;
        break;
      case LossFamily::RaHinge:
        break;
    }
  }
  out.value = sum / nf;
  return out;
}

bool lambda_constraint_violated(const LossSpec& spec,
                                const AnchorState& anchors) {
  if (!spec.single_anchor || spec.lambda <= 0.0) return false;
  const double alpha = single_anchor_view(anchors);
  if (!(alpha > 0.0)) return false;
  return spec.lambda >= 1.0 / (2.0 * alpha);
}

}  // namespace lecam
