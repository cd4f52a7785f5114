#include "lecam/trainer.hpp"

#include <cmath>
#include <iostream>
#include <ostream>
#include <stdexcept>

#include "lecam/metrics.hpp"
#include "lecam/rng.hpp"
#include "lecam/text_io.hpp"

namespace lecam {

namespace {

// Substream tags of the run seed. The reference implementations in the test
// suite reproduce this layout; change it only together with them.
constexpr std::uint64_t kStreamInitG = 1;
constexpr std::uint64_t kStreamInitD = 2;
constexpr std::uint64_t kStreamTrainZ = 3;
constexpr std::uint64_t kStreamBatch = 4;
constexpr std::uint64_t kStreamEvalZ = 5;
constexpr std::uint64_t kStreamEvalRef = 6;

std::vector<double> column0(const Mat& m) {
  std::vector<double> v(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) v[r] = m(r, 0);
  return v;
}

Mat as_column(const std::vector<double>& v) {
  Mat m(v.size(), 1);
  for (std::size_t r = 0; r < v.size(); ++r) m(r, 0) = v[r];
  return m;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void accumulate(NetGrads& into, const NetGrads& other) {
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    auto& w = into.weights[l].data();
    const auto& ow = other.weights[l].data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] += ow[k];
    auto& b = into.biases[l];
    const auto& ob = other.biases[l];
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += ob[k];
  }
}

Mat draw_z(Rng& rng, std::size_t n, std::size_t z_dim) {
  Mat z(n, z_dim);
  for (double& v : z.data()) v = rng.normal();
  return z;
}

Mat draw_real_batch(Rng& rng, const Dataset2D& data, std::size_t batch) {
  Mat out(batch, 2);
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t idx = rng.uniform_index(data.points.rows());
    out(i, 0) = data.points(idx, 0);
    out(i, 1) = data.points(idx, 1);
  }
  return out;
}

}  // namespace

AnchorMode anchor_mode_from_string(const std::string& name) {
  if (name == "ema") return AnchorMode::Ema;
  if (name == "constant") return AnchorMode::Constant;
  throw std::invalid_argument("trainer: unknown anchor mode '" + name + "'");
}

const char* to_string(AnchorMode mode) {
  switch (mode) {
    case AnchorMode::Ema: return "ema";
    case AnchorMode::Constant: return "constant";
  }
  throw std::logic_error("trainer: unknown anchor mode");
}

void validate(const TrainConfig& config) {
  validate(config.loss);
  if (config.d_steps_per_g < 1) {
    throw std::invalid_argument("trainer: d_steps_per_g must be >= 1");
  }
  if (config.batch < 1) throw std::invalid_argument("trainer: batch must be >= 1");
  if (!(config.lr_g > 0.0) || !(config.lr_d > 0.0)) {
    throw std::invalid_argument("trainer: learning rates must be > 0");
  }
  if (!(config.gamma >= 0.0 && config.gamma < 1.0)) {
    throw std::invalid_argument("trainer: gamma must be in [0, 1)");
  }
  if (config.eval_every < 1) {
    throw std::invalid_argument("trainer: eval_every must be >= 1");
  }
  if (config.z_dim < 1 || config.g_hidden < 1 || config.d_hidden < 1) {
    throw std::invalid_argument("trainer: model widths must be >= 1");
  }
  if (config.eval_sample < 2) {
    throw std::invalid_argument("trainer: eval_sample must be >= 2");
  }
  if (!std::isfinite(config.anchor_const_r) ||
      !std::isfinite(config.anchor_const_f)) {
    throw std::invalid_argument("trainer: constant anchors must be finite");
  }
}

void write_metrics_csv(const RunRecord& record, std::ostream& out) {
  out << "step,loss_d,loss_g,r_lc,alpha_r,alpha_f,mean_d_real,mean_d_fake,"
         "proxy_fd,modes_covered,gp0_diag\n";
  for (const RunRow& r : record.rows) {
    out << r.step << ',' << format_double(r.loss_d) << ','
        << format_double(r.loss_g) << ',' << format_double(r.r_lc) << ','
        << format_double(r.alpha_r) << ',' << format_double(r.alpha_f) << ','
        << format_double(r.mean_d_real) << ',' << format_double(r.mean_d_fake)
        << ',' << format_double(r.proxy_fd) << ',' << r.modes_covered << ','
        << format_double(r.gp0_diag) << '\n';
  }
}

DStepResult d_step(const MlpNet& generator, MlpNet& discriminator,
                   AdamState& opt_d, const Mat& real_batch, const Mat& z_batch,
                   const LossSpec& spec, AnchorState& anchors,
                   bool update_anchors) {
  const Mat fake_points = generator.forward(z_batch);

  GradTape tape_real, tape_fake;
  const Mat out_real = discriminator.forward(real_batch, &tape_real);
  const Mat out_fake = discriminator.forward(fake_points, &tape_fake);

  BatchPredictions preds;
  preds.d_real = column0(out_real);
  preds.d_fake = column0(out_fake);

  const DiscriminatorLossGrad lg =
      discriminator_objective_grad(spec, preds, anchors);

  DStepResult result;
  result.loss_d = lg.value;
  result.r_lc_value = lg.r_lc_value;
  result.mean_d_real = mean_of(preds.d_real);
  result.mean_d_fake = mean_of(preds.d_fake);

  if (std::isfinite(lg.value)) {
    NetGrads grads =
        backward(discriminator, tape_real, as_column(lg.grad_real));
    const NetGrads fake_grads =
        backward(discriminator, tape_fake, as_column(lg.grad_fake));
    accumulate(grads, fake_grads);
    result.applied = adam_step(opt_d, discriminator, grads);
  }

  if (update_anchors && std::isfinite(result.mean_d_real) &&
      std::isfinite(result.mean_d_fake)) {
    anchors = ema_update(anchors, result.mean_d_real, result.mean_d_fake);
  }
  return result;
}

GStepResult g_step(MlpNet& generator, const MlpNet& discriminator,
                   AdamState& opt_g, const Mat& z_batch, const Mat* real_batch,
                   const LossSpec& spec) {
  GradTape tape_g;
  const Mat fake_points = generator.forward(z_batch, &tape_g);

  GradTape tape_d;
  const Mat out_fake = discriminator.forward(fake_points, &tape_d);

  std::vector<double> d_real;
  if (spec.family == LossFamily::RaHinge) {
    if (!real_batch) {
      throw std::invalid_argument("trainer: RaHinge g_step needs a real batch");
    }
    d_real = column0(discriminator.forward(*real_batch));
  }

  const GeneratorLossGrad lg =
      generator_objective_grad(spec, column0(out_fake), d_real);

  GStepResult result;
  result.loss_g = lg.value;
  if (std::isfinite(lg.value)) {
    Mat fake_point_grads;
    backward(discriminator, tape_d, as_column(lg.grad_fake), &fake_point_grads);
    const NetGrads g_grads = backward(generator, tape_g, fake_point_grads);
    result.applied = adam_step(opt_g, generator, g_grads);
  }
  return result;
}

TrainResult train(const TrainConfig& config, const Dataset2D& data) {
  validate(config);
  if (data.points.rows() < 1 || data.points.cols() != 2) {
    throw std::invalid_argument("trainer: dataset must hold n x 2 points");
  }

  Rng init_g = Rng::substream(config.seed, kStreamInitG);
  Rng init_d = Rng::substream(config.seed, kStreamInitD);
  Rng train_z = Rng::substream(config.seed, kStreamTrainZ);
  Rng batch_rng = Rng::substream(config.seed, kStreamBatch);
  Rng eval_z = Rng::substream(config.seed, kStreamEvalZ);

  TrainResult result{
      MlpNet({config.z_dim, config.g_hidden, config.g_hidden, 2},
             Activation::ReLU, init_g),
      MlpNet({2, config.d_hidden, config.d_hidden, 1}, Activation::LeakyReLU,
             init_d),
      make_anchors(config.gamma),
      RunRecord{}};

  if (config.anchor_mode == AnchorMode::Constant) {
    result.anchors.alpha_r = config.anchor_const_r;
    result.anchors.alpha_f = config.anchor_const_f;
  }
  const bool ema_anchors = config.anchor_mode == AnchorMode::Ema;

  AdamState opt_g(result.generator, config.lr_g);
  AdamState opt_d(result.discriminator, config.lr_d);

  // Fixed evaluation fixtures: a reference sample of the declared mixture
  // (the dataset itself for CSV sources) and a real probe batch.
  Dataset2D eval_ref;
  if (data.source == DataSource::CsvFile || data.mode_centers.empty()) {
    eval_ref.points = data.points;
  } else {
    Rng ref_rng = Rng::substream(config.seed, kStreamEvalRef);
    eval_ref.points = Mat(config.eval_sample, 2);
    for (std::size_t i = 0; i < config.eval_sample; ++i) {
      const auto& c = data.mode_centers[ref_rng.uniform_index(data.mode_centers.size())];
      eval_ref.points(i, 0) = c[0] + data.mode_std * ref_rng.normal();
      eval_ref.points(i, 1) = c[1] + data.mode_std * ref_rng.normal();
    }
  }
  const std::size_t probe_n = std::min<std::size_t>(
      std::max<std::size_t>(config.batch, 2), data.points.rows());
  Mat probe_real(probe_n, 2);
  for (std::size_t i = 0; i < probe_n; ++i) {
    probe_real(i, 0) = data.points(i, 0);
    probe_real(i, 1) = data.points(i, 1);
  }
  const std::size_t gp0_n = std::min<std::size_t>(256, data.points.rows());
  Mat gp0_batch(gp0_n, 2);
  for (std::size_t i = 0; i < gp0_n; ++i) {
    gp0_batch(i, 0) = data.points(i, 0);
    gp0_batch(i, 1) = data.points(i, 1);
  }

  auto eval_row = [&](std::uint64_t step, double loss_d, double loss_g,
                      double r_lc_value, double mean_r, double mean_f) {
    RunRow row;
    row.step = step;
    row.loss_d = loss_d;
    row.loss_g = loss_g;
    row.r_lc = r_lc_value;
    row.alpha_r = result.anchors.alpha_r;
    row.alpha_f = result.anchors.alpha_f;
    row.mean_d_real = mean_r;
    row.mean_d_fake = mean_f;

    const Mat z = draw_z(eval_z, config.eval_sample, config.z_dim);
    const Mat fake = result.generator.forward(z);
    row.proxy_fd = proxy_frechet(eval_ref.points, fake);
    if (!data.mode_centers.empty()) {
      row.modes_covered =
          mode_coverage(fake, data.mode_centers, data.mode_std).modes_covered;
    }
    row.gp0_diag = gp0_diagnostic(result.discriminator, gp0_batch);
    result.record.rows.push_back(row);
  };

  // Step-0 row: probe both losses without touching parameters or anchors.
  {
    const Mat z_probe = draw_z(eval_z, probe_n, config.z_dim);
    const Mat fake = result.generator.forward(z_probe);
    BatchPredictions preds;
    preds.d_real = column0(result.discriminator.forward(probe_real));
    preds.d_fake = column0(result.discriminator.forward(fake));
    const double loss_d = discriminator_objective(config.loss, preds, result.anchors);
    const double r = r_lc(config.loss, preds, result.anchors);
    const double loss_g =
        generator_objective(config.loss, preds.d_fake, preds.d_real);
    eval_row(0, loss_d, loss_g, r, mean_of(preds.d_real), mean_of(preds.d_fake));
  }

  DStepResult last_d;
  GStepResult last_g;
  bool warned_constraint = false;

  for (std::size_t t = 1; t <= config.total_g_steps; ++t) {
    if (config.anneal_gamma && ema_anchors) {
      const double frac =
          static_cast<double>(t) / static_cast<double>(config.total_g_steps);
      result.anchors.gamma =
          std::min(config.gamma + (1.0 - config.gamma) * frac, 0.9999);
    }

    Mat real_batch;
    for (int j = 0; j < config.d_steps_per_g; ++j) {
      real_batch = draw_real_batch(batch_rng, data, config.batch);
      const Mat z = draw_z(train_z, config.batch, config.z_dim);
      last_d = d_step(result.generator, result.discriminator, opt_d, real_batch,
                      z, config.loss, result.anchors, ema_anchors);
      if (!std::isfinite(last_d.loss_d)) {
        result.record.aborted = true;
        result.record.abort_reason =
            "non-finite discriminator loss at g-step " + std::to_string(t);
      } else if (!last_d.applied) {
        ++result.record.skipped_d_steps;
      }
      if (result.record.aborted) break;

      if (lambda_constraint_violated(config.loss, result.anchors)) {
        ++result.record.constraint_warnings;
        if (!warned_constraint) {
          warned_constraint = true;
          std::clog << "warning: lambda >= 1/(2*alpha) in single-anchor mode "
                       "(lambda="
                    << config.loss.lambda
                    << ", alpha=" << single_anchor_view(result.anchors)
                    << "); training continues\n";
        }
      }
    }
    if (result.record.aborted) {
      eval_row(t, last_d.loss_d, last_g.loss_g, last_d.r_lc_value,
               last_d.mean_d_real, last_d.mean_d_fake);
      break;
    }

    const Mat z = draw_z(train_z, config.batch, config.z_dim);
    const Mat* real_for_g =
        config.loss.family == LossFamily::RaHinge ? &real_batch : nullptr;
    last_g = g_step(result.generator, result.discriminator, opt_g, z,
                    real_for_g, config.loss);
    if (!std::isfinite(last_g.loss_g)) {
      result.record.aborted = true;
      result.record.abort_reason =
          "non-finite generator loss at g-step " + std::to_string(t);
      eval_row(t, last_d.loss_d, last_g.loss_g, last_d.r_lc_value,
               last_d.mean_d_real, last_d.mean_d_fake);
      break;
    }
    if (!last_g.applied) ++result.record.skipped_g_steps;

    if (t % config.eval_every == 0 || t == config.total_g_steps) {
      eval_row(t, last_d.loss_d, last_g.loss_g, last_d.r_lc_value,
               last_d.mean_d_real, last_d.mean_d_fake);
    }
  }

  return result;
}

}  // namespace lecam
