#include "lecam/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lecam/rng.hpp"
#include "support/test_util.hpp"

using namespace lecam;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.loss.family = LossFamily::Hinge;
  c.loss.lambda = 0.3;
  c.batch = 8;
  c.total_g_steps = 30;
  c.eval_every = 10;
  c.eval_sample = 64;
  c.g_hidden = 8;
  c.d_hidden = 8;
  c.seed = 11;
  return c;
}

Dataset2D small_ring() { return make_ring(64, 8, 2.0, 0.05, 3); }

std::string metrics_text(const RunRecord& record) {
  std::ostringstream out;
  write_metrics_csv(record, out);
  return out.str();
}

double leaky(double x) { return x > 0.0 ? x : 0.2 * x; }
double leaky_deriv(double x) { return x > 0.0 ? 1.0 : 0.2; }

// Mirrors one bias-corrected Adam step on a single parameter.
double adam_once(double param, double g, double lr) {
  const double m_hat = (0.5 * g) / (1.0 - 0.5);
  const double v_hat = ((1.0 - 0.999) * g * g) / (1.0 - 0.999);
  return param - lr * m_hat / (std::sqrt(v_hat) + 1e-8);
}

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig c = small_config();
  EXPECT_NO_THROW(validate(c));
  c.d_steps_per_g = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_config();
  c.gamma = 1.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_config();
  c.eval_sample = 1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_config();
  c.lr_d = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Train, ZeroStepsYieldExactlyTheStepZeroRow) {
  TrainConfig c = small_config();
  c.total_g_steps = 0;
  const TrainResult r = train(c, small_ring());
  ASSERT_EQ(r.record.rows.size(), 1u);
  EXPECT_EQ(r.record.rows[0].step, 0u);
  EXPECT_FALSE(r.record.aborted);
}

TEST(Train, RowCadenceIncludesFinalStep) {
  TrainConfig c = small_config();
  c.total_g_steps = 25;  // not a multiple of eval_every
  const TrainResult r = train(c, small_ring());
  ASSERT_EQ(r.record.rows.size(), 4u);  // 0, 10, 20, 25
  EXPECT_EQ(r.record.rows.back().step, 25u);
}

TEST(Train, IdenticalConfigAndSeedIsBitwiseReproducible) {
  const TrainConfig c = small_config();
  const Dataset2D data = small_ring();
  const TrainResult a = train(c, data);
  const TrainResult b = train(c, data);
  EXPECT_EQ(metrics_text(a.record), metrics_text(b.record));
  for (std::size_t l = 0; l < a.generator.num_layers(); ++l) {
    EXPECT_EQ(a.generator.weights()[l].data(), b.generator.weights()[l].data());
    EXPECT_EQ(a.discriminator.weights()[l].data(),
              b.discriminator.weights()[l].data());
  }
}

TEST(Train, LambdaZeroRunsIgnoreTheRegFlags) {
  TrainConfig c = small_config();
  c.loss.lambda = 0.0;
  const Dataset2D data = small_ring();
  const TrainResult a = train(c, data);
  c.loss.reg_real = false;
  c.loss.reg_fake = false;
  const TrainResult b = train(c, data);
  for (std::size_t l = 0; l < a.discriminator.num_layers(); ++l) {
    EXPECT_EQ(a.discriminator.weights()[l].data(),
              b.discriminator.weights()[l].data());
    EXPECT_EQ(a.generator.weights()[l].data(), b.generator.weights()[l].data());
  }
  // The r_lc column differs (different penalty definition) but every other
  // column must agree; compare rows field by field.
  ASSERT_EQ(a.record.rows.size(), b.record.rows.size());
  for (std::size_t i = 0; i < a.record.rows.size(); ++i) {
    EXPECT_EQ(a.record.rows[i].loss_d, b.record.rows[i].loss_d);
    EXPECT_EQ(a.record.rows[i].loss_g, b.record.rows[i].loss_g);
    EXPECT_EQ(a.record.rows[i].mean_d_real, b.record.rows[i].mean_d_real);
    EXPECT_EQ(a.record.rows[i].mean_d_fake, b.record.rows[i].mean_d_fake);
    EXPECT_EQ(a.record.rows[i].proxy_fd, b.record.rows[i].proxy_fd);
  }
}

TEST(DStep, AnchorsUpdateAfterTheStepFromPreStepPredictions) {
  Rng init_g(1), init_d(2), rng(3);
  const MlpNet generator({2, 8, 8, 2}, Activation::ReLU, init_g);
  MlpNet discriminator({2, 8, 8, 1}, Activation::LeakyReLU, init_d);
  const MlpNet d_before = discriminator;

  Mat real(4, 2), z(4, 2);
  for (double& v : real.data()) v = rng.uniform(-2, 2);
  for (double& v : z.data()) v = rng.normal();

  LossSpec spec;
  spec.family = LossFamily::Hinge;
  spec.lambda = 0.3;
  AnchorState anchors = make_anchors(0.9);
  anchors.alpha_r = 0.2;
  anchors.alpha_f = -0.1;
  const AnchorState before = anchors;

  AdamState opt(discriminator);
  const DStepResult res = d_step(generator, discriminator, opt, real, z, spec,
                                 anchors, /*update_anchors=*/true);

  // Pre-step predictions recomputed from the saved discriminator.
  const Mat fake = generator.forward(z);
  double mean_r = 0.0, mean_f = 0.0;
  const Mat out_r = d_before.forward(real);
  const Mat out_f = d_before.forward(fake);
  for (std::size_t i = 0; i < 4; ++i) {
    mean_r += out_r(i, 0) / 4.0;
    mean_f += out_f(i, 0) / 4.0;
  }
  EXPECT_NEAR(res.mean_d_real, mean_r, 1e-12);
  EXPECT_NEAR(res.mean_d_fake, mean_f, 1e-12);
  EXPECT_EQ(anchors.alpha_r, 0.9 * before.alpha_r + (1.0 - 0.9) * res.mean_d_real);
  EXPECT_EQ(anchors.alpha_f, 0.9 * before.alpha_f + (1.0 - 0.9) * res.mean_d_fake);
  EXPECT_EQ(anchors.step, before.step + 1);
}

TEST(DStep, LambdaZeroMatchesAnUnregularizedReferenceStepBitwise) {
  Rng init_g(5), init_d(6), rng(7);
  const MlpNet generator({2, 8, 8, 2}, Activation::ReLU, init_g);
  MlpNet d_impl({2, 8, 8, 1}, Activation::LeakyReLU, init_d);
  MlpNet d_ref = d_impl;

  Mat real(6, 2), z(6, 2);
  for (double& v : real.data()) v = rng.uniform(-2, 2);
  for (double& v : z.data()) v = rng.normal();

  LossSpec spec;
  spec.family = LossFamily::Hinge;
  spec.lambda = 0.0;
  AnchorState anchors = make_anchors(0.99);
  anchors.alpha_r = 0.4;  // present but inert at lambda = 0
  anchors.alpha_f = -0.4;

  AdamState opt_impl(d_impl);
  d_step(generator, d_impl, opt_impl, real, z, spec, anchors, true);

  // Reference: hinge-only gradients, no regularizer code at all.
  {
    const Mat fake = generator.forward(z);
    GradTape tape_r, tape_f;
    const Mat out_r = d_ref.forward(real, &tape_r);
    const Mat out_f = d_ref.forward(fake, &tape_f);
    Mat gr(6, 1), gf(6, 1);
    for (std::size_t i = 0; i < 6; ++i) {
      gr(i, 0) = (out_r(i, 0) < 1.0 ? -1.0 : 0.0) / 6.0;
      gf(i, 0) = (out_f(i, 0) > -1.0 ? 1.0 : 0.0) / 6.0;
    }
    NetGrads grads = backward(d_ref, tape_r, gr);
    const NetGrads fake_grads = backward(d_ref, tape_f, gf);
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
      for (std::size_t k = 0; k < grads.weights[l].size(); ++k) {
        grads.weights[l].data()[k] += fake_grads.weights[l].data()[k];
      }
      for (std::size_t k = 0; k < grads.biases[l].size(); ++k) {
        grads.biases[l][k] += fake_grads.biases[l][k];
      }
    }
    AdamState opt_ref(d_ref);
    adam_step(opt_ref, d_ref, grads);
  }

  for (std::size_t l = 0; l < d_impl.num_layers(); ++l) {
    EXPECT_EQ(d_impl.weights()[l].data(), d_ref.weights()[l].data()) << l;
    EXPECT_EQ(d_impl.biases()[l], d_ref.biases()[l]) << l;
  }
}

TEST(DStep, MatchesAHandUnrolledComputationOnAOneUnitNet) {
  // G: 1 -> 1 -> 2 (ReLU), D: 2 -> 1 -> 1 (LeakyReLU); batch of one.
  MlpNet generator = MlpNet::zeros({1, 1, 2}, Activation::ReLU);
  generator.weights()[0](0, 0) = 0.8;   // a
  generator.biases()[0][0] = 0.3;       // c
  generator.weights()[1](0, 0) = 1.1;   // e
  generator.weights()[1](1, 0) = -0.6;  // f
  generator.biases()[1] = {0.05, -0.2};

  MlpNet discriminator = MlpNet::zeros({2, 1, 1}, Activation::LeakyReLU);
  discriminator.weights()[0](0, 0) = 0.7;    // u
  discriminator.weights()[0](0, 1) = -0.4;   // v
  discriminator.biases()[0][0] = 0.1;        // w
  discriminator.weights()[1](0, 0) = 0.9;    // m
  discriminator.biases()[1][0] = -0.15;      // s

  Mat real(1, 2), z(1, 1);
  real(0, 0) = 0.5;
  real(0, 1) = -1.0;
  z(0, 0) = 0.25;

  LossSpec spec;
  spec.family = LossFamily::Hinge;
  spec.lambda = 0.3;
  AnchorState anchors = make_anchors(0.99);
  anchors.alpha_r = 0.2;
  anchors.alpha_f = -0.3;

  const double lr = 2e-4;
  AdamState opt(discriminator, lr);
  const DStepResult res = d_step(generator, discriminator, opt, real, z, spec,
                                 anchors, true);

  // Forward, by hand.
  const double h = std::max(0.0, 0.8 * 0.25 + 0.3);        // G hidden
  const double g1 = 1.1 * h + 0.05, g2 = -0.6 * h - 0.2;   // fake point
  const double pre_r = 0.7 * 0.5 + (-0.4) * (-1.0) + 0.1;
  const double tr = leaky(pre_r);
  const double dr = 0.9 * tr - 0.15;
  const double pre_f = 0.7 * g1 - 0.4 * g2 + 0.1;
  const double tf = leaky(pre_f);
  const double df = 0.9 * tf - 0.15;

  const double expected_loss = std::max(0.0, 1.0 - dr) + std::max(0.0, 1.0 + df) +
                               0.3 * ((dr - (-0.3)) * (dr - (-0.3)) +
                                      (df - 0.2) * (df - 0.2));
  EXPECT_NEAR(res.loss_d, expected_loss, 1e-14);
  EXPECT_NEAR(res.mean_d_real, dr, 1e-14);
  EXPECT_NEAR(res.mean_d_fake, df, 1e-14);

  // Prediction gradients, then parameter gradients, by hand.
  const double gdr = (dr < 1.0 ? -1.0 : 0.0) + 2.0 * 0.3 * (dr + 0.3);
  const double gdf = (df > -1.0 ? 1.0 : 0.0) + 2.0 * 0.3 * (df - 0.2);
  const double g_w2 = gdr * tr + gdf * tf;
  const double g_b2 = gdr + gdf;
  const double dpre_r = gdr * 0.9 * leaky_deriv(pre_r);
  const double dpre_f = gdf * 0.9 * leaky_deriv(pre_f);
  const double g_u = dpre_r * 0.5 + dpre_f * g1;
  const double g_v = dpre_r * (-1.0) + dpre_f * g2;
  const double g_w = dpre_r + dpre_f;

  EXPECT_NEAR(discriminator.weights()[1](0, 0), adam_once(0.9, g_w2, lr), 1e-15);
  EXPECT_NEAR(discriminator.biases()[1][0], adam_once(-0.15, g_b2, lr), 1e-15);
  EXPECT_NEAR(discriminator.weights()[0](0, 0), adam_once(0.7, g_u, lr), 1e-15);
  EXPECT_NEAR(discriminator.weights()[0](0, 1), adam_once(-0.4, g_v, lr), 1e-15);
  EXPECT_NEAR(discriminator.biases()[0][0], adam_once(0.1, g_w, lr), 1e-15);

  // Anchor update from the pre-step predictions.
  EXPECT_NEAR(anchors.alpha_r, 0.99 * 0.2 + 0.01 * dr, 1e-15);
  EXPECT_NEAR(anchors.alpha_f, 0.99 * (-0.3) + 0.01 * df, 1e-15);
}

TEST(GStep, LeavesAnchorsUntouchedAndUsesTheGeneratorLoss) {
  Rng init_g(8), init_d(9), rng(10);
  MlpNet generator({2, 8, 8, 2}, Activation::ReLU, init_g);
  const MlpNet discriminator({2, 8, 8, 1}, Activation::LeakyReLU, init_d);
  Mat z(4, 2);
  for (double& v : z.data()) v = rng.normal();

  LossSpec spec;
  spec.family = LossFamily::Hinge;
  AdamState opt(generator);
  const GStepResult res = g_step(generator, discriminator, opt, z, nullptr, spec);
  EXPECT_TRUE(res.applied);
  EXPECT_TRUE(std::isfinite(res.loss_g));
}

TEST(GStep, PinnedDiscriminatorOutputGivesMinusCAndNoMotion) {
  Rng init_g(12);
  MlpNet generator({2, 8, 8, 2}, Activation::ReLU, init_g);
  MlpNet discriminator = MlpNet::zeros({2, 4, 1}, Activation::LeakyReLU);
  discriminator.biases()[1][0] = 0.37;  // D(x) = 0.37 for every x

  const auto g_params_before = generator.weights()[0].data();
  Mat z(4, 2, 0.5);
  LossSpec spec;
  spec.family = LossFamily::WGAN;
  AdamState opt(generator);
  const GStepResult res = g_step(generator, discriminator, opt, z, nullptr, spec);
  EXPECT_DOUBLE_EQ(res.loss_g, -0.37);
  // Constant D has zero input gradients, so G receives zero gradients.
  EXPECT_EQ(generator.weights()[0].data(), g_params_before);
}

TEST(GStep, GradientFlowsThroughTheDiscriminatorIntoTheGenerator) {
  Rng init_g(14), init_d(15), rng(16);
  MlpNet generator({2, 6, 6, 2}, Activation::Tanh, init_g);
  const MlpNet discriminator({2, 6, 6, 1}, Activation::Tanh, init_d);
  Mat z(3, 2);
  for (double& v : z.data()) v = rng.normal();

  LossSpec spec;
  spec.family = LossFamily::WGAN;

  // Analytic gradient of the generator loss w.r.t. one G parameter, via the
  // same backward machinery g_step uses.
  GradTape tape_g;
  const Mat fake = generator.forward(z, &tape_g);
  GradTape tape_d;
  const Mat out = discriminator.forward(fake, &tape_d);
  const auto lg = generator_objective_grad(spec, [&] {
    std::vector<double> v(out.rows());
    for (std::size_t i = 0; i < out.rows(); ++i) v[i] = out(i, 0);
    return v;
  }());
  Mat col(out.rows(), 1);
  for (std::size_t i = 0; i < out.rows(); ++i) col(i, 0) = lg.grad_fake[i];
  Mat fake_grads;
  backward(discriminator, tape_d, col, &fake_grads);
  const NetGrads g_grads = backward(generator, tape_g, fake_grads);

  double max_abs = 0.0;
  for (double v : g_grads.weights[0].data()) max_abs = std::max(max_abs, std::abs(v));
  EXPECT_GT(max_abs, 0.0);

  // Finite-difference spot check on one parameter.
  auto loss_at = [&](double value) {
    MlpNet probe = generator;
    probe.weights()[0](0, 0) = value;
    const Mat f = probe.forward(z);
    const Mat o = discriminator.forward(f);
    std::vector<double> preds(o.rows());
    for (std::size_t i = 0; i < o.rows(); ++i) preds[i] = o(i, 0);
    return generator_objective(spec, preds);
  };
  const double x0 = generator.weights()[0](0, 0);
  const double fd = (loss_at(x0 + 1e-6) - loss_at(x0 - 1e-6)) / 2e-6;
  EXPECT_LT(test::rel_error(g_grads.weights[0](0, 0), fd), 1e-5);
}

TEST(Train, NonFiniteLossAbortsWithPartialRecord) {
  TrainConfig c = small_config();
  c.loss.family = LossFamily::LeastSquares;
  c.total_g_steps = 50;
  c.eval_every = 1000;  // only step 0 and the abort row
  Dataset2D data;
  data.points = Mat(4, 2, 1e200);  // squared-error loss overflows immediately
  data.source = DataSource::CsvFile;
  const TrainResult r = train(c, data);
  EXPECT_TRUE(r.record.aborted);
  EXPECT_FALSE(r.record.abort_reason.empty());
  EXPECT_GE(r.record.rows.size(), 2u);  // step-0 row plus the diagnostic row
}

TEST(Train, SingleAnchorConstraintViolationWarnsAndContinues) {
  TrainConfig c = small_config();
  c.loss.single_anchor = true;
  c.loss.lambda = 2.0;  // violated as soon as the anchor is positive
  c.anchor_mode = AnchorMode::Constant;
  c.anchor_const_r = 1.0;
  c.anchor_const_f = -1.0;
  c.total_g_steps = 5;
  const TrainResult r = train(c, small_ring());
  EXPECT_FALSE(r.record.aborted);
  EXPECT_GT(r.record.constraint_warnings, 0u);
}

TEST(Train, ConstantAnchorModeNeverMovesTheAnchors) {
  TrainConfig c = small_config();
  c.anchor_mode = AnchorMode::Constant;
  c.anchor_const_r = 0.5;
  c.anchor_const_f = -0.5;
  c.total_g_steps = 10;
  const TrainResult r = train(c, small_ring());
  EXPECT_EQ(r.anchors.alpha_r, 0.5);
  EXPECT_EQ(r.anchors.alpha_f, -0.5);
  EXPECT_EQ(r.anchors.step, 0u);
  for (const RunRow& row : r.record.rows) {
    EXPECT_EQ(row.alpha_r, 0.5);
    EXPECT_EQ(row.alpha_f, -0.5);
  }
}

TEST(Train, GammaAnnealingRampsTowardOneAndStaysBelowIt) {
  TrainConfig c = small_config();
  c.anneal_gamma = true;
  c.gamma = 0.9;
  c.total_g_steps = 40;
  const TrainResult r = train(c, small_ring());
  EXPECT_GT(r.anchors.gamma, 0.9);
  EXPECT_LT(r.anchors.gamma, 1.0);

  // The ramp changes the anchor trajectory relative to a fixed decay.
  c.anneal_gamma = false;
  const TrainResult fixed = train(c, small_ring());
  EXPECT_NE(r.anchors.alpha_r, fixed.anchors.alpha_r);
}

TEST(Train, EmaAnchorsMoveTowardThePredictions) {
  TrainConfig c = small_config();
  c.total_g_steps = 50;
  const TrainResult r = train(c, small_ring());
  EXPECT_EQ(r.anchors.step,
            static_cast<std::uint64_t>(c.total_g_steps * c.d_steps_per_g));
  EXPECT_NE(r.anchors.alpha_r, 0.0);
}

TEST(MetricsCsv, HeaderAndRowShape) {
  RunRecord record;
  RunRow row;
  row.step = 5;
  row.loss_d = 1.5;
  row.modes_covered = 7;
  record.rows.push_back(row);
  const std::string text = metrics_text(record);
  EXPECT_EQ(text.find("step,loss_d,loss_g,r_lc,alpha_r,alpha_f,mean_d_real,"
                      "mean_d_fake,proxy_fd,modes_covered,gp0_diag\n"),
            0u);
  EXPECT_NE(text.find("\n5,1.5,"), std::string::npos);
  EXPECT_NE(text.find(",7,"), std::string::npos);
}
