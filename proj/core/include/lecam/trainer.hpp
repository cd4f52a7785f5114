#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lecam/anchors.hpp"
#include "lecam/losses.hpp"
#include "lecam/nn.hpp"
#include "lecam/synth_data.hpp"

namespace lecam {

enum class AnchorMode { Ema, Constant };

AnchorMode anchor_mode_from_string(const std::string& name);
const char* to_string(AnchorMode mode);

struct TrainConfig {
  LossSpec loss;
  int d_steps_per_g = 2;
  std::size_t batch = 32;
  std::size_t total_g_steps = 20000;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  double gamma = 0.99;       // anchor EMA decay
  bool anneal_gamma = false; // optional ramp of gamma toward 1 over the run
  std::size_t eval_every = 500;
  std::uint64_t seed = 0;
  std::size_t g_hidden = 64;
  std::size_t d_hidden = 64;
  std::size_t z_dim = 2;
  AnchorMode anchor_mode = AnchorMode::Ema;
  double anchor_const_r = 0.5;   // constant-anchor ablation values
  double anchor_const_f = -0.5;
  std::size_t eval_sample = 2048;
};

void validate(const TrainConfig& config);

/// One diagnostics row. Column order in metrics.csv is exactly the field
/// order here.
struct RunRow {
  std::uint64_t step = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double r_lc = 0.0;
  double alpha_r = 0.0;
  double alpha_f = 0.0;
  double mean_d_real = 0.0;
  double mean_d_fake = 0.0;
  double proxy_fd = 0.0;
  int modes_covered = 0;
  double gp0_diag = 0.0;
};

struct RunRecord {
  std::vector<RunRow> rows;
  bool aborted = false;
  std::string abort_reason;
  std::uint64_t skipped_d_steps = 0;
  std::uint64_t skipped_g_steps = 0;
  std::uint64_t constraint_warnings = 0;
};

void write_metrics_csv(const RunRecord& record, std::ostream& out);

struct DStepResult {
  double loss_d = 0.0;
  double r_lc_value = 0.0;
  double mean_d_real = 0.0;
  double mean_d_fake = 0.0;
  bool applied = false;  // false when non-finite gradients skipped the update
};

/// One Adam step on the regularized discriminator objective. Anchors are
/// EMA-updated afterwards from this batch's pre-update mean predictions when
/// update_anchors is set; the regularizer itself always sees the anchors as
/// they were before the step.
DStepResult d_step(const MlpNet& generator, MlpNet& discriminator,
                   AdamState& opt_d, const Mat& real_batch, const Mat& z_batch,
                   const LossSpec& spec, AnchorState& anchors,
                   bool update_anchors);

struct GStepResult {
  double loss_g = 0.0;
  bool applied = false;
};

/// One Adam step on the generator objective. Anchors are never touched.
/// real_batch is consulted only by the RaHinge family (may be null otherwise).
GStepResult g_step(MlpNet& generator, const MlpNet& discriminator,
                   AdamState& opt_g, const Mat& z_batch, const Mat* real_batch,
                   const LossSpec& spec);

struct TrainResult {
  MlpNet generator;
  MlpNet discriminator;
  AnchorState anchors;
  RunRecord record;
};

/// Alternating GAN training on 2-D data; see README for the exact RNG
/// substream layout that makes runs bitwise reproducible. Generated-source
/// datasets are evaluated against a fresh sample of their declared mixture;
/// CSV datasets against their own points.
TrainResult train(const TrainConfig& config, const Dataset2D& data);

}  // namespace lecam
