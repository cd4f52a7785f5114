#pragma once

#include <cstdint>
#include <string>

#include "lecam/synth_data.hpp"
#include "lecam/trainer.hpp"

namespace lecam {

/// [dataset] section: what to generate (or load) and how much of it to keep.
struct DatasetConfig {
  std::string type = "ring8";  // ring8 | grid25 | csv
  std::size_t n = 1000;
  std::size_t modes = 8;   // ring mode count
  double radius = 2.0;     // ring radius
  double stddev = 0.05;    // per-mode noise; default 0.02 when type = grid25
  double spacing = 1.0;    // grid spacing
  std::size_t side = 5;    // grid side length
  double fraction = 1.0;   // kept fraction, (0, 1]
  std::size_t count = 0;   // absolute subsample size; 0 means use fraction
  std::uint64_t seed = 0;
  std::string csv_path;
};

struct OutputConfig {
  std::string dir = "runs";
};

/// Full experiment description as parsed from the sectioned text config.
/// Unknown sections or keys are rejected.
struct ExperimentConfig {
  DatasetConfig dataset;
  TrainConfig train;  // holds both [model] and [train] keys
  OutputConfig output;
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Canonical snapshot: every key, fixed order, 17-digit reals. Reparsing the
/// snapshot yields an identical config.
std::string serialize(const ExperimentConfig& config);

/// Hash over everything except [output]; two configs with the same hash and
/// seed produce byte-identical metrics.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Content-addressed run directory name: run_<hash>_s<seed>.
std::string run_dir_name(const ExperimentConfig& config);

/// Generates (or loads) the base dataset and applies the subsample.
Dataset2D build_dataset(const DatasetConfig& config);

}  // namespace lecam
