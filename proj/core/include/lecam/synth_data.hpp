#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lecam/mat.hpp"

namespace lecam {

enum class DataSource { Ring8, Grid25, CsvFile };

/// 2-D point set with the mixture metadata of its generating source (empty
/// for CSV-loaded data). Immutable after construction.
struct Dataset2D {
  Mat points;  // n x 2
  std::vector<std::array<double, 2>> mode_centers;
  double mode_std = 0.0;
  DataSource source = DataSource::CsvFile;
};

/// n points from a ring of `modes` isotropic Gaussians, centers equally
/// spaced on a circle of `radius`, noise `stddev`. Requires n >= modes.
Dataset2D make_ring(std::size_t n, std::size_t modes = 8, double radius = 2.0,
                    double stddev = 0.05, std::uint64_t seed = 0);

/// n points from a side x side grid of Gaussians with the given spacing,
/// centered on the origin. Requires n >= side*side.
Dataset2D make_grid(std::size_t n, std::size_t side = 5, double spacing = 1.0,
                    double stddev = 0.02, std::uint64_t seed = 0);

/// Either a fraction in (0, 1] of the dataset or an absolute count.
struct SubsampleSpec {
  double fraction = 1.0;
  std::optional<std::size_t> count;
  std::uint64_t seed = 0;
};

/// Uniform subsample without replacement; original point order is kept and
/// mixture metadata is preserved. The full-dataset subsample is the identity.
Dataset2D subsample(const Dataset2D& ds, const SubsampleSpec& spec);

/// Two numeric columns, optional one-line header, '#' comment lines skipped.
/// Parse failures name the offending line.
Dataset2D load_csv(const std::string& path);

void save_csv(const Dataset2D& ds, const std::string& path);

}  // namespace lecam
