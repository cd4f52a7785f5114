#include "lecam/synth_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lecam/rng.hpp"
#include "lecam/text_io.hpp"

namespace lecam {

namespace {

Dataset2D sample_mixture(std::size_t n,
                         std::vector<std::array<double, 2>> centers,
                         double stddev, std::uint64_t seed, DataSource source) {
  Rng rng(splitmix64(seed));
  Dataset2D ds;
  ds.points = Mat(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = centers[rng.uniform_index(centers.size())];
    ds.points(i, 0) = c[0] + stddev * rng.normal();
    ds.points(i, 1) = c[1] + stddev * rng.normal();
  }
  ds.mode_centers = std::move(centers);
  ds.mode_std = stddev;
  ds.source = source;
  return ds;
}

}  // namespace

Dataset2D make_ring(std::size_t n, std::size_t modes, double radius,
                    double stddev, std::uint64_t seed) {
  if (modes == 0 || n < modes) {
    throw std::invalid_argument("synth_data: need n >= modes >= 1");
  }
  if (!(radius > 0.0) || !(stddev > 0.0)) {
    throw std::invalid_argument("synth_data: radius and std must be > 0");
  }
  std::vector<std::array<double, 2>> centers(modes);
  for (std::size_t m = 0; m < modes; ++m) {
    const double angle =
        2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(modes);
    centers[m] = {radius * std::cos(angle), radius * std::sin(angle)};
  }
  return sample_mixture(n, std::move(centers), stddev, seed, DataSource::Ring8);
}

Dataset2D make_grid(std::size_t n, std::size_t side, double spacing,
                    double stddev, std::uint64_t seed) {
  if (side == 0 || n < side * side) {
    throw std::invalid_argument("synth_data: need n >= side*side >= 1");
  }
  if (!(spacing > 0.0) || !(stddev > 0.0)) {
    throw std::invalid_argument("synth_data: spacing and std must be > 0");
  }
  std::vector<std::array<double, 2>> centers;
  centers.reserve(side * side);
  const double offset = 0.5 * spacing * static_cast<double>(side - 1);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      centers.push_back({spacing * static_cast<double>(c) - offset,
                         spacing * static_cast<double>(r) - offset});
    }
  }
  return sample_mixture(n, std::move(centers), stddev, seed, DataSource::Grid25);
}

Dataset2D subsample(const Dataset2D& ds, const SubsampleSpec& spec) {
  const std::size_t n = ds.points.rows();
  std::size_t k = 0;
  if (spec.count) {
    k = *spec.count;
  } else {
    if (!(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
      throw std::invalid_argument("synth_data: fraction must be in (0, 1]");
    }
    k = static_cast<std::size_t>(
        std::llround(spec.fraction * static_cast<double>(n)));
  }
  if (k < 1 || k > n) {
    throw std::invalid_argument("synth_data: subsample size " +
                                std::to_string(k) + " out of range [1, " +
                                std::to_string(n) + "]");
  }

  Dataset2D out;
  out.mode_centers = ds.mode_centers;
  out.mode_std = ds.mode_std;
  out.source = ds.source;
  if (k == n) {
    out.points = ds.points;
    return out;
  }

  // Partial Fisher-Yates over the index array, then restore original order.
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  Rng rng(splitmix64(spec.seed ^ 0x5eedULL));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(k);
  std::sort(indices.begin(), indices.end());

  out.points = Mat(k, 2);
  for (std::size_t i = 0; i < k; ++i) {
    out.points(i, 0) = ds.points(indices[i], 0);
    out.points(i, 1) = ds.points(indices[i], 1);
  }
  return out;
}

Dataset2D load_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<double> xs, ys;
  std::string line;
  std::size_t line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw std::runtime_error("synth_data: " + path + ":" +
                               std::to_string(line_no) +
                               ": expected two columns");
    }
    double x, y;
    if (!parse_double(fields[0], x) || !parse_double(fields[1], y)) {
      if (header_allowed) {  // tolerate a single leading header row
        header_allowed = false;
        continue;
      }
      throw std::runtime_error("synth_data: " + path + ":" +
                               std::to_string(line_no) + ": not numeric");
    }
    header_allowed = false;
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw std::runtime_error("synth_data: " + path + ":" +
                               std::to_string(line_no) + ": non-finite value");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.empty()) {
    throw std::runtime_error("synth_data: " + path + ": no data rows");
  }
  Dataset2D ds;
  ds.points = Mat(xs.size(), 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ds.points(i, 0) = xs[i];
    ds.points(i, 1) = ys[i];
  }
  ds.source = DataSource::CsvFile;
  return ds;
}

void save_csv(const Dataset2D& ds, const std::string& path) {
  std::ostringstream out;
  out << "x,y\n";
  for (std::size_t i = 0; i < ds.points.rows(); ++i) {
    out << format_double(ds.points(i, 0)) << ','
        << format_double(ds.points(i, 1)) << '\n';
  }
  write_file(path, out.str());
}

}  // namespace lecam
