#include "lecam/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace lecam {

namespace {

Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    }
  }
  return c;
}

double mat2_trace(const Mat2& a) { return a[0][0] + a[1][1]; }

double mat2_det(const Mat2& a) { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }

bool is_degenerate(const Mat2& cov) {
  // Rank-deficient or negative-definite summaries cannot feed the sqrt.
  return mat2_det(cov) <= 0.0 || mat2_trace(cov) <= 0.0;
}

}  // namespace

GaussianSummary summarize(const Mat& points) {
  if (points.cols() != 2 || points.rows() < 2) {
    throw std::invalid_argument("metrics: need >= 2 points of dimension 2");
  }
  GaussianSummary s;
  const double n = static_cast<double>(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    s.mean[0] += points(i, 0);
    s.mean[1] += points(i, 1);
  }
  s.mean[0] /= n;
  s.mean[1] /= n;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double dx = points(i, 0) - s.mean[0];
    const double dy = points(i, 1) - s.mean[1];
    s.cov[0][0] += dx * dx;
    s.cov[0][1] += dx * dy;
    s.cov[1][1] += dy * dy;
  }
  s.cov[0][0] /= n - 1.0;
  s.cov[0][1] /= n - 1.0;
  s.cov[1][1] /= n - 1.0;
  s.cov[1][0] = s.cov[0][1];
  return s;
}

Mat2 mat2_sqrt(const Mat2& a) {
  const double det = mat2_det(a);
  const double tr = mat2_trace(a);
  if (det < 0.0) {
    throw std::domain_error("metrics: matrix sqrt needs det >= 0");
  }
  const double s = std::sqrt(det);
  const double denom = std::sqrt(tr + 2.0 * s);
  if (!(denom > 0.0)) {
    return Mat2{{{0.0, 0.0}, {0.0, 0.0}}};  // A = 0
  }
  Mat2 r;
  r[0][0] = (a[0][0] + s) / denom;
  r[0][1] = a[0][1] / denom;
  r[1][0] = a[1][0] / denom;
  r[1][1] = (a[1][1] + s) / denom;
  return r;
}

double proxy_frechet(const Mat& real_points, const Mat& fake_points,
                     bool* regularized) {
  GaussianSummary a = summarize(real_points);
  GaussianSummary b = summarize(fake_points);
  bool bumped = false;
  if (is_degenerate(a.cov)) {
    a.cov[0][0] += 1e-9;
    a.cov[1][1] += 1e-9;
    bumped = true;
  }
  if (is_degenerate(b.cov)) {
    b.cov[0][0] += 1e-9;
    b.cov[1][1] += 1e-9;
    bumped = true;
  }
  if (regularized) *regularized = bumped;

  const double dx = a.mean[0] - b.mean[0];
  const double dy = a.mean[1] - b.mean[1];
  const Mat2 product = mat2_mul(a.cov, b.cov);
  // Product of SPD matrices: eigenvalues are real and positive, but tiny
  // negative determinants can appear through rounding.
  Mat2 p = product;
  if (mat2_det(p) < 0.0) {
    p[0][0] += 1e-18;
    p[1][1] += 1e-18;
  }
  const Mat2 root = mat2_sqrt(p);
  const double value = dx * dx + dy * dy + mat2_trace(a.cov) +
                       mat2_trace(b.cov) - 2.0 * mat2_trace(root);
  // Clamp the tiny negative values rounding can produce on identical inputs.
  return value < 0.0 && value > -1e-9 ? 0.0 : value;
}

ModeCoverage mode_coverage(const Mat& fake_points,
                           const std::vector<std::array<double, 2>>& centers,
                           double stddev) {
  if (centers.empty()) {
    throw std::invalid_argument("metrics: mode_coverage needs centers");
  }
  if (fake_points.cols() != 2) {
    throw std::invalid_argument("metrics: points must be 2-D");
  }
  ModeCoverage out;
  if (fake_points.rows() == 0) return out;
  const double n = static_cast<double>(fake_points.rows());
  const double r2 = 9.0 * stddev * stddev;  // (3 sigma)^2
  std::vector<std::size_t> per_mode(centers.size(), 0);
  std::size_t near_any = 0;
  for (std::size_t i = 0; i < fake_points.rows(); ++i) {
    bool close = false;
    for (std::size_t m = 0; m < centers.size(); ++m) {
      const double dx = fake_points(i, 0) - centers[m][0];
      const double dy = fake_points(i, 1) - centers[m][1];
      if (dx * dx + dy * dy <= r2) {
        ++per_mode[m];
        close = true;
      }
    }
    if (close) ++near_any;
  }
  for (std::size_t m = 0; m < centers.size(); ++m) {
    if (static_cast<double>(per_mode[m]) >= 0.01 * n) ++out.modes_covered;
  }
  out.high_quality_fraction = n > 0.0 ? static_cast<double>(near_any) / n : 0.0;
  return out;
}

double gp0_diagnostic(const MlpNet& d_net, const Mat& real_batch) {
  if (real_batch.rows() == 0) {
    throw std::invalid_argument("metrics: empty batch");
  }
  if (d_net.output_dim() != 1) {
    throw std::invalid_argument("metrics: gp0 expects a scalar discriminator");
  }
  GradTape tape;
  const Mat out = d_net.forward(real_batch, &tape);
  Mat ones(out.rows(), out.cols(), 1.0);
  Mat input_grads;
  backward(d_net, tape, ones, &input_grads);
  double sum = 0.0;
  for (std::size_t r = 0; r < input_grads.rows(); ++r) {
    double norm2 = 0.0;
    for (std::size_t c = 0; c < input_grads.cols(); ++c) {
      norm2 += input_grads(r, c) * input_grads(r, c);
    }
    sum += norm2;
  }
  return sum / static_cast<double>(input_grads.rows());
}

}  // namespace lecam
