#pragma once

#include <array>
#include <vector>

#include "lecam/mat.hpp"
#include "lecam/nn.hpp"

namespace lecam {

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Sample mean and unbiased (n-1) covariance of a 2-D point set.
struct GaussianSummary {
  std::array<double, 2> mean{0.0, 0.0};
  Mat2 cov{{{0.0, 0.0}, {0.0, 0.0}}};
};

GaussianSummary summarize(const Mat& points);

/// Principal square root of a 2x2 matrix with positive real eigenvalues,
/// via sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)).
Mat2 mat2_sqrt(const Mat2& a);

/// Frechet distance between the Gaussian summaries of two point sets:
/// |mu1 - mu2|^2 + tr(S1 + S2 - 2 sqrt(S1 S2)), identity feature map. This is
/// the desk-scale stand-in for FID; no embedding network is involved.
/// Degenerate covariances are regularized by +1e-9 I and *regularized is set.
double proxy_frechet(const Mat& real_points, const Mat& fake_points,
                     bool* regularized = nullptr);

struct ModeCoverage {
  int modes_covered = 0;
  double high_quality_fraction = 0.0;
};

/// A mode counts as covered when at least 1% of the points fall within
/// 3*stddev of its center; the fraction counts points within 3*stddev of any
/// center.
ModeCoverage mode_coverage(const Mat& fake_points,
                           const std::vector<std::array<double, 2>>& centers,
                           double stddev);

/// Mean of |grad_x D(x)|^2 over the batch. Monitoring only; nothing is ever
/// differentiated through this value.
double gp0_diagnostic(const MlpNet& d_net, const Mat& real_batch);

}  // namespace lecam
