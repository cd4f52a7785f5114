#include "lecam/divergences.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lecam {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_support(const DiscreteDistribution& p,
                          const DiscreteDistribution& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("divergence: support lengths differ (" +
                                std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()) + ")");
  }
}

// x*log(x) with the continuity convention 0*log(0) = 0.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw std::invalid_argument("distribution: support must be nonempty");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) {  // also rejects NaN
      throw std::invalid_argument("distribution: negative or non-finite weight");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument("distribution: weights sum to " +
                                std::to_string(total) + ", expected 1");
  }
}

DiscreteDistribution DiscreteDistribution::normalized(std::vector<double> raw) {
  if (raw.empty()) {
    throw std::invalid_argument("distribution: support must be nonempty");
  }
  double total = 0.0;
  for (double w : raw) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("distribution: negative or non-finite weight");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw std::invalid_argument("distribution: total weight is zero");
  }
  for (double& w : raw) w /= total;
  // Nudge the largest weight so the sum is exactly 1 after rounding.
  double sum = 0.0;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    sum += raw[i];
    if (raw[i] > raw[argmax]) argmax = i;
  }
  raw[argmax] += 1.0 - sum;
  return DiscreteDistribution(std::move(raw));
}

const char* to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::LeCam: return "lecam";
    case DivergenceKind::JS: return "js";
    case DivergenceKind::ChiSquared: return "chi2";
    case DivergenceKind::TotalVariation: return "tv";
    case DivergenceKind::KL: return "kl";
  }
  throw std::logic_error("divergence: unknown kind");
}

double lecam(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  require_same_support(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double total = p[i] + q[i];
    if (total > 0.0) {
      const double diff = p[i] - q[i];
      sum += diff * diff / total;
    }
  }
  return sum;
}

double divergence(DivergenceKind kind, const DiscreteDistribution& p,
                  const DiscreteDistribution& q) {
  require_same_support(p, q);
  switch (kind) {
    case DivergenceKind::LeCam:
      return lecam(p, q);
    case DivergenceKind::JS: {
      // 1/2 KL(P||M) + 1/2 KL(Q||M) with M = (P+Q)/2; M > 0 wherever P or Q is.
      double sum = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) sum += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) sum += 0.5 * q[i] * std::log(q[i] / m);
      }
      return sum;
    }
    case DivergenceKind::ChiSquared: {
      double sum = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (q[i] > 0.0) {
          const double diff = p[i] - q[i];
          sum += diff * diff / q[i];
        } else if (p[i] > 0.0) {
          return kInf;
        }
      }
      return sum;
    }
    case DivergenceKind::TotalVariation: {
      double sum = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
      return sum;
    }
    case DivergenceKind::KL: {
      double sum = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
          if (q[i] <= 0.0) return kInf;
          sum += p[i] * std::log(p[i] / q[i]);
        }
      }
      return sum;
    }
  }
  throw std::logic_error("divergence: unknown kind");
}

double f_curve(DivergenceKind kind, double t) {
  if (!(t >= 0.0)) {
    throw std::domain_error("f_curve: t must be >= 0");
  }
  switch (kind) {
    case DivergenceKind::LeCam:
      return (t - 1.0) * (t - 1.0) / (t + 1.0);
    case DivergenceKind::JS:
      // 1/2 (t log(2t/(1+t)) + log(2/(1+t))); the t=0 term is 0 by continuity.
      return 0.5 * (xlogx(t) - (t + 1.0) * std::log(0.5 * (t + 1.0)));
    case DivergenceKind::ChiSquared:
      return (t - 1.0) * (t - 1.0);
    case DivergenceKind::TotalVariation:
      return std::abs(t - 1.0);
    case DivergenceKind::KL:
      return xlogx(t);
  }
  throw std::logic_error("f_curve: unknown kind");
}

double f_tail_slope(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::LeCam: return 1.0;
    case DivergenceKind::JS: return 0.5 * std::log(2.0);
    case DivergenceKind::ChiSquared: return kInf;
    case DivergenceKind::TotalVariation: return 1.0;
    case DivergenceKind::KL: return kInf;
  }
  throw std::logic_error("f_tail_slope: unknown kind");
}

double generic_f_divergence(const std::function<double(double)>& f,
                            const DiscreteDistribution& p,
                            const DiscreteDistribution& q,
                            std::optional<double> tail_slope) {
  require_same_support(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] > 0.0) {
      sum += q[i] * f(p[i] / q[i]);
    } else if (p[i] > 0.0) {
      if (!tail_slope) {
        throw std::domain_error(
            "generic_f_divergence: q(x)=0 < p(x) requires a tail slope");
      }
      sum += p[i] * *tail_slope;
    }
    // p = q = 0: removable, contributes 0.
  }
  return sum;
}

double generic_f_divergence(DivergenceKind kind, const DiscreteDistribution& p,
                            const DiscreteDistribution& q) {
  return generic_f_divergence([kind](double t) { return f_curve(kind, t); }, p,
                              q, f_tail_slope(kind));
}

}  // namespace lecam
