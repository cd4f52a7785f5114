#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lecam {

/// Probability masses on a finite support. Validated once, on construction:
/// nonempty, every weight >= 0, total within 1e-12 of 1.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<double> weights);

  /// Scales nonnegative raw weights to sum to 1. Rejects negative weights
  /// and all-zero input.
  static DiscreteDistribution normalized(std::vector<double> raw);

  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

enum class DivergenceKind { LeCam, JS, ChiSquared, TotalVariation, KL };

const char* to_string(DivergenceKind kind);

/// Triangular discrimination sum((P-Q)^2 / (P+Q)), in [0, 2]. Support points
/// with P(x)+Q(x) = 0 contribute 0.
double lecam(const DiscreteDistribution& p, const DiscreteDistribution& q);

/// Closed-form divergence value for `kind`. JS and KL use natural log.
/// TotalVariation is the unnormalized sum|P-Q| in [0, 2]. KL and ChiSquared
/// return +infinity when absolute continuity fails (q(x) = 0 < p(x)).
double divergence(DivergenceKind kind, const DiscreteDistribution& p,
                  const DiscreteDistribution& q);

/// Generator function f(t) of each divergence, t = P(x)/Q(x) >= 0.
/// f is convex with f(1) = 0. Throws std::domain_error for t < 0.
double f_curve(DivergenceKind kind, double t);

/// lim f(t)/t as t -> infinity; the coefficient of the q(x)=0 convention in
/// the generic evaluator. +infinity for ChiSquared and KL.
double f_tail_slope(DivergenceKind kind);

/// Evaluates sum_x q(x) * f(p(x)/q(x)) for a caller-supplied generator.
/// Points with q(x) = 0 contribute p(x) * tail_slope; if such a point exists
/// and no tail_slope was supplied, throws std::domain_error.
double generic_f_divergence(const std::function<double(double)>& f,
                            const DiscreteDistribution& p,
                            const DiscreteDistribution& q,
                            std::optional<double> tail_slope = std::nullopt);

/// Same evaluator driven by the built-in generator of `kind`.
double generic_f_divergence(DivergenceKind kind, const DiscreteDistribution& p,
                            const DiscreteDistribution& q);

}  // namespace lecam
