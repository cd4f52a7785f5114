#pragma once

#include <cstddef>
#include <vector>

#include "lecam/divergences.hpp"

namespace lecam {

/// Finite-support game in which the discriminator is a free real value per
/// support point. Zero-total-mass support points (p_d = p_g = 0) are dropped
/// on construction; their D value is unconstrained and they contribute
/// nothing to the divergence.
class TabularGame {
 public:
  TabularGame(const DiscreteDistribution& p_d, const DiscreteDistribution& p_g,
              double lambda, double alpha);

  const std::vector<double>& pd() const { return pd_; }
  const std::vector<double>& pg() const { return pg_; }
  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  std::size_t support_size() const { return pd_.size(); }
  std::size_t dropped_points() const { return dropped_; }

 private:
  std::vector<double> pd_;
  std::vector<double> pg_;
  double lambda_;
  double alpha_;
  std::size_t dropped_ = 0;
};

struct TabularDiscriminator {
  std::vector<double> values;  // one D(x) per retained support point
};

/// Closed-form optimum D*(x) = (p_d - p_g) (1/(2 lambda) - alpha) / (p_d + p_g).
TabularDiscriminator optimal_discriminator(const TabularGame& game);

/// Single-anchor regularized loss
/// L(D) = E_g[D] - E_d[D] + lambda (E_d[(D + alpha)^2] + E_g[(D - alpha)^2]).
double regularized_loss(const TabularGame& game, const TabularDiscriminator& d);

/// dL/dD(x) at every support point.
std::vector<double> loss_gradient(const TabularGame& game,
                                  const TabularDiscriminator& d);

/// Generator's virtual objective sum (p_d - p_g) D*(x), evaluated from the
/// optimal discriminator directly. Its agreement with
/// (1/(2 lambda) - alpha) * lecam(p_d, p_g) is checked by tests, never
/// assumed here.
double virtual_objective(const TabularGame& game);

/// Exact gradient descent on regularized_loss starting from D = 0. Throws
/// std::runtime_error if any |D(x)| exceeds 1e6 (non-convergence).
TabularDiscriminator gradient_descent_discriminator(const TabularGame& game,
                                                    int steps, double lr);

/// Alternates one discriminator gradient step (anchor frozen at its current
/// EMA of E_d[D]) with one EMA update of the anchor, starting from anchor 0
/// and D = initial_d (zeros when empty). Returns the anchor value after each
/// iteration.
std::vector<double> ema_anchor_dynamics(const TabularGame& game, double gamma,
                                        int steps, double lr,
                                        const std::vector<double>& initial_d = {});

struct Prop1Report {
  std::size_t trials = 0;
  double max_identity_error = 0.0;       // |C(G) - (1/(2 lambda) - alpha) Delta|
  double max_stationarity_residual = 0.0;  // inf-norm of dL/dD at D*
  std::size_t negative_cg_count = 0;     // games with C(G) < 0 (negative mode)
  bool negative_mode = false;
};

/// Randomized check of the optimal-discriminator identity over `trials`
/// games: support size 2-32, alpha in (0, 2], lambda in (0, 0.99/(2 alpha)).
/// In negative mode lambda is sampled above 1/(2 alpha) instead and the sign
/// of the virtual objective is recorded.
Prop1Report verify_prop1(std::size_t trials, std::uint64_t seed,
                         bool negative_mode = false);

}  // namespace lecam
