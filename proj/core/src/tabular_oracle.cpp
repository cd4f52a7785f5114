#include "lecam/tabular_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lecam/rng.hpp"

namespace lecam {

namespace {

void require_dimension(const TabularGame& game, const TabularDiscriminator& d) {
  if (d.values.size() != game.support_size()) {
    throw std::invalid_argument("tabular: discriminator/support length mismatch");
  }
  for (double v : d.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("tabular: non-finite discriminator value");
    }
  }
}

// dL/dD(x) for the single-anchor loss with an explicit anchor value.
std::vector<double> gradient_at(const std::vector<double>& pd,
                                const std::vector<double>& pg, double lambda,
                                double alpha, const std::vector<double>& d) {
  std::vector<double> grad(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    grad[i] = pg[i] - pd[i] +
              2.0 * lambda *
                  (pd[i] * (d[i] + alpha) + pg[i] * (d[i] - alpha));
  }
  return grad;
}

double expectation_real(const std::vector<double>& pd,
                        const std::vector<double>& d) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) e += pd[i] * d[i];
  return e;
}

}  // namespace

TabularGame::TabularGame(const DiscreteDistribution& p_d,
                         const DiscreteDistribution& p_g, double lambda,
                         double alpha)
    : lambda_(lambda), alpha_(alpha) {
  if (p_d.size() != p_g.size()) {
    throw std::invalid_argument("tabular: support lengths differ");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("tabular: lambda must be > 0");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("tabular: alpha must be > 0");
  }
  pd_.reserve(p_d.size());
  pg_.reserve(p_g.size());
  for (std::size_t i = 0; i < p_d.size(); ++i) {
    if (p_d[i] + p_g[i] > 0.0) {
      pd_.push_back(p_d[i]);
      pg_.push_back(p_g[i]);
    } else {
      ++dropped_;
    }
  }
  if (pd_.empty()) {
    throw std::invalid_argument("tabular: no support point carries mass");
  }
}

TabularDiscriminator optimal_discriminator(const TabularGame& game) {
  const double weight = 1.0 / (2.0 * game.lambda()) - game.alpha();
  TabularDiscriminator d;
  d.values.resize(game.support_size());
  for (std::size_t i = 0; i < game.support_size(); ++i) {
    const double diff = game.pd()[i] - game.pg()[i];
    // diff == 0 gives exactly 0; no special case needed under IEEE-754.
    d.values[i] = diff * weight / (game.pd()[i] + game.pg()[i]);
  }
  return d;
}

double regularized_loss(const TabularGame& game, const TabularDiscriminator& d) {
  require_dimension(game, d);
  double value = 0.0;
  for (std::size_t i = 0; i < game.support_size(); ++i) {
    const double dv = d.values[i];
    const double real_pen = (dv + game.alpha()) * (dv + game.alpha());
    const double fake_pen = (dv - game.alpha()) * (dv - game.alpha());
    value += game.pg()[i] * dv - game.pd()[i] * dv +
             game.lambda() * (game.pd()[i] * real_pen + game.pg()[i] * fake_pen);
  }
  return value;
}

std::vector<double> loss_gradient(const TabularGame& game,
                                  const TabularDiscriminator& d) {
  require_dimension(game, d);
  return gradient_at(game.pd(), game.pg(), game.lambda(), game.alpha(),
                     d.values);
}

double virtual_objective(const TabularGame& game) {
  const TabularDiscriminator d_star = optimal_discriminator(game);
  double value = 0.0;
  for (std::size_t i = 0; i < game.support_size(); ++i) {
    value += (game.pd()[i] - game.pg()[i]) * d_star.values[i];
  }
  return value;
}

TabularDiscriminator gradient_descent_discriminator(const TabularGame& game,
                                                    int steps, double lr) {
  if (steps < 1) {
    throw std::invalid_argument("tabular: steps must be >= 1");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("tabular: lr must be >= 0");
  }
  TabularDiscriminator d;
  d.values.assign(game.support_size(), 0.0);
  for (int s = 0; s < steps; ++s) {
    const std::vector<double> grad = gradient_at(
        game.pd(), game.pg(), game.lambda(), game.alpha(), d.values);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      d.values[i] -= lr * grad[i];
      if (std::abs(d.values[i]) > 1e6) {
        throw std::runtime_error(
            "tabular: gradient descent diverged (|D| > 1e6)");
      }
    }
  }
  return d;
}

std::vector<double> ema_anchor_dynamics(const TabularGame& game, double gamma,
                                        int steps, double lr,
                                        const std::vector<double>& initial_d) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("tabular: gamma must be in [0, 1)");
  }
  if (steps < 1) {
    throw std::invalid_argument("tabular: steps must be >= 1");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("tabular: lr must be >= 0");
  }
  std::vector<double> d = initial_d;
  if (d.empty()) {
    d.assign(game.support_size(), 0.0);
  } else if (d.size() != game.support_size()) {
    throw std::invalid_argument("tabular: initial D/support length mismatch");
  }

  double anchor = 0.0;
  std::vector<double> trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    const std::vector<double> grad =
        gradient_at(game.pd(), game.pg(), game.lambda(), anchor, d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] -= lr * grad[i];
      if (std::abs(d[i]) > 1e6) {
        throw std::runtime_error("tabular: anchor dynamics diverged (|D| > 1e6)");
      }
    }
    anchor = gamma * anchor + (1.0 - gamma) * expectation_real(game.pd(), d);
    trajectory.push_back(anchor);
  }
  return trajectory;
}

namespace {

DiscreteDistribution random_distribution(Rng& rng, std::size_t support) {
  std::vector<double> w(support);
  for (double& x : w) x = rng.uniform();
  // A few hard zeros exercise the dropped-point and one-sided-mass paths.
  for (double& x : w) {
    if (rng.uniform() < 0.1) x = 0.0;
  }
  bool any = false;
  for (double x : w) any = any || x > 0.0;
  if (!any) w[rng.uniform_index(support)] = 1.0;
  return DiscreteDistribution::normalized(std::move(w));
}

}  // namespace

Prop1Report verify_prop1(std::size_t trials, std::uint64_t seed,
                         bool negative_mode) {
  if (trials < 1) {
    throw std::invalid_argument("tabular: trials must be >= 1");
  }
  Rng rng(splitmix64(seed ^ 0x9e3779b9ULL));
  Prop1Report report;
  report.trials = trials;
  report.negative_mode = negative_mode;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t support = 2 + rng.uniform_index(31);  // 2..32
    const DiscreteDistribution pd = random_distribution(rng, support);
    DiscreteDistribution pg = random_distribution(rng, support);
    if (negative_mode) {
      // The sign statement is about p_d != p_g; degenerate coincidences
      // (possible when both collapse onto one point) are resampled.
      while (pg.weights() == pd.weights()) {
        pg = random_distribution(rng, support);
      }
    }
    const double alpha = rng.uniform(1e-3, 2.0);
    const double boundary = 1.0 / (2.0 * alpha);
    // Stay 1% clear of the sign-change boundary in either direction.
    const double lambda = negative_mode
                              ? boundary * rng.uniform(1.01, 2.0)
                              : boundary * rng.uniform(1e-3, 0.99);
    const TabularGame game(pd, pg, lambda, alpha);

    const double cg = virtual_objective(game);
    const double weight = 1.0 / (2.0 * lambda) - alpha;
    const double identity_error = std::abs(cg - weight * lecam(pd, pg));
    report.max_identity_error = std::max(report.max_identity_error, identity_error);

    const std::vector<double> grad =
        loss_gradient(game, optimal_discriminator(game));
    double residual = 0.0;
    for (double g : grad) residual = std::max(residual, std::abs(g));
    report.max_stationarity_residual =
        std::max(report.max_stationarity_residual, residual);

    if (cg < 0.0) ++report.negative_cg_count;
  }
  return report;
}

}  // namespace lecam
