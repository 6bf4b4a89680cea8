#include "ecosim/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ecosim {

void NoiseModel::validate() const {
  for (double v : variance) {
    if (!(v > 0.0)) throw ConfigError("noise covariance diagonal must be positive");
  }
}

void EstimatorParams::validate() const {
  noise.validate();
  if (!(floor >= 0.0 && floor < 0.5)) throw ConfigError("estimator: floor must be in [0, 0.5)");
  if (!(prior_leader > 0.0 && prior_leader < 1.0)) {
    throw ConfigError("estimator: prior must be in (0, 1)");
  }
}

Residual residual(const VehicleState& observed, const VehicleState& predicted) {
  return {observed.s - predicted.s, observed.v - predicted.v, observed.l - predicted.l};
}

double log_likelihood(const Residual& r, const NoiseModel& noise) {
  double quad = 0.0;
  double log_det = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    quad += r[i] * r[i] / noise.variance[i];
    log_det += std::log(noise.variance[i]);
  }
  const double k = static_cast<double>(r.size());
  return -0.5 * (quad + log_det + k * std::log(2.0 * std::numbers::pi));
}

RolePosterior apply_floor(RolePosterior p, double floor) {
  // With two roles, flooring one entry and renormalizing is a clamp.
  const double total = p.leader + p.follower;
  p.leader = std::clamp(p.leader / total, floor, 1.0 - floor);
  p.follower = 1.0 - p.leader;
  return p;
}

PosteriorUpdate update_posterior(const RolePosterior& prior, const Residual& leader_residual,
                                 const Residual& follower_residual,
                                 const EstimatorParams& params) {
  const double ll_leader = log_likelihood(leader_residual, params.noise);
  const double ll_follower = log_likelihood(follower_residual, params.noise);
  const bool leader_dead = !std::isfinite(ll_leader) || ll_leader < params.min_log_likelihood;
  const bool follower_dead =
      !std::isfinite(ll_follower) || ll_follower < params.min_log_likelihood;
  if (leader_dead && follower_dead) return {prior, true};

  const double a = std::log(prior.leader) + ll_leader;
  const double b = std::log(prior.follower) + ll_follower;
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  RolePosterior post;
  post.leader = ea / (ea + eb);
  post.follower = 1.0 - post.leader;
  return {apply_floor(post, params.floor), false};
}

}  // namespace ecosim
