#pragma once

#include <array>

#include "ecosim/dynamics.hpp"
#include "ecosim/game.hpp"

namespace ecosim {

/// Belief over the interactive vehicle's role.
struct RolePosterior {
  double leader = 0.5;
  double follower = 0.5;

  double probability(Role role) const { return role == Role::Leader ? leader : follower; }
};

/// Diagonal process-noise covariance over the interactive vehicle's (s, v, l).
struct NoiseModel {
  std::array<double, 3> variance{0.002, 0.001, 0.0002};

  void validate() const;
};

struct EstimatorParams {
  NoiseModel noise{};
  double floor = 1e-3;
  double prior_leader = 0.5;
  /// Observations this unlikely under both hypotheses carry no usable
  /// evidence and leave the posterior untouched.
  double min_log_likelihood = -1e4;

  void validate() const;
};

using Residual = std::array<double, 3>;

/// observed - predicted over (s, v, l).
Residual residual(const VehicleState& observed, const VehicleState& predicted);

/// Log density of a zero-mean Gaussian with the diagonal covariance.
double log_likelihood(const Residual& r, const NoiseModel& noise);

struct PosteriorUpdate {
  RolePosterior posterior;
  bool skipped = false;
};

/// One Bayes step in the log domain, followed by flooring and renormalizing.
PosteriorUpdate update_posterior(const RolePosterior& prior, const Residual& leader_residual,
                                 const Residual& follower_residual, const EstimatorParams& params);

/// Applies `floor` to both entries and renormalizes.
RolePosterior apply_floor(RolePosterior posterior, double floor);

}  // namespace ecosim
