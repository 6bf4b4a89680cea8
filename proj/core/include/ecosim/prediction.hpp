#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ecosim/dynamics.hpp"
#include "ecosim/game.hpp"
#include "ecosim/traffic.hpp"

namespace ecosim {

/// Predicted states on the MPC grid. points[0] is the current state, so a
/// horizon of N steps holds N + 1 points.
struct PredictedTrajectory {
  std::vector<VehicleState> points;

  int horizon() const { return static_cast<int>(points.size()) - 1; }
  std::vector<double> positions() const;
};

/// Constant speed and lane.
PredictedTrajectory predict_non_cutin(const VehicleState& preceding, int horizon, double dt);

/// Cut-in vehicle under the role's game plan, held per game step on the
/// finer grid. Past the game horizon speed and lateral position are held.
PredictedTrajectory predict_cutin(const TrafficState& traffic, Role role, const CutinGame& game,
                                  int horizon, double dt);

/// Same, from an already solved game sequence.
PredictedTrajectory predict_from_plan(const VehicleState& start, const ActionSequence& plan,
                                      const GameParams& params, int horizon, double dt);

/// First k >= 1 where the cut-in vehicle is within half a lane of the ego.
std::optional<int> crossing_step(const PredictedTrajectory& cutin, double ego_lateral,
                                 double lane_width);

struct RoleForecast {
  Role role = Role::Leader;
  PredictedTrajectory trajectory;
  double probability = 0.5;
  std::optional<int> crossing;
};

/// Roles that end up at least `delta_s` ahead of the ego's plan at or after
/// their crossing step.
std::vector<Role> role_subset(std::span<const RoleForecast> forecasts,
                              std::span<const double> ego_plan, double delta_s);

/// Non-cut-in prediction before `crossing`, cut-in prediction from it on.
PredictedTrajectory fuse(const PredictedTrajectory& non_cutin, const PredictedTrajectory& cutin,
                         int crossing);

struct FusedForecast {
  Role role = Role::Leader;
  PredictedTrajectory trajectory;
  double probability = 1.0;  // renormalized over the subset
};

struct PredictionBundle {
  PredictedTrajectory non_cutin;
  std::vector<RoleForecast> roles;
  std::vector<Role> subset;
  std::vector<FusedForecast> fused;
};

PredictionBundle assemble_bundle(PredictedTrajectory non_cutin, std::vector<RoleForecast> roles,
                                 std::span<const double> ego_plan, double delta_s);

}  // namespace ecosim
