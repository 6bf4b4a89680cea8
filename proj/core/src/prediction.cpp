#include "ecosim/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecosim {

std::vector<double> PredictedTrajectory::positions() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.s);
  return out;
}

PredictedTrajectory predict_non_cutin(const VehicleState& preceding, int horizon, double dt) {
  PredictedTrajectory traj;
  traj.points.reserve(static_cast<std::size_t>(horizon) + 1);
  for (int k = 0; k <= horizon; ++k) {
    traj.points.push_back(step_kinematics(preceding, {}, k * dt));
  }
  return traj;
}

PredictedTrajectory predict_from_plan(const VehicleState& start, const ActionSequence& plan,
                                      const GameParams& params, int horizon, double dt) {
  const double ratio = params.dt / dt;
  const int per_step = static_cast<int>(std::lround(ratio));
  if (per_step < 1 || std::abs(ratio - per_step) > 1e-9) {
    throw ConfigError("game step must be a whole multiple of the simulation step");
  }
  const std::vector<ControlInput> inputs = effective_inputs(start, plan, params);
  std::vector<VehicleState> grid{start};
  for (const auto& u : inputs) grid.push_back(step_kinematics(grid.back(), u, params.dt));

  PredictedTrajectory traj;
  traj.points.reserve(static_cast<std::size_t>(horizon) + 1);
  const int last = static_cast<int>(inputs.size());
  for (int k = 0; k <= horizon; ++k) {
    const int g = std::min(k / per_step, last);
    const int r = k - g * per_step;
    const ControlInput u = g < last ? inputs[static_cast<std::size_t>(g)] : ControlInput{};
    traj.points.push_back(r == 0 ? grid[static_cast<std::size_t>(g)]
                                 : step_kinematics(grid[static_cast<std::size_t>(g)], u, r * dt));
  }
  return traj;
}

PredictedTrajectory predict_cutin(const TrafficState& traffic, Role role, const CutinGame& game,
                                  int horizon, double dt) {
  const GameSolution sol = game.policy(traffic, role);
  return predict_from_plan(traffic[kCutin], sol.sequence, game.params(), horizon, dt);
}

std::optional<int> crossing_step(const PredictedTrajectory& cutin, double ego_lateral,
                                 double lane_width) {
  for (int k = 1; k <= cutin.horizon(); ++k) {
    if (std::abs(cutin.points[static_cast<std::size_t>(k)].l - ego_lateral) <= 0.5 * lane_width) {
      return k;
    }
  }
  return std::nullopt;
}

std::vector<Role> role_subset(std::span<const RoleForecast> forecasts,
                              std::span<const double> ego_plan, double delta_s) {
  std::vector<Role> subset;
  for (const auto& f : forecasts) {
    if (!f.crossing) continue;
    const int last = std::min(f.trajectory.horizon(), static_cast<int>(ego_plan.size()) - 1);
    for (int k = *f.crossing; k <= last; ++k) {
      const auto i = static_cast<std::size_t>(k);
      if (f.trajectory.points[i].s - ego_plan[i] >= delta_s) {
        subset.push_back(f.role);
        break;
      }
    }
  }
  return subset;
}

PredictedTrajectory fuse(const PredictedTrajectory& non_cutin, const PredictedTrajectory& cutin,
                         int crossing) {
  if (non_cutin.points.size() != cutin.points.size()) {
    throw std::invalid_argument("fuse: trajectories differ in length");
  }
  PredictedTrajectory out = non_cutin;
  for (std::size_t k = static_cast<std::size_t>(std::max(crossing, 0)); k < out.points.size(); ++k) {
    out.points[k] = cutin.points[k];
  }
  return out;
}

PredictionBundle assemble_bundle(PredictedTrajectory non_cutin, std::vector<RoleForecast> roles,
                                 std::span<const double> ego_plan, double delta_s) {
  PredictionBundle bundle;
  bundle.non_cutin = std::move(non_cutin);
  bundle.roles = std::move(roles);
  bundle.subset = role_subset(bundle.roles, ego_plan, delta_s);
  double mass = 0.0;
  for (const auto& f : bundle.roles) {
    if (std::find(bundle.subset.begin(), bundle.subset.end(), f.role) != bundle.subset.end()) {
      mass += f.probability;
    }
  }
  for (const auto& f : bundle.roles) {
    if (std::find(bundle.subset.begin(), bundle.subset.end(), f.role) == bundle.subset.end()) {
      continue;
    }
    bundle.fused.push_back(
        {f.role, fuse(bundle.non_cutin, f.trajectory, *f.crossing), f.probability / mass});
  }
  return bundle;
}

}  // namespace ecosim
