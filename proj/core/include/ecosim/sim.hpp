#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ecosim/controllers.hpp"
#include "ecosim/dynamics.hpp"
#include "ecosim/estimator.hpp"
#include "ecosim/game.hpp"
#include "ecosim/mpc.hpp"
#include "ecosim/traffic.hpp"

namespace ecosim {

/// Road geometry and initial conditions.
struct ScenarioConfig {
  std::string name = "front_cutin";
  double lane_width = 4.0;
  VehicleBox box{};
  double l_target = 0.0;
  double v_max = 30.0;
  double dt = 0.1;
  double t_final = 15.0;
  double handoff_band = 1.0;  // lateral distance to the target lane that ends the cut-in
  double s0 = 0.0;            // ego position
  double h0 = 95.0;           // ego headway to vehicle 2
  double h1 = 25.0;           // cut-in headway to vehicle 3
  double s1 = 30.0;           // cut-in position
  double v0 = 20.0;           // ego speed
  double v_others = 16.0;
  bool cutin_present = true;
  NoiseModel noise{};

  void validate() const;
  int steps() const;
};

/// Named presets: "no_cutin", "behind_cutin", "front_cutin".
ScenarioConfig scenario_preset(std::string_view name);

struct SimConfig {
  ScenarioConfig scenario{};
  ControllerKind controller = ControllerKind::EcoCutinAware;
  Role role = Role::Leader;  // true role of the cut-in vehicle
  std::uint64_t seed = 0;
  int repetition = 0;
  PowertrainParams powertrain{};
  MpcParams mpc{};
  OvmParams ovm{};
  OvmParams cutin_ovm{};  // car following of the cut-in vehicle after it merged
  GameParams game{};
  EstimatorParams estimator{};
  bool delay_aware = true;
  double game_period = 0.5;  // [s]

  /// Copies the shared scenario geometry into the module parameter blocks.
  void sync();
  /// Throws ConfigError on any violated invariant.
  void validate() const;
  int delay_step_count() const;
  int replan_step_count() const;
  ControllerConfig controller_config() const;
};

TrafficState build_scenario(const ScenarioConfig& scenario);

struct StepTrace {
  double t = 0.0;
  std::array<VehicleState, kVehicleCount> vehicles{};
  std::array<bool, kVehicleCount> present{};
  std::array<double, kVehicleCount> accel{};  // realized over the step
  double desired_accel = 0.0;
  double headway = 0.0;  // ego to its preceding vehicle, NaN when none
  int preceding = -1;    // index of that vehicle
  double p_leader = 0.5;
  std::vector<Role> subset;
  double energy = 0.0;  // after this step
  bool feasible = true;
  bool slack_used = false;
};

struct RunSummary {
  double energy = 0.0;
  bool collision = false;
  double min_headway_margin = 0.0;  // min of h - H_min(v) over the run
  int slack_activations = 0;
  int infeasible_steps = 0;
  double wall_time = 0.0;  // [s]
  bool failed = false;
  std::string error;
  int steps = 0;
  /// First time the posterior of the true role exceeded 0.9, negative if never.
  double role_confidence_time = -1.0;
  /// Whether the cut-in vehicle ended ahead of the ego, if it merged at all.
  bool merged = false;
  bool merged_ahead = false;
};

struct Episode {
  std::vector<StepTrace> trace;
  RunSummary summary;
};

/// Applies the cut-in vehicle's input and process noise; speed is clamped to
/// [0, v_max] afterwards.
VehicleState step_cutin(const VehicleState& state, const ControlInput& input,
                        const NoiseModel& noise, double v_max, double dt, std::mt19937_64& rng);

std::mt19937_64 episode_rng(std::uint64_t seed, int repetition);

Episode run_episode(const SimConfig& config);

}  // namespace ecosim
