#include "ecosim/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace ecosim {

void ScenarioConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("scenario: dt must be positive");
  if (!(t_final > 0.0)) throw ConfigError("scenario: t_final must be positive");
  const double ratio = t_final / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("scenario: t_final must be a multiple of dt");
  }
  if (!(lane_width > 0.0 && box.length > 0.0 && box.width > 0.0)) {
    throw ConfigError("scenario: lane and vehicle dimensions must be positive");
  }
  if (!(v_max > 0.0)) throw ConfigError("scenario: v_max must be positive");
  if (!(handoff_band > 0.0)) throw ConfigError("scenario: handoff band must be positive");
  noise.validate();
}

int ScenarioConfig::steps() const { return static_cast<int>(std::lround(t_final / dt)); }

ScenarioConfig scenario_preset(std::string_view name) {
  ScenarioConfig sc;
  sc.name = std::string(name);
  if (name == "front_cutin") {
    sc.s1 = 30.0;
  } else if (name == "behind_cutin") {
    sc.s1 = 0.0;
  } else if (name == "no_cutin") {
    sc.cutin_present = false;
  } else {
    throw ConfigError("unknown scenario '" + std::string(name) +
                      "' (expected no_cutin, behind_cutin or front_cutin)");
  }
  return sc;
}

void SimConfig::sync() {
  const ScenarioConfig& sc = scenario;
  game.lane_width = sc.lane_width;
  game.box = sc.box;
  game.target_lane = sc.l_target;
  game.origin_lane = sc.l_target + sc.lane_width;
  game.handoff_tolerance = sc.handoff_band;
  game.v_max = sc.v_max;
  mpc.dt = sc.dt;
  mpc.v_max = sc.v_max;
  mpc.vehicle_length = sc.box.length;
  mpc.powertrain = powertrain;
  ovm.v_max = sc.v_max;
  ovm.vehicle_length = sc.box.length;
  cutin_ovm.v_max = sc.v_max;
  cutin_ovm.vehicle_length = sc.box.length;
  estimator.noise = sc.noise;
}

int SimConfig::delay_step_count() const { return delay_steps(powertrain.delay, scenario.dt); }

int SimConfig::replan_step_count() const {
  const double ratio = game_period / scenario.dt;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9) {
    throw ConfigError("game period must be a whole number of simulation steps");
  }
  return static_cast<int>(n);
}

void SimConfig::validate() const {
  scenario.validate();
  powertrain.validate();
  delay_step_count();
  replan_step_count();
  mpc.validate();
  ovm.validate();
  cutin_ovm.validate();
  game.validate();
  estimator.validate();
  const double ratio = game.dt / scenario.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
    throw ConfigError("game dt must be a whole multiple of the simulation dt");
  }
}

ControllerConfig SimConfig::controller_config() const {
  ControllerConfig cc;
  cc.kind = controller;
  cc.mpc = mpc;
  cc.ovm = ovm;
  cc.game = game;
  cc.estimator = estimator;
  cc.box = scenario.box;
  cc.delay_steps = delay_step_count();
  cc.delay_aware = delay_aware;
  cc.replan_steps = replan_step_count();
  return cc;
}

TrafficState build_scenario(const ScenarioConfig& sc) {
  TrafficState t;
  const double side = sc.l_target + sc.lane_width;
  t[kEgo] = {sc.s0, sc.v0, sc.l_target};
  t[kSameLaneLead] = {sc.s0 + sc.h0 + sc.box.length, sc.v_others, sc.l_target};
  t[kCutin] = {sc.s1, sc.v_others, side};
  t[kAdjacentLaneLead] = {sc.s1 + sc.h1 + sc.box.length, sc.v_others, side};
  t.present = {true, sc.cutin_present, true, sc.cutin_present};
  t.step = 0;
  return t;
}

std::mt19937_64 episode_rng(std::uint64_t seed, int repetition) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repetition)};
  return std::mt19937_64(seq);
}

VehicleState step_cutin(const VehicleState& state, const ControlInput& input,
                        const NoiseModel& noise, double v_max, double dt, std::mt19937_64& rng) {
  VehicleState next = step_kinematics(state, input, dt);
  std::normal_distribution<double> gauss(0.0, 1.0);
  next.s += std::sqrt(noise.variance[0]) * gauss(rng);
  next.v += std::sqrt(noise.variance[1]) * gauss(rng);
  next.l += std::sqrt(noise.variance[2]) * gauss(rng);
  next.v = std::clamp(next.v, 0.0, v_max);
  return next;
}

namespace {

// Car following plus steering onto the target lane once the cut-in is done.
ControlInput merged_input(const TrafficState& traffic, const SimConfig& cfg) {
  const VehicleState& me = traffic[kCutin];
  const double dt = cfg.scenario.dt;
  const auto lead_index = preceding_vehicle(kCutin, traffic, cfg.scenario.box);
  std::optional<VehicleState> lead;
  if (lead_index) lead = traffic[*lead_index];
  double a = std::clamp(ovm_accel(me, lead, cfg.cutin_ovm), cfg.powertrain.u_min,
                        cfg.powertrain.u_max);
  a = std::max(a, -me.v / dt);
  const double steer = 0.5 * cfg.scenario.lane_width;
  const double gap = cfg.scenario.l_target - me.l;
  const double v_l = std::copysign(std::min(steer, std::abs(gap) / dt), gap);
  return {a, gap == 0.0 ? 0.0 : v_l};
}

}  // namespace

Episode run_episode(const SimConfig& input) {
  SimConfig cfg = input;
  cfg.sync();
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();
  Episode ep;
  RunSummary& sum = ep.summary;
  const ScenarioConfig& sc = cfg.scenario;
  const double dt = sc.dt;
  const int steps = sc.steps();
  const int replan = cfg.replan_step_count();

  TrafficState traffic = build_scenario(sc);
  std::mt19937_64 rng = episode_rng(cfg.seed, cfg.repetition);
  DelayBuffer buffer(cfg.delay_step_count(), resistance(traffic[kEgo].v, cfg.powertrain));
  EnergyAccumulator energy;
  const CutinGame agent(cfg.game);
  Action held = Action::Maintain;
  bool handed_off = false;
  sum.min_headway_margin = std::numeric_limits<double>::infinity();
  ep.trace.reserve(static_cast<std::size_t>(steps));

  try {
    auto controller = make_controller(cfg.controller_config());
    for (int step = 0; step < steps; ++step) {
      traffic.step = step;
      const StepDiagnostics diag = controller->step(traffic);

      ControlInput cutin_input{};
      if (traffic.present[kCutin]) {
        if (!handed_off && agent.completed(traffic[kCutin])) {
          handed_off = true;
          sum.merged = true;
          sum.merged_ahead = traffic[kCutin].s > traffic[kEgo].s;
        }
        if (!handed_off) {
          if (step % replan == 0) held = agent.policy(traffic, cfg.role).sequence.front();
          cutin_input = effective_input(traffic[kCutin], held, cfg.game, dt);
        } else {
          cutin_input = merged_input(traffic, cfg);
        }
      }

      const VehicleState& ego = traffic[kEgo];
      const LongitudinalStep ls =
          step_longitudinal(ego, buffer, diag.desired_accel, cfg.powertrain, dt);
      energy.add(ego.v, ls.realized_accel, cfg.powertrain, dt);

      StepTrace row;
      row.t = step * dt;
      row.vehicles = traffic.vehicles;
      row.present = traffic.present;
      row.accel = {ls.realized_accel, cutin_input.a, 0.0, 0.0};
      row.desired_accel = diag.desired_accel;
      row.headway = std::numeric_limits<double>::quiet_NaN();
      if (diag.preceding) {
        row.preceding = static_cast<int>(*diag.preceding);
        row.headway = distance_headway(ego, traffic[*diag.preceding], sc.box.length);
        sum.min_headway_margin =
            std::min(sum.min_headway_margin, row.headway - min_headway(ego.v, cfg.mpc));
      }
      row.p_leader = diag.posterior.leader;
      row.subset = diag.subset;
      row.energy = energy.w;
      row.feasible = diag.feasible;
      row.slack_used = diag.slack_used;
      ep.trace.push_back(std::move(row));
      if (diag.slack_used) ++sum.slack_activations;
      if (!diag.feasible) ++sum.infeasible_steps;
      if (cfg.controller == ControllerKind::EcoCutinAware && traffic.present[kCutin] &&
          sum.role_confidence_time < 0.0 && diag.posterior.probability(cfg.role) > 0.9) {
        sum.role_confidence_time = step * dt;
      }

      TrafficState next = traffic;
      next[kEgo] = ls.state;
      if (traffic.present[kCutin]) {
        next[kCutin] = step_cutin(traffic[kCutin], cutin_input, sc.noise, sc.v_max, dt, rng);
      }
      for (std::size_t i : {kSameLaneLead, kAdjacentLaneLead}) {
        if (traffic.present[i]) next[i] = step_kinematics(traffic[i], {}, dt);
      }
      traffic = next;
      ++sum.steps;
      if (check_collision(traffic, sc.box)) {
        sum.collision = true;
        break;
      }
    }
  } catch (const std::exception& e) {
    sum.failed = true;
    sum.error = e.what();
  }

  sum.energy = energy.w;
  if (!std::isfinite(sum.min_headway_margin)) sum.min_headway_margin = 0.0;
  sum.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ep;
}

}  // namespace ecosim
