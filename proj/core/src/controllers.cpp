#include "ecosim/controllers.hpp"

#include <algorithm>
#include <string>

namespace ecosim {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Ovm: return "ovm";
    case ControllerKind::EcoBaseline: return "eco";
    case ControllerKind::EcoCutinAware: return "eco-cutin";
  }
  return "unknown";
}

ControllerKind parse_controller(std::string_view name) {
  if (name == "ovm") return ControllerKind::Ovm;
  if (name == "eco") return ControllerKind::EcoBaseline;
  if (name == "eco-cutin") return ControllerKind::EcoCutinAware;
  throw ConfigError("unknown controller '" + std::string(name) + "' (expected ovm, eco or eco-cutin)");
}

void OvmParams::validate() const {
  if (!(alpha > 0.0 && beta > 0.0)) throw ConfigError("ovm: alpha and beta must be positive");
  if (!(tau > 0.0 && v_max > 0.0)) throw ConfigError("ovm: tau and v_max must be positive");
}

double ovm_accel(const VehicleState& self, const std::optional<VehicleState>& preceding,
                 const OvmParams& params) {
  double range_speed = params.v_max;
  double lead_speed = params.v_max;
  if (preceding) {
    const double h = distance_headway(self, *preceding, params.vehicle_length);
    range_speed = std::min(params.v_max, std::max(0.0, (h - params.d) / params.tau));
    lead_speed = std::min(params.v_max, preceding->v);
  }
  return params.alpha * (range_speed - self.v) + params.beta * (lead_speed - self.v);
}

CommandHistory::CommandHistory(int length, double fill)
    : queue_(static_cast<std::size_t>(std::max(length, 0)), fill) {}

void CommandHistory::push(double command) {
  if (queue_.empty()) return;
  queue_.pop_front();
  queue_.push_back(command);
}

namespace {

class OvmController final : public Controller {
 public:
  explicit OvmController(const ControllerConfig& config) : config_(config) {}

  ControllerKind kind() const override { return ControllerKind::Ovm; }

  StepDiagnostics step(const TrafficState& traffic) override {
    StepDiagnostics diag;
    diag.preceding = preceding_vehicle(kEgo, traffic, config_.box);
    std::optional<VehicleState> lead;
    if (diag.preceding) lead = traffic[*diag.preceding];
    diag.desired_accel = ovm_accel(traffic[kEgo], lead, config_.ovm);
    return diag;
  }

 private:
  ControllerConfig config_;
};

class EcoController : public Controller {
 public:
  explicit EcoController(const ControllerConfig& config)
      : config_(config), history_(config.delay_aware ? config.delay_steps : 0) {}

  ControllerKind kind() const override { return ControllerKind::EcoBaseline; }

  StepDiagnostics step(const TrafficState& traffic) override {
    StepDiagnostics diag;
    const Nominal nc = nominal(traffic, diag);
    diag.desired_accel = nc.result.command;
    history_.push(diag.desired_accel);
    return diag;
  }

 protected:
  struct Nominal {
    PredictedTrajectory prediction;
    MpcResult result;
  };

  // Steps 1 and 2: constant-velocity preceding vehicle and the plain MPC.
  Nominal nominal(const TrafficState& traffic, StepDiagnostics& diag) const {
    const MpcParams& mp = config_.mpc;
    const VehicleState& ego = traffic[kEgo];
    diag.preceding = preceding_vehicle(kEgo, traffic, config_.box);
    Nominal out;
    PrecedingForecast forecast;
    if (diag.preceding) {
      out.prediction = predict_non_cutin(traffic[*diag.preceding], mp.horizon, mp.dt);
      forecast = {out.prediction.positions(), 1.0};
    } else {
      forecast = virtual_preceding(ego, mp);
      out.prediction.points.clear();
      for (double s : forecast.positions) out.prediction.points.push_back({s, mp.v_max, ego.l});
    }
    const std::vector<double> fixed = history_.values();
    out.result = plan(ego, fixed, std::span<const PrecedingForecast>(&forecast, 1), mp);
    diag.feasible = out.result.feasible;
    diag.slack_used = out.result.slack_used;
    diag.max_slack = out.result.max_slack;
    return out;
  }

  ControllerConfig config_;
  CommandHistory history_;
};

class CutinAwareController final : public EcoController {
 public:
  explicit CutinAwareController(const ControllerConfig& config)
      : EcoController(config), game_(config.game) {
    posterior_.leader = config.estimator.prior_leader;
    posterior_.follower = 1.0 - posterior_.leader;
  }

  ControllerKind kind() const override { return ControllerKind::EcoCutinAware; }

  StepDiagnostics step(const TrafficState& traffic) override {
    StepDiagnostics diag;
    const Nominal nc = nominal(traffic, diag);
    const bool present = traffic.present[kCutin];

    if (present && !handed_off_ && previous_ && have_held_) {
      const double dt = config_.mpc.dt;
      const VehicleState& before = (*previous_)[kCutin];
      std::array<Residual, 2> r{};
      for (std::size_t i = 0; i < kRoles.size(); ++i) {
        const ControlInput u = effective_input(before, held_[i], game_.params(), dt);
        r[i] = residual(traffic[kCutin], step_kinematics(before, u, dt));
      }
      const PosteriorUpdate up = update_posterior(posterior_, r[0], r[1], config_.estimator);
      posterior_ = up.posterior;
      diag.estimator_skipped = up.skipped;
    }
    if (present && game_.completed(traffic[kCutin])) handed_off_ = true;
    previous_ = traffic;
    diag.posterior = posterior_;
    diag.cutin_tracked = present && !handed_off_;

    double command = nc.result.command;
    if (diag.cutin_tracked) {
      const MpcParams& mp = config_.mpc;
      const bool replan = traffic.step % std::max(config_.replan_steps, 1) == 0;
      std::vector<RoleForecast> forecasts;
      for (std::size_t i = 0; i < kRoles.size(); ++i) {
        const GameSolution sol = game_.policy(traffic, kRoles[i]);
        if (replan) held_[i] = sol.sequence.front();
        RoleForecast f;
        f.role = kRoles[i];
        f.trajectory = predict_from_plan(traffic[kCutin], sol.sequence, game_.params(),
                                         mp.horizon, mp.dt);
        f.probability = posterior_.probability(kRoles[i]);
        f.crossing = crossing_step(f.trajectory, traffic[kEgo].l, game_.params().lane_width);
        diag.crossing[i] = f.crossing;
        forecasts.push_back(std::move(f));
      }
      if (replan) have_held_ = true;
      const PredictionBundle bundle =
          assemble_bundle(nc.prediction, std::move(forecasts), nc.result.positions, mp.delta_s);
      diag.subset = bundle.subset;
      if (!bundle.subset.empty()) {
        const std::vector<PrecedingForecast> scenarios = bundle_scenarios(bundle);
        const MpcResult res = plan(traffic[kEgo], history_.values(), scenarios, mp);
        command = res.command;
        diag.feasible = res.feasible;
        diag.slack_used = res.slack_used;
        diag.max_slack = res.max_slack;
      }
    }
    diag.desired_accel = command;
    history_.push(command);
    return diag;
  }

 private:
  CutinGame game_;
  RolePosterior posterior_{};
  std::optional<TrafficState> previous_;
  std::array<Action, 2> held_{Action::Maintain, Action::Maintain};
  bool have_held_ = false;
  bool handed_off_ = false;
};

}  // namespace

std::unique_ptr<Controller> make_controller(const ControllerConfig& config) {
  config.mpc.validate();
  config.ovm.validate();
  config.game.validate();
  config.estimator.validate();
  switch (config.kind) {
    case ControllerKind::Ovm: return std::make_unique<OvmController>(config);
    case ControllerKind::EcoBaseline: return std::make_unique<EcoController>(config);
    case ControllerKind::EcoCutinAware: return std::make_unique<CutinAwareController>(config);
  }
  throw ConfigError("unknown controller kind");
}

}  // namespace ecosim
