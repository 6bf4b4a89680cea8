#include "ecosim/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ecosim {

void MpcParams::validate() const {
  if (!(dt > 0.0)) throw ConfigError("mpc: dt must be positive");
  if (horizon < 1) throw ConfigError("mpc: horizon must be at least one step");
  if (!(tau > tau_min)) throw ConfigError("mpc: tau must exceed tau_min");
  if (!(d > d_min)) throw ConfigError("mpc: d must exceed d_min");
  if (!(q_g >= 0.0 && q_a > 0.0)) throw ConfigError("mpc: weights must be q_g >= 0, q_a > 0");
  if (!(eta >= 0.0 && eta < 1.0)) throw ConfigError("mpc: eta must be in [0, 1)");
  if (!(v_max > 0.0)) throw ConfigError("mpc: v_max must be positive");
  powertrain.validate();
}

double desired_headway(double v, const MpcParams& params) { return params.d + params.tau * v; }

double min_headway(double v, const MpcParams& params) {
  return params.d_min + params.tau_min * v;
}

double safety_margin(int k, const MpcParams& params) {
  return params.margin_rate * k * params.dt;
}

PrecedingForecast virtual_preceding(const VehicleState& ego, const MpcParams& params) {
  const VehicleState ghost{
      ego.s + params.vehicle_length + desired_headway(params.v_max, params), params.v_max, ego.l};
  return {predict_non_cutin(ghost, params.horizon, params.dt).positions(), 1.0};
}

qp::HorizonData horizon_data(const VehicleState& ego, std::span<const double> fixed_accels,
                             std::span<const PrecedingForecast> scenarios,
                             const MpcParams& params) {
  qp::HorizonData data;
  data.s0 = ego.s;
  data.v0 = ego.v;
  data.fixed_accels.assign(fixed_accels.begin(), fixed_accels.end());
  data.horizon = params.horizon;
  data.dt = params.dt;
  double mass = 0.0;
  for (const auto& sc : scenarios) mass += sc.probability;
  for (const auto& sc : scenarios) {
    if (static_cast<int>(sc.positions.size()) < params.horizon + 1) {
      throw MpcError("mpc: prediction covers " + std::to_string(sc.positions.size()) +
                     " points, horizon needs " + std::to_string(params.horizon + 1));
    }
    const double p = sc.probability / mass;
    data.scenarios.push_back({sc.positions, p, p > params.eta});
  }
  data.q_g = params.q_g;
  data.q_a = params.q_a;
  data.tau = params.tau;
  data.d = params.d;
  data.tau_min = params.tau_min;
  data.d_min = params.d_min;
  data.v_max = params.v_max;
  data.vehicle_length = params.vehicle_length;
  data.margin.resize(static_cast<std::size_t>(params.horizon) + 1);
  for (int k = 0; k <= params.horizon; ++k) {
    data.margin[static_cast<std::size_t>(k)] = safety_margin(k, params);
  }
  const auto& pt = params.powertrain;
  data.u_min = pt.u_min;
  data.u_max = pt.u_max;
  data.m1 = pt.m1;
  data.b1 = pt.b1;
  data.m2 = pt.m2;
  data.b2 = pt.b2;
  data.slack_penalty = params.slack_penalty;
  return data;
}

MpcResult plan(const VehicleState& ego, std::span<const double> fixed_accels,
               std::span<const PrecedingForecast> scenarios, const MpcParams& params) {
  if (scenarios.empty()) throw MpcError("mpc: at least one preceding forecast is required");
  qp::HorizonData data = horizon_data(ego, fixed_accels, scenarios, params);

  MpcResult res;
  qp::CondensedMpc cond = qp::condense_mpc(data);
  qp::QpSolution sol = qp::solve(cond.problem, params.solver);
  res.iterations = sol.iterations;
  if (sol.status != qp::QpStatus::Solved) {
    res.feasible = false;
    data.soft_safety = true;
    cond = qp::condense_mpc(data);
    sol = qp::solve(cond.problem, params.solver);
    res.iterations += sol.iterations;
    if (sol.status != qp::QpStatus::Solved) {
      throw MpcError(std::string("mpc: relaxed problem not solved (") +
                     std::string(qp::to_string(sol.status)) + ")");
    }
    if (cond.slack_count > 0) res.max_slack = std::max(0.0, sol.z.tail(cond.slack_count).maxCoeff());
    res.slack_used = res.max_slack > 1e-6;
  }
  res.status = sol.status;

  const int n = params.horizon;
  res.command = sol.z[0];
  res.accels.assign(fixed_accels.begin(), fixed_accels.end());
  for (int j = 0; static_cast<int>(res.accels.size()) < n; ++j) res.accels.push_back(sol.z[j]);
  VehicleState s{ego.s, ego.v, ego.l};
  res.positions.push_back(s.s);
  res.speeds.push_back(s.v);
  for (int k = 0; k < n; ++k) {
    s = step_kinematics(s, {res.accels[static_cast<std::size_t>(k)], 0.0}, params.dt);
    res.positions.push_back(s.s);
    res.speeds.push_back(s.v);
  }
  return res;
}

std::vector<PrecedingForecast> bundle_scenarios(const PredictionBundle& bundle) {
  std::vector<PrecedingForecast> out;
  out.reserve(bundle.fused.size());
  for (const auto& f : bundle.fused) out.push_back({f.trajectory.positions(), f.probability});
  return out;
}

}  // namespace ecosim
