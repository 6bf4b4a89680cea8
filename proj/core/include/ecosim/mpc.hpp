#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "ecosim/condense.hpp"
#include "ecosim/dynamics.hpp"
#include "ecosim/prediction.hpp"
#include "ecosim/qp.hpp"

namespace ecosim {

struct MpcParams {
  double dt = 0.1;
  int horizon = 50;
  double q_g = 1.0;
  double q_a = 960.0;
  double tau = 1.67;      // [s]
  double d = 5.0;         // [m]
  double tau_min = 0.67;  // [s]
  double d_min = 3.0;     // [m]
  double v_max = 30.0;
  double eta = 0.03;
  double margin_rate = 0.1;  // d_margin(k) = margin_rate * k * dt
  double delta_s = 0.0;
  double vehicle_length = 5.0;
  double slack_penalty = 1e6;
  PowertrainParams powertrain{};
  qp::QpSettings solver{};

  void validate() const;
};

class MpcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double desired_headway(double v, const MpcParams& params);
double min_headway(double v, const MpcParams& params);
double safety_margin(int k, const MpcParams& params);

/// One preceding-vehicle hypothesis, positions for k = 0..N.
struct PrecedingForecast {
  std::vector<double> positions;
  double probability = 1.0;
};

struct MpcResult {
  double command = 0.0;         // a(q|t)
  std::vector<double> accels;   // a(0..N-1), fixed entries first
  std::vector<double> positions;  // s(0..N)
  std::vector<double> speeds;     // v(0..N)
  bool feasible = true;         // hard problem solved without slack
  bool slack_used = false;
  double max_slack = 0.0;
  qp::QpStatus status = qp::QpStatus::Solved;
  int iterations = 0;
};

/// Preceding vehicle far enough ahead to ask for free-flow speed.
PrecedingForecast virtual_preceding(const VehicleState& ego, const MpcParams& params);

/// Scenarios with probability above eta are enforced; the rest only shape the
/// objective. Solves with hard safety rows first and retries with slack.
/// Throws MpcError if even the relaxed problem cannot be solved.
MpcResult plan(const VehicleState& ego, std::span<const double> fixed_accels,
               std::span<const PrecedingForecast> scenarios, const MpcParams& params);

/// Fused per-role forecasts of a bundle with their renormalized weights.
std::vector<PrecedingForecast> bundle_scenarios(const PredictionBundle& bundle);

qp::HorizonData horizon_data(const VehicleState& ego, std::span<const double> fixed_accels,
                             std::span<const PrecedingForecast> scenarios,
                             const MpcParams& params);

}  // namespace ecosim
