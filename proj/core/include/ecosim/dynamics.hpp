#pragma once

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>

namespace ecosim {

/// Thrown for parameter sets that violate a documented invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Longitudinal position/speed and lateral position of one vehicle.
struct VehicleState {
  double s = 0.0;  // [m]
  double v = 0.0;  // [m/s]
  double l = 0.0;  // [m]
};

/// Longitudinal acceleration and lateral velocity.
struct ControlInput {
  double a = 0.0;    // [m/s^2]
  double v_l = 0.0;  // [m/s]
};

/// Powertrain limits, actuation delay and the lumped resistance
/// rho(v) = rho_c0 + rho_c2 * v^2.
struct PowertrainParams {
  double u_min = -6.0;  // [m/s^2] braking capability
  double u_max = 3.0;   // [m/s^2]
  double m1 = -0.06;    // [1/s]
  double b1 = 4.2;      // [m/s^2]
  double m2 = -0.12;    // [1/s]
  double b2 = 6.0;      // [m/s^2]
  double delay = 0.6;   // [s]
  double rho_c0 = 0.0147;
  double rho_c2 = 2.75e-4;

  void validate() const;
};

/// Number of simulation steps spanned by `delay`. Throws ConfigError when
/// delay / dt is not an integer.
int delay_steps(double delay, double dt);

/// Exact constant-input update over dt.
VehicleState step_kinematics(const VehicleState& state, const ControlInput& input, double dt);

double resistance(double v, const PowertrainParams& params);

/// Speed-dependent upper acceleration limit min{u_max, m1 v + b1, m2 v + b2}.
double max_accel_limit(double v, const PowertrainParams& params);

double saturate(double u, double v, const PowertrainParams& params);

/// Fixed-length queue of pending powertrain commands, oldest first.
class DelayBuffer {
 public:
  DelayBuffer(int steps, double fill);

  int steps() const { return static_cast<int>(queue_.size()); }

  /// Enqueues `command` and returns the one issued `steps()` pushes ago.
  /// With zero steps the command is returned immediately.
  double push_pop(double command);

  const std::deque<double>& pending() const { return queue_; }

 private:
  std::deque<double> queue_;
};

struct LongitudinalStep {
  VehicleState state;
  double realized_accel = 0.0;
};

/// Resistance-compensated command through delay and saturation:
///   u(t) = rho(v(t)) + a_d(t),  a(t) = -rho(v(t)) + sat(u(t - iota), v(t)).
/// The realized acceleration is additionally limited so that speed never
/// drops below zero within the step.
LongitudinalStep step_longitudinal(const VehicleState& state, DelayBuffer& buffer,
                                   double desired_accel, const PowertrainParams& params,
                                   double dt);

/// Energy per unit mass, w = integral of v * max{a + rho(v), 0} dt,
/// accumulated with the left-endpoint rule.
struct EnergyAccumulator {
  double w = 0.0;       // [J/kg]
  double time = 0.0;    // [s] time of the last sample

  void add(double v, double a, const PowertrainParams& params, double dt);
};

double energy_increment(double v, double a, const PowertrainParams& params, double dt);

}  // namespace ecosim
