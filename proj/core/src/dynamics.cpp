#include "ecosim/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ecosim {

void PowertrainParams::validate() const {
  if (!(u_min < 0.0 && u_max > 0.0)) {
    throw ConfigError("powertrain: require u_min < 0 < u_max");
  }
  if (!(rho_c0 > 0.0 && rho_c2 > 0.0)) {
    throw ConfigError("powertrain: resistance coefficients must be positive");
  }
  if (!(delay >= 0.0)) {
    throw ConfigError("powertrain: delay must be nonnegative");
  }
}

int delay_steps(double delay, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("time step must be positive");
  }
  const double ratio = delay / dt;
  const double rounded = std::round(ratio);
  if (delay < 0.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("powertrain delay " + std::to_string(delay) +
                      " s is not an integer multiple of the time step " + std::to_string(dt) +
                      " s (q = delay/dt must be an integer)");
  }
  return static_cast<int>(rounded);
}

VehicleState step_kinematics(const VehicleState& state, const ControlInput& input, double dt) {
  return {state.s + state.v * dt + 0.5 * input.a * dt * dt,
          state.v + input.a * dt,
          state.l + input.v_l * dt};
}

double resistance(double v, const PowertrainParams& params) {
  return params.rho_c0 + params.rho_c2 * v * v;
}

double max_accel_limit(double v, const PowertrainParams& params) {
  return std::min({params.u_max, params.m1 * v + params.b1, params.m2 * v + params.b2});
}

double saturate(double u, double v, const PowertrainParams& params) {
  return std::min(std::max(u, params.u_min), max_accel_limit(v, params));
}

DelayBuffer::DelayBuffer(int steps, double fill) {
  if (steps < 0) {
    throw ConfigError("delay buffer length must be nonnegative");
  }
  queue_.assign(static_cast<std::size_t>(steps), fill);
}

double DelayBuffer::push_pop(double command) {
  queue_.push_back(command);
  const double oldest = queue_.front();
  queue_.pop_front();
  return oldest;
}

LongitudinalStep step_longitudinal(const VehicleState& state, DelayBuffer& buffer,
                                   double desired_accel, const PowertrainParams& params,
                                   double dt) {
  const double rho = resistance(state.v, params);
  const double applied = buffer.push_pop(rho + desired_accel);
  double accel = -rho + saturate(applied, state.v, params);
  // No reversing: brakes hold the vehicle at standstill.
  accel = std::max(accel, -state.v / dt);
  VehicleState next = step_kinematics(state, {accel, 0.0}, dt);
  next.v = std::max(next.v, 0.0);
  return {next, accel};
}

double energy_increment(double v, double a, const PowertrainParams& params, double dt) {
  return v * std::max(a + resistance(v, params), 0.0) * dt;
}

void EnergyAccumulator::add(double v, double a, const PowertrainParams& params, double dt) {
  w += energy_increment(v, a, params, dt);
  time += dt;
}

}  // namespace ecosim
