#pragma once

#include <array>
#include <deque>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "ecosim/estimator.hpp"
#include "ecosim/game.hpp"
#include "ecosim/mpc.hpp"
#include "ecosim/prediction.hpp"
#include "ecosim/traffic.hpp"

namespace ecosim {

enum class ControllerKind { Ovm, EcoBaseline, EcoCutinAware };

/// "ovm", "eco", "eco-cutin".
std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller(std::string_view name);

struct OvmParams {
  double alpha = 0.4;  // [1/s]
  double beta = 0.5;   // [1/s]
  double v_max = 30.0;
  double d = 5.0;
  double tau = 1.67;
  double vehicle_length = 5.0;

  void validate() const;
};

/// Range policy plus speed policy. Free flow without a preceding vehicle.
double ovm_accel(const VehicleState& self, const std::optional<VehicleState>& preceding,
                 const OvmParams& params);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::EcoCutinAware;
  MpcParams mpc{};
  OvmParams ovm{};
  GameParams game{};
  EstimatorParams estimator{};
  VehicleBox box{};
  int delay_steps = 6;
  bool delay_aware = true;
  int replan_steps = 5;  // game cadence in simulation steps
};

struct StepDiagnostics {
  double desired_accel = 0.0;
  std::optional<std::size_t> preceding;
  RolePosterior posterior{};
  bool estimator_skipped = false;
  bool cutin_tracked = false;
  std::vector<Role> subset;
  std::array<std::optional<int>, 2> crossing{};
  bool feasible = true;
  bool slack_used = false;
  double max_slack = 0.0;
};

/// Ego controller. Sees the exact traffic state once per simulation step.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual StepDiagnostics step(const TrafficState& traffic) = 0;
  virtual ControllerKind kind() const = 0;
};

std::unique_ptr<Controller> make_controller(const ControllerConfig& config);

/// Last issued desired accelerations, oldest first.
class CommandHistory {
 public:
  explicit CommandHistory(int length, double fill = 0.0);
  void push(double command);
  std::vector<double> values() const { return {queue_.begin(), queue_.end()}; }

 private:
  std::deque<double> queue_;
};

}  // namespace ecosim
