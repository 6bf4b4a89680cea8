#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "ecosim/dynamics.hpp"

namespace ecosim {

inline constexpr std::size_t kVehicleCount = 4;
inline constexpr std::size_t kEgo = 0;
inline constexpr std::size_t kCutin = 1;
inline constexpr std::size_t kSameLaneLead = 2;
inline constexpr std::size_t kAdjacentLaneLead = 3;

/// States of the four scenario vehicles at one simulation step. Vehicles that
/// are not part of a scenario are marked absent and ignored everywhere.
struct TrafficState {
  std::array<VehicleState, kVehicleCount> vehicles{};
  std::array<bool, kVehicleCount> present{true, true, true, true};
  int step = 0;

  const VehicleState& operator[](std::size_t i) const { return vehicles[i]; }
  VehicleState& operator[](std::size_t i) { return vehicles[i]; }
};

/// Vehicle footprint used by every box and headway computation.
struct VehicleBox {
  double length = 5.0;  // [m]
  double width = 2.5;   // [m]
};

/// Bumper-to-bumper distance from `self` to `ahead`.
inline double distance_headway(const VehicleState& self, const VehicleState& ahead,
                               double vehicle_length) {
  return ahead.s - self.s - vehicle_length;
}

/// Nearest vehicle ahead with nonnegative headway and lateral offset within
/// the vehicle width. Ties resolve to the lowest index.
std::optional<std::size_t> preceding_vehicle(std::size_t self, const TrafficState& traffic,
                                             const VehicleBox& box);

/// Axis-aligned rectangle intersection; touching boxes do not overlap.
bool boxes_overlap(const VehicleState& a, const VehicleState& b, const VehicleBox& box);

/// True if any pair of present vehicles overlaps.
bool check_collision(const TrafficState& traffic, const VehicleBox& box);

}  // namespace ecosim
