#include "ecosim/traffic.hpp"

#include <cmath>

namespace ecosim {

std::optional<std::size_t> preceding_vehicle(std::size_t self, const TrafficState& traffic,
                                             const VehicleBox& box) {
  std::optional<std::size_t> best;
  double best_gap = 0.0;
  const VehicleState& me = traffic[self];
  for (std::size_t i = 0; i < kVehicleCount; ++i) {
    if (i == self || !traffic.present[i]) continue;
    const VehicleState& other = traffic[i];
    const double gap = distance_headway(me, other, box.length);
    if (gap < 0.0 || std::abs(other.l - me.l) > box.width) continue;
    if (!best || gap < best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return best;
}

bool boxes_overlap(const VehicleState& a, const VehicleState& b, const VehicleBox& box) {
  return std::abs(a.s - b.s) < box.length && std::abs(a.l - b.l) < box.width;
}

bool check_collision(const TrafficState& traffic, const VehicleBox& box) {
  for (std::size_t i = 0; i < kVehicleCount; ++i) {
    if (!traffic.present[i]) continue;
    for (std::size_t j = i + 1; j < kVehicleCount; ++j) {
      if (traffic.present[j] && boxes_overlap(traffic[i], traffic[j], box)) return true;
    }
  }
  return false;
}

}  // namespace ecosim
