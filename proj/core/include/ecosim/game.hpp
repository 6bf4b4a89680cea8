#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ecosim/dynamics.hpp"
#include "ecosim/traffic.hpp"

namespace ecosim {

/// High-level actions, listed in tie-break order.
enum class Action : std::uint8_t {
  Maintain,
  MildAccel,
  MildDecel,
  HardAccel,
  HardDecel,
  SteerLeft,
  SteerRight,
};

std::string_view to_string(Action action);

/// Stackelberg role of the interactive vehicle.
enum class Role : std::uint8_t { Leader, Follower };

inline constexpr std::array<Role, 2> kRoles{Role::Leader, Role::Follower};

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

enum class SequenceMode : std::uint8_t { Straight, LaneChange, Abort };

using ActionSequence = std::vector<Action>;

struct GameParams {
  /// Weights on [collision, too-close, distance, speed, lateral, effort].
  std::array<double, 6> weights{400.0, 5.0, 1.0, 40.0, 0.0, 0.1};
  double discount = 0.9;
  int horizon = 5;
  double dt = 1.0;                    // [s]
  double desired_time_headway = 1.0;  // [s]
  double a_mild = 1.33;               // [m/s^2]
  double a_hard = 2.0;                // [m/s^2]
  double v_min = 0.0;                 // [m/s]
  double v_max = 30.0;                // [m/s]
  VehicleBox box{};
  double lane_width = 4.0;
  double target_lane = 0.0;        // lateral position of the lane being cut into
  double origin_lane = 4.0;        // lateral position of the cut-in vehicle's own lane
  double handoff_tolerance = 1.0;  // lane change counts as finished inside this band

  void validate() const;
  double lateral_min() const;
  double lateral_max() const;
};

/// Nominal (a_s, v_l) of an action.
ControlInput nominal_input(Action action, const GameParams& params);

/// Input actually realized over `dt`: speed stays inside [v_min, v_max] and
/// steering stops at the outer lane centers.
ControlInput effective_input(const VehicleState& state, Action action, const GameParams& params,
                             double dt);

VehicleState advance(const VehicleState& state, Action action, const GameParams& params,
                     double dt);

/// Effective inputs of a sequence applied from `start` on the game grid.
std::vector<ControlInput> effective_inputs(const VehicleState& start, const ActionSequence& seq,
                                           const GameParams& params);

/// One player of the two-player game: which vehicle it drives and the lane it
/// is heading for.
struct Agent {
  std::size_t vehicle = kCutin;
  double l_target = 0.0;
};

/// Unweighted reward terms r1..r6 for `self` in an already advanced state.
std::array<double, 6> reward_terms(const TrafficState& next, std::size_t self, Action u_self,
                                   const GameParams& params, double l_target);

/// Weighted running reward.
double step_reward(const TrafficState& next, std::size_t self, Action u_self,
                   const GameParams& params, double l_target);

struct RolloutResult {
  std::vector<TrafficState> states;  // k = 0..N
  double self_reward = 0.0;
  double other_reward = 0.0;
};

/// Advances the two players with their sequences and all remaining vehicles at
/// constant velocity on the game grid, accumulating discounted rewards for both.
RolloutResult rollout(const TrafficState& traffic, const Agent& self, const Agent& other,
                      const ActionSequence& self_seq, const ActionSequence& other_seq,
                      const GameParams& params);

std::vector<ActionSequence> enumerate_sequences(SequenceMode mode, const GameParams& params);

/// Row-major payoff table: rows are the owner's candidates, columns the
/// opponent's.
struct PayoffMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  PayoffMatrix() = default;
  PayoffMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct Choice {
  std::size_t index = 0;
  double value = 0.0;
};

/// argmax over rows of the row minimum; first maximizer wins.
Choice maxmin_choice(const PayoffMatrix& own);

/// Indices of all rows attaining the max-min value.
std::vector<std::size_t> maxmin_set(const PayoffMatrix& own);

/// Leader strategy: the follower's max-min set is computed from
/// `follower_payoff` (rows follower, cols leader); the leader then maximizes
/// its worst case over that set using `leader_payoff` (rows leader, cols
/// follower).
Choice leader_choice(const PayoffMatrix& leader_payoff, const PayoffMatrix& follower_payoff);

struct Payoffs {
  PayoffMatrix first;   // [a candidate][b candidate], rewards of agent a
  PayoffMatrix second;  // [b candidate][a candidate], rewards of agent b
};

/// Cumulative rewards for every candidate pair. Values are bitwise identical
/// to calling rollout() on each pair.
Payoffs evaluate_payoffs(const TrafficState& traffic, const GameParams& params, const Agent& a,
                         std::span<const ActionSequence> a_candidates, const Agent& b,
                         std::span<const ActionSequence> b_candidates, bool need_second = true);

struct GameSolution {
  ActionSequence sequence;
  std::size_t index = 0;
  double value = 0.0;
};

GameSolution solve_follower(const TrafficState& traffic, const GameParams& params,
                            const Agent& follower, std::span<const ActionSequence> follower_set,
                            const Agent& leader, std::span<const ActionSequence> leader_set);

GameSolution solve_leader(const TrafficState& traffic, const GameParams& params,
                          const Agent& leader, std::span<const ActionSequence> leader_set,
                          const Agent& follower, std::span<const ActionSequence> follower_set);

/// Decision model of the interactive cut-in vehicle against the ego.
class CutinGame {
 public:
  explicit CutinGame(GameParams params, std::size_t self = kCutin, std::size_t opponent = kEgo);

  const GameParams& params() const { return params_; }

  /// Lane change finished: inside the handoff band around the target lane.
  bool completed(const VehicleState& state) const;

  /// Moved at least the handoff band away from the origin lane.
  bool mid_change(const VehicleState& state) const;

  /// Own candidates in tie-break order: straight, lane change, then abort
  /// when mid-change.
  std::span<const ActionSequence> candidates(const VehicleState& state) const;

  /// The ego is modeled with straight sequences only.
  std::span<const ActionSequence> opponent_candidates() const { return straight_; }

  GameSolution policy(const TrafficState& traffic, Role role) const;

 private:
  GameParams params_;
  std::size_t self_;
  std::size_t opponent_;
  std::vector<ActionSequence> straight_;
  std::vector<ActionSequence> with_lane_change_;
  std::vector<ActionSequence> with_abort_;
};

}  // namespace ecosim
