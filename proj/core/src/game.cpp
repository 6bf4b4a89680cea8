#include "ecosim/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ecosim {

std::string_view to_string(Action action) {
  switch (action) {
    case Action::Maintain: return "maintain";
    case Action::MildAccel: return "mild_accel";
    case Action::MildDecel: return "mild_decel";
    case Action::HardAccel: return "hard_accel";
    case Action::HardDecel: return "hard_decel";
    case Action::SteerLeft: return "steer_left";
    case Action::SteerRight: return "steer_right";
  }
  return "unknown";
}

std::string_view to_string(Role role) {
  return role == Role::Leader ? "leader" : "follower";
}

Role parse_role(std::string_view text) {
  if (text == "leader") return Role::Leader;
  if (text == "follower") return Role::Follower;
  throw ConfigError("unknown role '" + std::string(text) + "' (expected leader|follower)");
}

void GameParams::validate() const {
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("game: weights must be nonnegative");
  }
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("game: discount must be in (0, 1]");
  if (horizon < 1) throw ConfigError("game: horizon must be at least 1");
  if (!(dt > 0.0)) throw ConfigError("game: dt must be positive");
  if (!(a_hard > a_mild && a_mild > 0.0)) throw ConfigError("game: require a_hard > a_mild > 0");
  if (!(v_min < v_max)) throw ConfigError("game: require v_min < v_max");
}

double GameParams::lateral_min() const { return std::min(target_lane, origin_lane); }
double GameParams::lateral_max() const { return std::max(target_lane, origin_lane); }

ControlInput nominal_input(Action action, const GameParams& params) {
  switch (action) {
    case Action::Maintain: return {0.0, 0.0};
    case Action::MildAccel: return {params.a_mild, 0.0};
    case Action::MildDecel: return {-params.a_mild, 0.0};
    case Action::HardAccel: return {params.a_hard, 0.0};
    case Action::HardDecel: return {-params.a_hard, 0.0};
    case Action::SteerLeft: return {0.0, 0.5 * params.lane_width};
    case Action::SteerRight: return {0.0, -0.5 * params.lane_width};
  }
  return {};
}

ControlInput effective_input(const VehicleState& state, Action action, const GameParams& params,
                             double dt) {
  ControlInput u = nominal_input(action, params);
  if (u.a > 0.0) {
    const double v_next = std::min(state.v + u.a * dt, std::max(state.v, params.v_max));
    u.a = (v_next - state.v) / dt;
  } else if (u.a < 0.0) {
    const double v_next = std::max(state.v + u.a * dt, std::min(state.v, params.v_min));
    u.a = (v_next - state.v) / dt;
  }
  if (u.v_l > 0.0) {
    const double l_next = std::min(state.l + u.v_l * dt, std::max(state.l, params.lateral_max()));
    u.v_l = (l_next - state.l) / dt;
  } else if (u.v_l < 0.0) {
    const double l_next = std::max(state.l + u.v_l * dt, std::min(state.l, params.lateral_min()));
    u.v_l = (l_next - state.l) / dt;
  }
  return u;
}

VehicleState advance(const VehicleState& state, Action action, const GameParams& params,
                     double dt) {
  return step_kinematics(state, effective_input(state, action, params, dt), dt);
}

std::vector<ControlInput> effective_inputs(const VehicleState& start, const ActionSequence& seq,
                                           const GameParams& params) {
  std::vector<ControlInput> inputs;
  inputs.reserve(seq.size());
  VehicleState state = start;
  for (Action action : seq) {
    const ControlInput u = effective_input(state, action, params, params.dt);
    inputs.push_back(u);
    state = step_kinematics(state, u, params.dt);
  }
  return inputs;
}

namespace {

double effort_term(Action action, const GameParams& params) {
  const ControlInput u = nominal_input(action, params);
  return -std::sqrt(u.a * u.a + u.v_l * u.v_l);
}

// Single summation order shared by the direct and the tabulated evaluation so
// that both produce identical bits.
double weighted_sum(const std::array<double, 6>& w, double r1, double r2, double t3, double t4,
                    double t5, double t6) {
  double reward = w[0] * r1;
  reward += w[1] * r2;
  reward += t3;
  reward += t4;
  reward += t5;
  reward += t6;
  return reward;
}

}  // namespace

std::array<double, 6> reward_terms(const TrafficState& next, std::size_t self, Action u_self,
                                   const GameParams& params, double l_target) {
  const VehicleState& me = next[self];
  double r1 = 0.0;
  for (std::size_t i = 0; i < kVehicleCount; ++i) {
    if (i != self && next.present[i] && boxes_overlap(me, next[i], params.box)) {
      r1 = -1.0;
      break;
    }
  }
  double r2 = 0.0;
  if (const auto lead = preceding_vehicle(self, next, params.box)) {
    const double h = distance_headway(me, next[*lead], params.box.length);
    if (h < me.v * params.desired_time_headway) r2 = -1.0;
  }
  const double r3 = me.s;
  const double r4 = (me.v - params.v_max) / params.v_max;
  const double r5 = -std::abs(me.l - l_target);
  const double r6 = effort_term(u_self, params);
  return {r1, r2, r3, r4, r5, r6};
}

double step_reward(const TrafficState& next, std::size_t self, Action u_self,
                   const GameParams& params, double l_target) {
  const auto r = reward_terms(next, self, u_self, params, l_target);
  const auto& w = params.weights;
  return weighted_sum(w, r[0], r[1], w[2] * r[2], w[3] * r[3], w[4] * r[4], w[5] * r[5]);
}

RolloutResult rollout(const TrafficState& traffic, const Agent& self, const Agent& other,
                      const ActionSequence& self_seq, const ActionSequence& other_seq,
                      const GameParams& params) {
  const std::size_t n = static_cast<std::size_t>(params.horizon);
  if (self_seq.size() != n || other_seq.size() != n) {
    throw std::invalid_argument("rollout: sequence length differs from the game horizon");
  }
  RolloutResult result;
  result.states.reserve(n + 1);
  result.states.push_back(traffic);
  double discount = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const TrafficState& cur = result.states.back();
    TrafficState next = cur;
    next.step = cur.step + 1;
    for (std::size_t i = 0; i < kVehicleCount; ++i) {
      if (!cur.present[i]) continue;
      if (i == self.vehicle) {
        next[i] = advance(cur[i], self_seq[k], params, params.dt);
      } else if (i == other.vehicle) {
        next[i] = advance(cur[i], other_seq[k], params, params.dt);
      } else {
        next[i] = step_kinematics(cur[i], {}, params.dt);
      }
    }
    result.self_reward +=
        discount * step_reward(next, self.vehicle, self_seq[k], params, self.l_target);
    result.other_reward +=
        discount * step_reward(next, other.vehicle, other_seq[k], params, other.l_target);
    discount *= params.discount;
    result.states.push_back(next);
  }
  return result;
}

namespace {

// Appends every assignment of `alphabet` to the free slots of `base`, in
// lexicographic order (earliest slot most significant).
void fill_free_slots(ActionSequence base, const std::vector<std::size_t>& free,
                     const std::vector<Action>& alphabet, std::vector<ActionSequence>& out) {
  std::vector<std::size_t> digit(free.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < free.size(); ++i) base[free[i]] = alphabet[digit[i]];
    out.push_back(base);
    std::size_t pos = free.size();
    while (pos > 0) {
      --pos;
      if (++digit[pos] < alphabet.size()) break;
      digit[pos] = 0;
      if (pos == 0) return;
    }
    if (free.empty()) return;
  }
}

void steer_block_sequences(std::size_t n, Action steer, const std::vector<Action>& alphabet,
                           std::vector<ActionSequence>& out) {
  if (n < 2) return;
  for (std::size_t k0 = 0; k0 + 1 < n; ++k0) {
    ActionSequence base(n, Action::Maintain);
    base[k0] = steer;
    base[k0 + 1] = steer;
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != k0 && k != k0 + 1) free.push_back(k);
    }
    fill_free_slots(base, free, alphabet, out);
  }
}

}  // namespace

std::vector<ActionSequence> enumerate_sequences(SequenceMode mode, const GameParams& params) {
  const auto n = static_cast<std::size_t>(params.horizon);
  std::vector<ActionSequence> out;
  switch (mode) {
    case SequenceMode::Straight: {
      std::vector<std::size_t> all(n);
      for (std::size_t k = 0; k < n; ++k) all[k] = k;
      fill_free_slots(ActionSequence(n, Action::Maintain), all,
                      {Action::Maintain, Action::MildAccel, Action::MildDecel}, out);
      break;
    }
    case SequenceMode::LaneChange:
      steer_block_sequences(n, Action::SteerRight,
                            {Action::Maintain, Action::HardAccel, Action::HardDecel}, out);
      break;
    case SequenceMode::Abort:
      steer_block_sequences(n, Action::SteerLeft, {Action::Maintain, Action::HardDecel}, out);
      break;
  }
  return out;
}

Choice maxmin_choice(const PayoffMatrix& own) {
  Choice best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < own.rows; ++i) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < own.cols; ++j) worst = std::min(worst, own(i, j));
    if (i == 0 || worst > best.value) best = {i, worst};
  }
  return best;
}

std::vector<std::size_t> maxmin_set(const PayoffMatrix& own) {
  std::vector<double> worst(own.rows, std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < own.rows; ++i) {
    for (std::size_t j = 0; j < own.cols; ++j) worst[i] = std::min(worst[i], own(i, j));
    best = std::max(best, worst[i]);
  }
  std::vector<std::size_t> set;
  for (std::size_t i = 0; i < own.rows; ++i) {
    if (worst[i] == best) set.push_back(i);
  }
  return set;
}

Choice leader_choice(const PayoffMatrix& leader_payoff, const PayoffMatrix& follower_payoff) {
  const std::vector<std::size_t> responses = maxmin_set(follower_payoff);
  Choice best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < leader_payoff.rows; ++i) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t f : responses) worst = std::min(worst, leader_payoff(i, f));
    if (i == 0 || worst > best.value) best = {i, worst};
  }
  return best;
}

namespace {

// Precomputed single-agent quantities for every candidate and step.
struct CandidateTable {
  std::size_t count = 0;
  std::size_t steps = 0;
  std::vector<VehicleState> states;  // [cand * steps + k], state after step k
  std::vector<double> separable;     // [(cand * steps + k) * 4 + t], weighted r3..r6
  std::vector<char> hits_fixed;      // overlap with a non-player vehicle
  std::vector<double> fixed_gap;     // headway to nearest qualifying non-player

  std::size_t at(std::size_t c, std::size_t k) const { return c * steps + k; }
};

CandidateTable tabulate(const TrafficState& traffic, const GameParams& params, const Agent& agent,
                        std::span<const ActionSequence> candidates,
                        const std::vector<std::vector<VehicleState>>& fixed_tracks) {
  const auto n = static_cast<std::size_t>(params.horizon);
  const auto& w = params.weights;
  const double inf = std::numeric_limits<double>::infinity();
  CandidateTable table;
  table.count = candidates.size();
  table.steps = n;
  table.states.resize(table.count * n);
  table.separable.resize(table.count * n * 4);
  table.hits_fixed.resize(table.count * n);
  table.fixed_gap.resize(table.count * n);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const ActionSequence& seq = candidates[c];
    if (seq.size() != n) {
      throw std::invalid_argument("candidate sequence length differs from the game horizon");
    }
    VehicleState state = traffic[agent.vehicle];
    for (std::size_t k = 0; k < n; ++k) {
      state = advance(state, seq[k], params, params.dt);
      const std::size_t idx = table.at(c, k);
      table.states[idx] = state;
      double* sep = &table.separable[idx * 4];
      sep[0] = w[2] * state.s;
      sep[1] = w[3] * ((state.v - params.v_max) / params.v_max);
      sep[2] = w[4] * (-std::abs(state.l - agent.l_target));
      sep[3] = w[5] * effort_term(seq[k], params);
      bool hit = false;
      double gap = inf;
      for (const auto& track : fixed_tracks) {
        const VehicleState& other = track[k];
        if (boxes_overlap(state, other, params.box)) hit = true;
        const double h = distance_headway(state, other, params.box.length);
        if (h >= 0.0 && std::abs(other.l - state.l) <= params.box.width && h < gap) gap = h;
      }
      table.hits_fixed[idx] = hit ? 1 : 0;
      table.fixed_gap[idx] = gap;
    }
  }
  return table;
}

inline double pair_step_reward(const CandidateTable& t, std::size_t idx, const VehicleState& me,
                               const VehicleState& other, bool overlap, const GameParams& params) {
  const double r1 = (t.hits_fixed[idx] || overlap) ? -1.0 : 0.0;
  double h = t.fixed_gap[idx];
  const double gap = distance_headway(me, other, params.box.length);
  if (gap >= 0.0 && std::abs(other.l - me.l) <= params.box.width && gap < h) h = gap;
  const double r2 = h < me.v * params.desired_time_headway ? -1.0 : 0.0;
  const double* sep = &t.separable[idx * 4];
  return weighted_sum(params.weights, r1, r2, sep[0], sep[1], sep[2], sep[3]);
}

}  // namespace

Payoffs evaluate_payoffs(const TrafficState& traffic, const GameParams& params, const Agent& a,
                         std::span<const ActionSequence> a_candidates, const Agent& b,
                         std::span<const ActionSequence> b_candidates, bool need_second) {
  const auto n = static_cast<std::size_t>(params.horizon);
  std::vector<std::vector<VehicleState>> fixed_tracks;
  for (std::size_t i = 0; i < kVehicleCount; ++i) {
    if (!traffic.present[i] || i == a.vehicle || i == b.vehicle) continue;
    std::vector<VehicleState> track(n);
    VehicleState state = traffic[i];
    for (std::size_t k = 0; k < n; ++k) {
      state = step_kinematics(state, {}, params.dt);
      track[k] = state;
    }
    fixed_tracks.push_back(std::move(track));
  }
  const CandidateTable ta = tabulate(traffic, params, a, a_candidates, fixed_tracks);
  const CandidateTable tb = tabulate(traffic, params, b, b_candidates, fixed_tracks);

  Payoffs out{PayoffMatrix(ta.count, tb.count),
              need_second ? PayoffMatrix(tb.count, ta.count) : PayoffMatrix{}};
  for (std::size_t i = 0; i < ta.count; ++i) {
    for (std::size_t j = 0; j < tb.count; ++j) {
      double ra = 0.0;
      double rb = 0.0;
      double discount = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t ia = ta.at(i, k);
        const std::size_t ib = tb.at(j, k);
        const VehicleState& sa = ta.states[ia];
        const VehicleState& sb = tb.states[ib];
        const bool overlap = boxes_overlap(sa, sb, params.box);
        ra += discount * pair_step_reward(ta, ia, sa, sb, overlap, params);
        if (need_second) rb += discount * pair_step_reward(tb, ib, sb, sa, overlap, params);
        discount *= params.discount;
      }
      out.first(i, j) = ra;
      if (need_second) out.second(j, i) = rb;
    }
  }
  return out;
}

GameSolution solve_follower(const TrafficState& traffic, const GameParams& params,
                            const Agent& follower, std::span<const ActionSequence> follower_set,
                            const Agent& leader, std::span<const ActionSequence> leader_set) {
  if (follower_set.empty() || leader_set.empty()) {
    throw std::invalid_argument("solve_follower: empty candidate set");
  }
  const Payoffs payoffs =
      evaluate_payoffs(traffic, params, follower, follower_set, leader, leader_set, false);
  const Choice choice = maxmin_choice(payoffs.first);
  return {follower_set[choice.index], choice.index, choice.value};
}

GameSolution solve_leader(const TrafficState& traffic, const GameParams& params,
                          const Agent& leader, std::span<const ActionSequence> leader_set,
                          const Agent& follower, std::span<const ActionSequence> follower_set) {
  if (follower_set.empty() || leader_set.empty()) {
    throw std::invalid_argument("solve_leader: empty candidate set");
  }
  const Payoffs payoffs =
      evaluate_payoffs(traffic, params, leader, leader_set, follower, follower_set, true);
  const Choice choice = leader_choice(payoffs.first, payoffs.second);
  return {leader_set[choice.index], choice.index, choice.value};
}

CutinGame::CutinGame(GameParams params, std::size_t self, std::size_t opponent)
    : params_(std::move(params)), self_(self), opponent_(opponent) {
  params_.validate();
  straight_ = enumerate_sequences(SequenceMode::Straight, params_);
  with_lane_change_ = straight_;
  const auto lane_change = enumerate_sequences(SequenceMode::LaneChange, params_);
  with_lane_change_.insert(with_lane_change_.end(), lane_change.begin(), lane_change.end());
  with_abort_ = with_lane_change_;
  const auto abort = enumerate_sequences(SequenceMode::Abort, params_);
  with_abort_.insert(with_abort_.end(), abort.begin(), abort.end());
}

bool CutinGame::completed(const VehicleState& state) const {
  return std::abs(state.l - params_.target_lane) < params_.handoff_tolerance;
}

bool CutinGame::mid_change(const VehicleState& state) const {
  return std::abs(state.l - params_.origin_lane) >= params_.handoff_tolerance;
}

std::span<const ActionSequence> CutinGame::candidates(const VehicleState& state) const {
  if (mid_change(state)) return with_abort_;
  return with_lane_change_;
}

GameSolution CutinGame::policy(const TrafficState& traffic, Role role) const {
  const Agent me{self_, params_.target_lane};
  const Agent ego{opponent_, traffic[opponent_].l};
  const auto own = candidates(traffic[self_]);
  if (role == Role::Follower) {
    return solve_follower(traffic, params_, me, own, ego, straight_);
  }
  return solve_leader(traffic, params_, me, own, ego, straight_);
}

}  // namespace ecosim
