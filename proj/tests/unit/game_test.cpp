#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ecosim/game.hpp"
#include "game_oracle.hpp"

using namespace ecosim;

namespace {

TrafficState front_cutin_state() {
  TrafficState t;
  t[kEgo] = {0.0, 20.0, 0.0};
  t[kCutin] = {30.0, 16.0, 4.0};
  t[kSameLaneLead] = {100.0, 16.0, 0.0};
  t[kAdjacentLaneLead] = {60.0, 16.0, 4.0};
  return t;
}

TrafficState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-20.0, 60.0);
  std::uniform_real_distribution<double> speed(8.0, 26.0);
  std::uniform_real_distribution<double> lat(0.0, 4.0);
  TrafficState t;
  t[kEgo] = {0.0, speed(rng), 0.0};
  t[kCutin] = {pos(rng), speed(rng), lat(rng)};
  t[kSameLaneLead] = {t[kEgo].s + 20.0 + pos(rng) + 20.0, speed(rng), 0.0};
  t[kAdjacentLaneLead] = {t[kCutin].s + 10.0 + std::abs(pos(rng)), speed(rng), 4.0};
  return t;
}

}  // namespace

TEST(Sequences, Counts) {
  GameParams p;
  EXPECT_EQ(enumerate_sequences(SequenceMode::Straight, p).size(), 243u);
  EXPECT_EQ(enumerate_sequences(SequenceMode::LaneChange, p).size(), 108u);
  EXPECT_EQ(enumerate_sequences(SequenceMode::Abort, p).size(), 32u);
  p.horizon = 2;
  EXPECT_EQ(enumerate_sequences(SequenceMode::Straight, p).size(), 9u);
  EXPECT_EQ(enumerate_sequences(SequenceMode::LaneChange, p).size(), 1u);
}

TEST(Sequences, LaneChangeCoversOneLaneWidth) {
  const GameParams p;
  for (const auto& seq : enumerate_sequences(SequenceMode::LaneChange, p)) {
    VehicleState x{0.0, 16.0, 4.0};
    for (Action a : seq) x = advance(x, a, p, p.dt);
    EXPECT_NEAR(x.l, 0.0, 1e-12);
    EXPECT_EQ(std::count(seq.begin(), seq.end(), Action::SteerRight), 2);
  }
}

TEST(Sequences, StraightIsLexicographic) {
  const GameParams p;
  const auto seqs = enumerate_sequences(SequenceMode::Straight, p);
  EXPECT_EQ(seqs.front(), ActionSequence(5, Action::Maintain));
  EXPECT_EQ(seqs.back(), ActionSequence(5, Action::MildDecel));
  EXPECT_TRUE(std::is_sorted(seqs.begin(), seqs.end()));
}

TEST(Reward, StandstillAlone) {
  const GameParams p;
  TrafficState t;
  t[kCutin] = {0.0, 0.0, 0.0};
  t.present = {false, true, false, false};
  EXPECT_DOUBLE_EQ(step_reward(t, kCutin, Action::Maintain, p, 0.0), -40.0);
}

TEST(Reward, OverlapCostsCollisionWeight) {
  const GameParams p;
  TrafficState t;
  t[kEgo] = {0.0, 0.0, 0.0};
  t[kCutin] = {3.0, 0.0, 1.0};
  t.present = {true, true, false, false};
  const auto r = reward_terms(t, kCutin, Action::Maintain, p, 0.0);
  EXPECT_EQ(r[0], -1.0);
  // r1 * 400 plus speed and lateral terms; the ego is behind so r2 stays 0.
  EXPECT_DOUBLE_EQ(step_reward(t, kCutin, Action::Maintain, p, 0.0), -400.0 + 3.0 - 40.0);
}

TEST(Reward, HeadwayBoundaryIsNotTooClose) {
  const GameParams p;
  TrafficState t;
  t[kCutin] = {0.0, 10.0, 0.0};
  t[kSameLaneLead] = {15.0, 10.0, 0.0};  // gap 10 = v * 1 s
  t.present = {false, true, true, false};
  EXPECT_EQ(reward_terms(t, kCutin, Action::Maintain, p, 0.0)[1], 0.0);
  t[kSameLaneLead].s = 14.9;
  EXPECT_EQ(reward_terms(t, kCutin, Action::Maintain, p, 0.0)[1], -1.0);
}

TEST(Rollout, MaintainClosedForm) {
  GameParams p;
  TrafficState t;
  t[kEgo] = {0.0, 20.0, 0.0};
  t[kCutin] = {0.0, 16.0, 4.0};
  t.present = {true, true, false, false};
  const ActionSequence m(5, Action::Maintain);
  const auto r = rollout(t, {kCutin, 4.0}, {kEgo, 0.0}, m, m, p);
  double expect = 0.0;
  for (int k = 0; k < 5; ++k) {
    expect += std::pow(0.9, k) * (16.0 * (k + 1) + 40.0 * (16.0 - 30.0) / 30.0);
  }
  EXPECT_NEAR(r.self_reward, expect, 1e-9);
}

TEST(Rollout, SingleStepWithoutDiscount) {
  GameParams p;
  p.horizon = 1;
  p.discount = 1.0;
  TrafficState t = front_cutin_state();
  const ActionSequence a{Action::MildAccel};
  const ActionSequence b{Action::Maintain};
  const auto r = rollout(t, {kCutin, 0.0}, {kEgo, 0.0}, a, b, p);
  EXPECT_DOUBLE_EQ(r.self_reward, step_reward(r.states[1], kCutin, a[0], p, 0.0));
}

TEST(Rollout, CollisionDominates) {
  GameParams p;
  TrafficState t;
  t[kEgo] = {0.0, 10.0, 0.0};
  t[kCutin] = {20.0, 5.0, 0.0};
  t.present = {true, true, false, false};
  const ActionSequence ego_fast(5, Action::Maintain);
  const ActionSequence cut(5, Action::Maintain);
  const auto r = rollout(t, {kEgo, 0.0}, {kCutin, 0.0}, ego_fast, cut, p);
  // Centers 20 m apart closing at 5 m/s: apart at k = 1, level at k = 4.
  EXPECT_EQ(reward_terms(r.states[1], kEgo, Action::Maintain, p, 0.0)[0], 0.0);
  EXPECT_EQ(reward_terms(r.states[4], kEgo, Action::Maintain, p, 0.0)[0], -1.0);
  EXPECT_LT(r.self_reward, 0.0);
}

TEST(Payoffs, TabulatedMatchesRolloutBitwise) {
  const GameParams p;
  const CutinGame game(p);
  const auto t = front_cutin_state();
  const auto own = game.candidates(t[kCutin]);
  const auto ego = game.opponent_candidates();
  const Agent me{kCutin, 0.0};
  const Agent other{kEgo, 0.0};
  const Payoffs pay = evaluate_payoffs(t, p, me, own, other, ego);
  for (std::size_t i = 0; i < own.size(); i += 7) {
    for (std::size_t j = 0; j < ego.size(); j += 11) {
      const auto r = rollout(t, me, other, own[i], ego[j], p);
      EXPECT_EQ(pay.first(i, j), r.self_reward);
      EXPECT_EQ(pay.second(j, i), r.other_reward);
    }
  }
}

TEST(Solvers, FollowerMaxMinHandCase) {
  PayoffMatrix m(2, 2);
  m.values = {3, 0, 2, 1};
  const Choice c = maxmin_choice(m);
  EXPECT_EQ(c.index, 1u);
  EXPECT_EQ(c.value, 1.0);
}

TEST(Solvers, TieBreakPicksFirst) {
  PayoffMatrix m(3, 2);
  m.values = {1, 2, 1, 2, 0, 5};
  EXPECT_EQ(maxmin_choice(m).index, 0u);
  EXPECT_EQ(maxmin_set(m), (std::vector<std::size_t>{0, 1}));
}

TEST(Solvers, LeaderAgainstIndifferentFollower) {
  // Follower rows are indifferent; leader maximizes its worst case over both.
  PayoffMatrix follower(2, 2);
  follower.values = {1, 1, 1, 1};
  PayoffMatrix leader(2, 2);
  leader.values = {10, -5, 2, 3};
  const Choice c = leader_choice(leader, follower);
  EXPECT_EQ(c.index, 1u);
  EXPECT_EQ(c.value, 2.0);
}

TEST(Solvers, LeaderBestRespondsToUniqueFollower) {
  PayoffMatrix follower(2, 2);
  follower.values = {0, 0, 5, 5};  // follower row 1 strictly better
  PayoffMatrix leader(2, 2);
  leader.values = {1, 4, 2, 3};
  const Choice c = leader_choice(leader, follower);
  EXPECT_EQ(c.index, 0u);
  EXPECT_EQ(c.value, 4.0);
}

TEST(Solvers, LeaderWithIdenticalDiagonalPayoffsCoordinates) {
  PayoffMatrix shared(3, 3);
  shared.values = {5, 0, 0, 0, 7, 0, 0, 0, 6};
  // Follower max-min is 0 for every row, so the leader faces all of them.
  EXPECT_EQ(maxmin_set(shared).size(), 3u);
  PayoffMatrix follower(3, 3);
  follower.values = {5, 0, 0, 0, 7, 0, 0, 0, 6};
  for (std::size_t i = 0; i < 3; ++i) follower(i, i) += 1.0;
  follower(1, 0) = 6.0;
  follower(1, 2) = 6.0;
  // Only follower row 1 has worst case 6; leader coordinates on column 1.
  const Choice c = leader_choice(shared, follower);
  EXPECT_EQ(c.index, 1u);
  EXPECT_EQ(c.value, 7.0);
}

TEST(Solvers, SingletonSetsReturnThePair) {
  const GameParams p;
  const auto t = front_cutin_state();
  const std::vector<ActionSequence> a{ActionSequence(5, Action::MildAccel)};
  const std::vector<ActionSequence> b{ActionSequence(5, Action::Maintain)};
  const auto r = rollout(t, {kCutin, 0.0}, {kEgo, 0.0}, a[0], b[0], p);
  EXPECT_EQ(solve_follower(t, p, {kCutin, 0.0}, a, {kEgo, 0.0}, b).value, r.self_reward);
  EXPECT_EQ(solve_leader(t, p, {kCutin, 0.0}, a, {kEgo, 0.0}, b).value, r.self_reward);
}

TEST(Solvers, ScalingWeightsScalesValues) {
  GameParams p;
  GameParams scaled = p;
  for (double& w : scaled.weights) w *= 4.0;  // powers of two keep the argmax bitwise
  const CutinGame g1(p);
  const CutinGame g2(scaled);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto t = random_state(rng);
    for (Role role : kRoles) {
      const auto a = g1.policy(t, role);
      const auto b = g2.policy(t, role);
      EXPECT_EQ(a.index, b.index);
      EXPECT_NEAR(b.value, 4.0 * a.value, 1e-9 * std::max(1.0, std::abs(b.value)));
    }
  }
}

TEST(Solvers, LeaderAtLeastFollowerWhenResponseUnique) {
  const GameParams p;
  const CutinGame game(p);
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_state(rng);
    const Agent me{kCutin, p.target_lane};
    const Agent ego{kEgo, t[kEgo].l};
    const auto own = game.candidates(t[kCutin]);
    const auto opp = game.opponent_candidates();
    const Payoffs pay = evaluate_payoffs(t, p, me, own, ego, opp);
    if (maxmin_set(pay.second).size() != 1) continue;
    ++checked;
    EXPECT_GE(game.policy(t, Role::Leader).value, game.policy(t, Role::Follower).value);
  }
  EXPECT_GT(checked, 0);
}

TEST(CutinPolicy, CandidateSetsDependOnProgress) {
  const CutinGame game(GameParams{});
  EXPECT_EQ(game.candidates({0.0, 16.0, 4.0}).size(), 351u);
  EXPECT_EQ(game.candidates({0.0, 16.0, 2.5}).size(), 383u);
  EXPECT_TRUE(game.completed({0.0, 16.0, 0.9}));
  EXPECT_FALSE(game.completed({0.0, 16.0, 1.0}));
}

TEST(CutinPolicy, FrontCutinChangesLane) {
  const CutinGame game(GameParams{});
  for (Role role : kRoles) {
    const auto sol = game.policy(front_cutin_state(), role);
    EXPECT_NE(std::find(sol.sequence.begin(), sol.sequence.end(), Action::SteerRight),
              sol.sequence.end())
        << to_string(role);
  }
}

TEST(CutinPolicy, AgreesWithExhaustiveOracle) {
  const GameParams p;
  const CutinGame game(p);
  const auto t = front_cutin_state();
  const auto own = game.candidates(t[kCutin]);
  const auto opp = game.opponent_candidates();
  oracle::Table mine;
  oracle::Table theirs;
  oracle::rollout_tables(t, p, {kCutin, 0.0}, own, {kEgo, 0.0}, opp, mine, theirs);
  EXPECT_EQ(game.policy(t, Role::Follower).index, oracle::follower_answer(mine).index);
  EXPECT_EQ(game.policy(t, Role::Leader).index, oracle::leader_answer(mine, theirs).index);
}

TEST(Solvers, MatchExhaustiveOracleOnShortHorizon) {
  GameParams p;
  p.horizon = 2;
  const CutinGame game(p);
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_state(rng);
    const Agent me{kCutin, p.target_lane};
    const Agent ego{kEgo, t[kEgo].l};
    const auto own = game.candidates(t[kCutin]);
    const auto opp = game.opponent_candidates();
    oracle::Table mine;
    oracle::Table theirs;
    oracle::rollout_tables(t, p, me, own, ego, opp, mine, theirs);
    const auto f = solve_follower(t, p, me, own, ego, opp);
    const auto l = solve_leader(t, p, me, own, ego, opp);
    const auto fo = oracle::follower_answer(mine);
    const auto lo = oracle::leader_answer(mine, theirs);
    EXPECT_EQ(f.index, fo.index);
    EXPECT_EQ(f.value, fo.value);
    EXPECT_EQ(l.index, lo.index);
    EXPECT_EQ(l.value, lo.value);
  }
}

TEST(Params, Validation) {
  GameParams p;
  p.discount = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = GameParams{};
  p.a_mild = 3.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(parse_role("boss"), ConfigError);
}
