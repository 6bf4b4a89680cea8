#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ecosim/condense.hpp"
#include "ecosim/qp.hpp"

using namespace ecosim::qp;

namespace {

HorizonData base_data(int n, int q) {
  HorizonData d;
  d.s0 = 3.0;
  d.v0 = 18.0;
  d.horizon = n;
  for (int i = 0; i < q; ++i) d.fixed_accels.push_back(0.3 * std::sin(i + 1.0));
  HorizonScenario sc;
  for (int k = 0; k <= n; ++k) sc.preceding_positions.push_back(60.0 + 15.0 * k * d.dt);
  d.scenarios.push_back(sc);
  d.margin.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k <= n; ++k) d.margin[k] = 0.1 * k * d.dt;
  return d;
}

// Forward simulation of the full acceleration sequence.
void simulate(const HorizonData& d, const Eigen::VectorXd& z, std::vector<double>& s,
              std::vector<double>& v) {
  std::vector<double> a(d.fixed_accels);
  for (Eigen::Index j = 0; j < d.horizon; ++j) a.push_back(z[j]);
  s.assign(1, d.s0);
  v.assign(1, d.v0);
  for (double ak : a) {
    s.push_back(s.back() + v.back() * d.dt + 0.5 * ak * d.dt * d.dt);
    v.push_back(v.back() + ak * d.dt);
  }
}

double tracking_cost(const HorizonData& d, const Eigen::VectorXd& z) {
  std::vector<double> s;
  std::vector<double> v;
  simulate(d, z, s, v);
  double total_p = 0.0;
  for (const auto& sc : d.scenarios) total_p += sc.probability;
  double j = 0.0;
  for (const auto& sc : d.scenarios) {
    for (int k = 1; k <= d.horizon; ++k) {
      const double e = sc.preceding_positions[k] - d.vehicle_length - d.d - s[k] - d.tau * v[k];
      j += sc.probability / total_p * d.q_g * e * e;
    }
  }
  for (Eigen::Index i = 0; i < d.horizon; ++i) j += d.q_a * z[i] * z[i];
  return j;
}

}  // namespace

TEST(Condense, StatesMatchForwardSimulation) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int q : {0, 3, 6}) {
    const HorizonData d = base_data(12, q);
    const CondensedMpc c = condense_mpc(d);
    Eigen::VectorXd z(12);
    for (int i = 0; i < 12; ++i) z[i] = g(rng);
    std::vector<double> s;
    std::vector<double> v;
    simulate(d, z, s, v);
    const Eigen::VectorXd sc = c.s_free + c.S * z;
    const Eigen::VectorXd vc = c.v_free + c.V * z;
    for (int k = 0; k <= 12 + q; ++k) {
      EXPECT_NEAR(sc[k], s[k], 1e-9);
      EXPECT_NEAR(vc[k], v[k], 1e-9);
    }
  }
}

TEST(Condense, ObjectiveMatchesDirectCost) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int n : {2, 9}) {
    for (int q : {0, 2}) {
      const HorizonData d = base_data(n, q);
      const CondensedMpc c = condense_mpc(d);
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
      for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = g(rng);
        const double model = 0.5 * z.dot(c.problem.P * z) + c.problem.q.dot(z);
        const double direct = tracking_cost(d, z) - tracking_cost(d, zero);
        EXPECT_NEAR(model, direct, 1e-8 * std::max(1.0, std::abs(direct)));
      }
    }
  }
}

TEST(Condense, TwoStepUnconstrainedOptimum) {
  HorizonData d = base_data(2, 0);
  d.scenarios[0].enforce_safety = false;
  const CondensedMpc c = condense_mpc(d);
  // Stationary point of the exact quadratic.
  const Eigen::VectorXd z = c.problem.P.ldlt().solve(-c.problem.q);
  const double h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd zp = z;
    Eigen::VectorXd zm = z;
    zp[i] += h;
    zm[i] -= h;
    EXPECT_NEAR((tracking_cost(d, zp) - tracking_cost(d, zm)) / (2 * h), 0.0, 1e-4);
  }
  const auto sol = solve(c.problem);
  ASSERT_EQ(sol.status, QpStatus::Solved);
  if ((z.array() >= d.u_min).all() && (z.array() <= 2.0).all()) {
    EXPECT_NEAR((sol.z - z).lpNorm<Eigen::Infinity>(), 0.0, 1e-5);
  }
}

TEST(Condense, FixedAccelerationsOnlyShiftLinearTerms) {
  HorizonData a = base_data(10, 4);
  HorizonData b = a;
  b.fixed_accels = {1.0, -2.0, 0.5, 0.0};
  const CondensedMpc ca = condense_mpc(a);
  const CondensedMpc cb = condense_mpc(b);
  EXPECT_EQ(ca.problem.P, cb.problem.P);
  EXPECT_EQ(ca.problem.A, cb.problem.A);
  EXPECT_EQ(ca.S, cb.S);
  EXPECT_NE(ca.problem.q, cb.problem.q);
}

TEST(Condense, ScenarioWeightsAreLinear) {
  HorizonData one = base_data(8, 2);
  HorizonData two = one;
  for (double& s : two.scenarios[0].preceding_positions) s -= 20.0;
  HorizonData mix = one;
  mix.scenarios = {one.scenarios[0], two.scenarios[0]};
  mix.scenarios[0].probability = 0.7;
  mix.scenarios[1].probability = 0.3;
  const auto c1 = condense_mpc(one);
  const auto c2 = condense_mpc(two);
  const auto cm = condense_mpc(mix);
  EXPECT_LT((cm.problem.P - c1.problem.P).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT((cm.problem.q - (0.7 * c1.problem.q + 0.3 * c2.problem.q)).lpNorm<Eigen::Infinity>(),
            1e-9);
}

TEST(Condense, ConstraintRowsEvaluateDirectly) {
  const HorizonData d = base_data(7, 3);
  const CondensedMpc c = condense_mpc(d);
  Eigen::VectorXd z(7);
  for (int i = 0; i < 7; ++i) z[i] = 0.4 * i - 1.0;
  std::vector<double> s;
  std::vector<double> v;
  simulate(d, z, s, v);
  const Eigen::VectorXd az = c.problem.A * z;
  int r = 0;
  for (int k = 4; k <= 7; ++k, ++r) {
    EXPECT_NEAR(az[r] - c.problem.ub[r], v[k] - d.v_max, 1e-9);
  }
  for (int j = 0; j < 7; ++j, ++r) EXPECT_EQ(az[r], z[j]);
  for (int j = 0; j < 7; ++j, ++r) {
    EXPECT_NEAR(az[r] - c.problem.ub[r], z[j] - (d.m1 * v[3 + j] + d.b1), 1e-9);
  }
  for (int j = 0; j < 7; ++j, ++r) {
    EXPECT_NEAR(az[r] - c.problem.ub[r], z[j] - (d.m2 * v[3 + j] + d.b2), 1e-9);
  }
  for (int k = 1; k <= 7; ++k, ++r) {
    const double h = d.scenarios[0].preceding_positions[k] - s[k] - d.vehicle_length;
    EXPECT_NEAR(az[r] - c.problem.ub[r], d.d_min + d.tau_min * v[k] + d.margin[k] - h, 1e-9);
  }
  EXPECT_EQ(r, c.problem.constraints());
}

TEST(Condense, SoftModeAddsOneSlackPerSafetyRow) {
  HorizonData d = base_data(6, 2);
  d.soft_safety = true;
  const CondensedMpc c = condense_mpc(d);
  EXPECT_EQ(c.slack_count, 6);
  EXPECT_EQ(c.problem.variables(), 12);
  EXPECT_EQ(c.problem.q.tail(6), Eigen::VectorXd::Constant(6, d.slack_penalty));
}

TEST(Condense, RejectsShortForecasts) {
  HorizonData d = base_data(6, 0);
  d.scenarios[0].preceding_positions.resize(4);
  EXPECT_THROW(condense_mpc(d), std::invalid_argument);
  d = base_data(6, 0);
  d.margin.resize(3);
  EXPECT_THROW(condense_mpc(d), std::invalid_argument);
}

TEST(Condense, CommonWeightScalingKeepsOptimum) {
  HorizonData a = base_data(20, 6);
  HorizonData b = a;
  b.q_g *= 3.0;
  b.q_a *= 3.0;
  const auto sa = solve(condense_mpc(a).problem);
  const auto sb = solve(condense_mpc(b).problem);
  ASSERT_EQ(sa.status, QpStatus::Solved);
  ASSERT_EQ(sb.status, QpStatus::Solved);
  EXPECT_LT((sa.z - sb.z).lpNorm<Eigen::Infinity>(), 1e-5);
}
