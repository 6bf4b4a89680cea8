#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ecosim/qp.hpp"

namespace ecosim::qp {

/// One hypothesis about the preceding vehicle over the horizon.
struct HorizonScenario {
  std::vector<double> preceding_positions;  // s^P(k), k = 0..N
  double probability = 1.0;
  bool enforce_safety = true;
};

/// Everything the eco-driving QP needs at one time instant.
struct HorizonData {
  double s0 = 0.0;
  double v0 = 0.0;
  std::vector<double> fixed_accels;  // already issued a(0..q-1)
  int horizon = 50;
  double dt = 0.1;
  std::vector<HorizonScenario> scenarios;

  double q_g = 1.0;
  double q_a = 960.0;
  double tau = 1.67;
  double d = 5.0;
  double tau_min = 0.67;
  double d_min = 3.0;
  double v_max = 30.0;
  double vehicle_length = 5.0;
  std::vector<double> margin;  // d_margin(k), k = 0..N

  double u_min = -6.0;
  double u_max = 3.0;
  double m1 = -0.06;
  double b1 = 4.2;
  double m2 = -0.12;
  double b2 = 6.0;

  /// Safety rows get a nonnegative slack each, charged linearly.
  bool soft_safety = false;
  double slack_penalty = 1e6;
  double slack_regularization = 1.0;
};

/// Condensed QP over the free accelerations a(q..q+N-1) (followed by the
/// safety slacks when soft). States are affine in the decision vector:
/// s = s_free + S z, v = v_free + V z for k = 0..N+q.
struct CondensedMpc {
  QpProblem problem;
  int delay = 0;
  int horizon = 0;
  int free_count = 0;
  int slack_count = 0;
  Eigen::VectorXd s_free;
  Eigen::VectorXd v_free;
  Eigen::MatrixXd S;
  Eigen::MatrixXd V;
};

/// Throws std::invalid_argument when a forecast does not cover k = 0..N or
/// the margin schedule has the wrong length.
CondensedMpc condense_mpc(const HorizonData& data);

}  // namespace ecosim::qp
