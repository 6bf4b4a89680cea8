#include "ecosim/condense.hpp"

#include <limits>
#include <stdexcept>

namespace ecosim::qp {

CondensedMpc condense_mpc(const HorizonData& data) {
  const int n_h = data.horizon;
  const int q = static_cast<int>(data.fixed_accels.size());
  const int total = n_h + q;  // accelerations a(0..total-1)
  const double dt = data.dt;
  const double inf = std::numeric_limits<double>::infinity();
  if (n_h < 1) throw std::invalid_argument("condense_mpc: horizon must be positive");
  if (data.scenarios.empty()) throw std::invalid_argument("condense_mpc: no scenarios");
  if (static_cast<int>(data.margin.size()) != n_h + 1) {
    throw std::invalid_argument("condense_mpc: margin schedule must cover k = 0..N");
  }
  for (const auto& sc : data.scenarios) {
    if (static_cast<int>(sc.preceding_positions.size()) < n_h + 1) {
      throw std::invalid_argument("condense_mpc: prediction shorter than the MPC horizon");
    }
  }

  CondensedMpc out;
  out.delay = q;
  out.horizon = n_h;
  out.free_count = n_h;
  out.s_free.resize(total + 1);
  out.v_free.resize(total + 1);
  out.S = Eigen::MatrixXd::Zero(total + 1, n_h);
  out.V = Eigen::MatrixXd::Zero(total + 1, n_h);
  for (int k = 0; k <= total; ++k) {
    double s = data.s0 + k * dt * data.v0;
    double v = data.v0;
    for (int i = 0; i < std::min(k, q); ++i) {
      const double a = data.fixed_accels[static_cast<std::size_t>(i)];
      s += dt * dt * (k - i - 0.5) * a;
      v += dt * a;
    }
    out.s_free[k] = s;
    out.v_free[k] = v;
    for (int j = 0; q + j < k; ++j) {
      out.S(k, j) = dt * dt * (k - (q + j) - 0.5);
      out.V(k, j) = dt;
    }
  }

  double total_prob = 0.0;
  int enforced = 0;
  for (const auto& sc : data.scenarios) {
    total_prob += sc.probability;
    if (sc.enforce_safety) ++enforced;
  }
  if (!(total_prob > 0.0)) throw std::invalid_argument("condense_mpc: probabilities sum to 0");

  const int slack = data.soft_safety ? enforced * n_h : 0;
  const int nz = n_h + slack;
  out.slack_count = slack;

  QpProblem& p = out.problem;
  p.P = Eigen::MatrixXd::Zero(nz, nz);
  p.q = Eigen::VectorXd::Zero(nz);

  // Headway tracking, e(k) = c(k) - g(k)'z with g independent of the scenario.
  Eigen::MatrixXd G(n_h, n_h);
  for (int k = 1; k <= n_h; ++k) G.row(k - 1) = out.S.row(k) + data.tau * out.V.row(k);
  p.P.topLeftCorner(n_h, n_h) = 2.0 * data.q_g * (G.transpose() * G);
  for (const auto& sc : data.scenarios) {
    const double w = sc.probability / total_prob;
    Eigen::VectorXd c(n_h);
    for (int k = 1; k <= n_h; ++k) {
      c[k - 1] = sc.preceding_positions[static_cast<std::size_t>(k)] - data.vehicle_length -
                 data.d - out.s_free[k] - data.tau * out.v_free[k];
    }
    p.q.head(n_h) += -2.0 * w * data.q_g * (G.transpose() * c);
  }
  p.P.topLeftCorner(n_h, n_h).diagonal().array() += 2.0 * data.q_a;
  if (slack > 0) {
    p.P.bottomRightCorner(slack, slack).diagonal().array() += data.slack_regularization;
    p.q.tail(slack).setConstant(data.slack_penalty);
  }

  // Rows: speed (k = q+1..N), acceleration box, two power lines, safety, slack >= 0.
  const int speed_rows = std::max(0, n_h - q);
  const int rows = speed_rows + 3 * n_h + enforced * n_h + slack;
  p.A = Eigen::MatrixXd::Zero(rows, nz);
  p.lb = Eigen::VectorXd::Constant(rows, -inf);
  p.ub = Eigen::VectorXd::Constant(rows, inf);
  int r = 0;
  for (int k = q + 1; k <= n_h; ++k, ++r) {
    p.A.block(r, 0, 1, n_h) = out.V.row(k);
    p.lb[r] = -out.v_free[k];
    p.ub[r] = data.v_max - out.v_free[k];
  }
  for (int j = 0; j < n_h; ++j, ++r) {
    p.A(r, j) = 1.0;
    p.lb[r] = data.u_min;
    p.ub[r] = data.u_max;
  }
  for (int j = 0; j < n_h; ++j, ++r) {
    p.A.block(r, 0, 1, n_h) = -data.m1 * out.V.row(q + j);
    p.A(r, j) += 1.0;
    p.ub[r] = data.b1 + data.m1 * out.v_free[q + j];
  }
  for (int j = 0; j < n_h; ++j, ++r) {
    p.A.block(r, 0, 1, n_h) = -data.m2 * out.V.row(q + j);
    p.A(r, j) += 1.0;
    p.ub[r] = data.b2 + data.m2 * out.v_free[q + j];
  }
  int slack_col = n_h;
  for (const auto& sc : data.scenarios) {
    if (!sc.enforce_safety) continue;
    for (int k = 1; k <= n_h; ++k, ++r) {
      p.A.block(r, 0, 1, n_h) = out.S.row(k) + data.tau_min * out.V.row(k);
      p.ub[r] = sc.preceding_positions[static_cast<std::size_t>(k)] - data.vehicle_length -
                data.d_min - data.margin[static_cast<std::size_t>(k)] - out.s_free[k] -
                data.tau_min * out.v_free[k];
      if (slack > 0) p.A(r, slack_col++) = -1.0;
    }
  }
  for (int e = 0; e < slack; ++e, ++r) {
    p.A(r, n_h + e) = 1.0;
    p.lb[r] = 0.0;
  }
  return out;
}

}  // namespace ecosim::qp
