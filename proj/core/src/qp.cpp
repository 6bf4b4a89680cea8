#include "ecosim/qp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecosim::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqualityScale = 1e3;
constexpr double kPolishDelta = 1e-9;

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

Eigen::VectorXd project(const Eigen::VectorXd& v, const Eigen::VectorXd& lb,
                        const Eigen::VectorXd& ub) {
  return v.cwiseMax(lb).cwiseMin(ub);
}

// Per-row penalty: free rows barely weighted, equality rows stiffened.
Eigen::VectorXd row_penalties(const QpProblem& p, double rho) {
  Eigen::VectorXd r(p.constraints());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (std::isinf(p.lb[i]) && std::isinf(p.ub[i])) {
      r[i] = kRhoMin;
    } else if (p.ub[i] - p.lb[i] < 1e-10) {
      r[i] = kEqualityScale * rho;
    } else {
      r[i] = rho;
    }
  }
  return r;
}

struct Polished {
  Eigen::VectorXd z;
  Eigen::VectorXd y;
  KktResiduals residuals;
  bool sign_ok = false;
};

// Solves the equality-constrained problem on the guessed active set with a
// regularized KKT system plus iterative refinement.
Polished polish(const QpProblem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  const Eigen::Index n = p.variables();
  const Eigen::Index m = p.constraints();
  const Eigen::VectorXd az = p.A * z;
  std::vector<Eigen::Index> rows;
  std::vector<double> targets;
  std::vector<int> side;  // -1 lower, +1 upper, 0 equality
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool equality = p.ub[i] - p.lb[i] < 1e-10;
    if (equality) {
      rows.push_back(i);
      targets.push_back(p.lb[i]);
      side.push_back(0);
    } else if (std::isfinite(p.lb[i]) && az[i] - p.lb[i] < -y[i]) {
      rows.push_back(i);
      targets.push_back(p.lb[i]);
      side.push_back(-1);
    } else if (std::isfinite(p.ub[i]) && p.ub[i] - az[i] < y[i]) {
      rows.push_back(i);
      targets.push_back(p.ub[i]);
      side.push_back(1);
    }
  }
  const auto na = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + na, n + na);
  Eigen::MatrixXd exact = Eigen::MatrixXd::Zero(n + na, n + na);
  kkt.topLeftCorner(n, n) = p.P;
  exact.topLeftCorner(n, n) = p.P;
  kkt.topLeftCorner(n, n).diagonal().array() += kPolishDelta;
  Eigen::VectorXd rhs(n + na);
  rhs.head(n) = -p.q;
  for (Eigen::Index k = 0; k < na; ++k) {
    const auto row = p.A.row(rows[static_cast<std::size_t>(k)]);
    kkt.block(n + k, 0, 1, n) = row;
    kkt.block(0, n + k, n, 1) = row.transpose();
    exact.block(n + k, 0, 1, n) = row;
    exact.block(0, n + k, n, 1) = row.transpose();
    kkt(n + k, n + k) = -kPolishDelta;
    rhs[n + k] = targets[static_cast<std::size_t>(k)];
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::VectorXd sol = lu.solve(rhs);
  for (int it = 0; it < 5; ++it) {
    sol += lu.solve(rhs - exact * sol);
  }
  Polished out;
  out.z = sol.head(n);
  out.y = Eigen::VectorXd::Zero(m);
  out.sign_ok = true;
  for (Eigen::Index k = 0; k < na; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const double yk = sol[n + k];
    out.y[rows[idx]] = yk;
    if ((side[idx] < 0 && yk > 0.0) || (side[idx] > 0 && yk < 0.0)) out.sign_ok = false;
  }
  out.residuals = kkt_residuals(p, out.z, out.y);
  return out;
}

bool certifies_infeasibility(const QpProblem& p, const Eigen::VectorXd& dy, double tol) {
  const double norm = inf_norm(dy);
  if (norm < 1e-12) return false;
  if (inf_norm(p.A.transpose() * dy) > tol * norm) return false;
  double support = 0.0;
  for (Eigen::Index i = 0; i < dy.size(); ++i) {
    if (dy[i] > 0.0) {
      if (std::isinf(p.ub[i])) {
        if (dy[i] > tol * norm) return false;
        continue;
      }
      support += p.ub[i] * dy[i];
    } else if (dy[i] < 0.0) {
      if (std::isinf(p.lb[i])) {
        if (-dy[i] > tol * norm) return false;
        continue;
      }
      support += p.lb[i] * dy[i];
    }
  }
  return support < -tol * norm;
}

}  // namespace

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Solved: return "solved";
    case QpStatus::MaxIter: return "max_iter";
    case QpStatus::PrimalInfeasible: return "primal_infeasible";
  }
  return "unknown";
}

void QpProblem::validate() const {
  const Eigen::Index n = q.size();
  if (P.rows() != n || P.cols() != n) throw std::invalid_argument("qp: P must be n x n");
  if (A.cols() != n && A.rows() > 0) throw std::invalid_argument("qp: A must have n columns");
  if (lb.size() != A.rows() || ub.size() != A.rows()) {
    throw std::invalid_argument("qp: bound vectors must have one entry per row of A");
  }
  if (n > 0 && (P - P.transpose()).lpNorm<Eigen::Infinity>() >= 1e-10) {
    throw std::invalid_argument("qp: P is not symmetric");
  }
  for (Eigen::Index i = 0; i < lb.size(); ++i) {
    if (std::isnan(lb[i]) || std::isnan(ub[i]) || lb[i] > ub[i]) {
      throw std::invalid_argument("qp: lb must not exceed ub (row " + std::to_string(i) + ")");
    }
  }
}

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& y) {
  const Eigen::VectorXd az = p.A * z;
  KktResiduals r;
  r.prim = inf_norm(az - project(az, p.lb, p.ub));
  r.dual = inf_norm(p.P * z + p.q + p.A.transpose() * y);
  return r;
}

QpSolution solve(const QpProblem& p, const QpSettings& settings) {
  p.validate();
  const Eigen::Index n = p.variables();
  const Eigen::Index m = p.constraints();
  const double alpha = settings.alpha;
  const double sigma = settings.sigma;

  double rho = settings.rho;
  Eigen::VectorXd rho_vec = row_penalties(p, rho);
  auto factor = [&]() {
    Eigen::MatrixXd k = p.P + p.A.transpose() * rho_vec.asDiagonal() * p.A;
    k.diagonal().array() += sigma;
    return Eigen::LLT<Eigen::MatrixXd>(k);
  };
  Eigen::LLT<Eigen::MatrixXd> kkt = factor();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = project(Eigen::VectorXd::Zero(m), p.lb, p.ub);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  QpSolution sol;
  for (int iter = 1; iter <= settings.max_iter; ++iter) {
    const Eigen::VectorXd x_prev = x;
    const Eigen::VectorXd z_prev = z;
    const Eigen::VectorXd y_prev = y;

    const Eigen::VectorXd rhs =
        sigma * x_prev - p.q + p.A.transpose() * (rho_vec.cwiseProduct(z_prev) - y_prev);
    const Eigen::VectorXd x_tilde = kkt.solve(rhs);
    const Eigen::VectorXd z_tilde = p.A * x_tilde;
    x = alpha * x_tilde + (1.0 - alpha) * x_prev;
    const Eigen::VectorXd z_relaxed = alpha * z_tilde + (1.0 - alpha) * z_prev;
    z = project(z_relaxed + y_prev.cwiseQuotient(rho_vec), p.lb, p.ub);
    y = y_prev + rho_vec.cwiseProduct(z_relaxed - z);

    const Eigen::VectorXd ax = p.A * x;
    const Eigen::VectorXd px = p.P * x;
    const Eigen::VectorXd aty = p.A.transpose() * y;
    const double prim = inf_norm(ax - z);
    const double dual = inf_norm(px + p.q + aty);
    sol.iterations = iter;

    if (prim <= settings.tol_prim && dual <= settings.tol_dual) {
      sol.z = x;
      sol.y = y;
      sol.status = QpStatus::Solved;
      if (settings.polish) {
        const Polished pol = polish(p, x, y);
        if (pol.sign_ok && pol.residuals.prim <= settings.tol_prim &&
            pol.residuals.dual <= settings.tol_dual) {
          sol.z = pol.z;
          sol.y = pol.y;
          sol.polished = true;
        }
      }
      const KktResiduals r = kkt_residuals(p, sol.z, sol.y);
      sol.prim_residual = r.prim;
      sol.dual_residual = r.dual;
      return sol;
    }

    if (m > 0 && certifies_infeasibility(p, y - y_prev, settings.infeasibility_tol)) {
      sol.z = x;
      sol.y = y - y_prev;
      sol.status = QpStatus::PrimalInfeasible;
      const KktResiduals r = kkt_residuals(p, x, y);
      sol.prim_residual = r.prim;
      sol.dual_residual = r.dual;
      return sol;
    }

    if (settings.adapt_interval > 0 && iter % settings.adapt_interval == 0) {
      // Try to jump to the exact solution on the current active-set guess.
      if (settings.polish) {
        const Polished pol = polish(p, x, y);
        if (pol.sign_ok && pol.residuals.prim <= settings.tol_prim &&
            pol.residuals.dual <= settings.tol_dual) {
          sol.z = pol.z;
          sol.y = pol.y;
          sol.status = QpStatus::Solved;
          sol.prim_residual = pol.residuals.prim;
          sol.dual_residual = pol.residuals.dual;
          sol.polished = true;
          return sol;
        }
      }
      const double prim_scale = std::max({inf_norm(ax), inf_norm(z), 1e-10});
      const double dual_scale = std::max({inf_norm(px), inf_norm(aty), inf_norm(p.q), 1e-10});
      const double ratio =
          std::sqrt((prim / prim_scale + 1e-16) / (dual / dual_scale + 1e-16));
      const double new_rho = std::clamp(rho * ratio, kRhoMin, kRhoMax);
      if (new_rho > 5.0 * rho || new_rho < 0.2 * rho) {
        rho = new_rho;
        rho_vec = row_penalties(p, rho);
        kkt = factor();
      }
    }
  }

  sol.z = x;
  sol.y = y;
  sol.status = QpStatus::MaxIter;
  if (settings.polish) {
    const Polished pol = polish(p, x, y);
    if (pol.sign_ok && pol.residuals.prim <= settings.tol_prim &&
        pol.residuals.dual <= settings.tol_dual) {
      sol.z = pol.z;
      sol.y = pol.y;
      sol.status = QpStatus::Solved;
      sol.polished = true;
    }
  }
  const KktResiduals r = kkt_residuals(p, sol.z, sol.y);
  sol.prim_residual = r.prim;
  sol.dual_residual = r.dual;
  return sol;
}

namespace {

void write_number(std::ostream& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    write_number(out, v[i]);
  }
  out << '\n';
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      write_number(out, a(i, j));
    }
    out << '\n';
  }
}

double read_number(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::runtime_error("qp dump: unexpected end of input");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) {
    throw std::runtime_error("qp dump: bad number '" + token + "'");
  }
  return v;
}

void expect(std::istream& in, const std::string& tag) {
  std::string token;
  if (!(in >> token) || token != tag) {
    throw std::runtime_error("qp dump: expected '" + tag + "', got '" + token + "'");
  }
}

}  // namespace

void write_problem(std::ostream& out, const QpProblem& p) {
  out << "ecosim-qp 1\n" << p.variables() << ' ' << p.constraints() << '\n';
  out << "P\n";
  write_matrix(out, p.P);
  out << "q\n";
  write_vector(out, p.q);
  out << "A\n";
  write_matrix(out, p.A);
  out << "lb\n";
  write_vector(out, p.lb);
  out << "ub\n";
  write_vector(out, p.ub);
}

QpProblem read_problem(std::istream& in) {
  expect(in, "ecosim-qp");
  expect(in, "1");
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  if (!(in >> n >> m) || n < 0 || m < 0) throw std::runtime_error("qp dump: bad dimensions");
  QpProblem p;
  p.P.resize(n, n);
  p.q.resize(n);
  p.A.resize(m, n);
  p.lb.resize(m);
  p.ub.resize(m);
  expect(in, "P");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) p.P(i, j) = read_number(in);
  expect(in, "q");
  for (Eigen::Index i = 0; i < n; ++i) p.q[i] = read_number(in);
  expect(in, "A");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) p.A(i, j) = read_number(in);
  expect(in, "lb");
  for (Eigen::Index i = 0; i < m; ++i) p.lb[i] = read_number(in);
  expect(in, "ub");
  for (Eigen::Index i = 0; i < m; ++i) p.ub[i] = read_number(in);
  p.validate();
  return p;
}

}  // namespace ecosim::qp
