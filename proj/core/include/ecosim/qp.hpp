#pragma once

#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>

namespace ecosim::qp {

/// minimize 1/2 z'Pz + q'z  subject to  lb <= Az <= ub.
/// Infinite bounds are allowed.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  Eigen::Index variables() const { return q.size(); }
  Eigen::Index constraints() const { return A.rows(); }

  /// Throws std::invalid_argument on inconsistent dimensions, an asymmetric
  /// P or crossed bounds.
  void validate() const;
};

enum class QpStatus { Solved, MaxIter, PrimalInfeasible };

std::string_view to_string(QpStatus status);

struct QpSettings {
  double tol_prim = 1e-6;
  double tol_dual = 1e-6;
  int max_iter = 20000;
  double alpha = 1.6;  // over-relaxation
  double rho = 0.1;
  double sigma = 1e-6;
  int adapt_interval = 25;
  double infeasibility_tol = 1e-5;
  bool polish = true;
};

struct QpSolution {
  Eigen::VectorXd z;
  Eigen::VectorXd y;
  QpStatus status = QpStatus::MaxIter;
  double prim_residual = 0.0;  // ||Az - proj(Az)||_inf
  double dual_residual = 0.0;  // ||Pz + q + A'y||_inf
  int iterations = 0;
  bool polished = false;
};

/// Operator-splitting solver. Deterministic for identical inputs.
QpSolution solve(const QpProblem& problem, const QpSettings& settings = {});

/// Residuals of a candidate primal/dual pair, as used for the Solved status.
struct KktResiduals {
  double prim = 0.0;
  double dual = 0.0;
};
KktResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& y);

/// Plain-text dump:
///
///   ecosim-qp 1
///   <n> <m>
///   P   followed by n rows of n numbers
///   q   followed by n numbers
///   A   followed by m rows of n numbers
///   lb  followed by m numbers ("-inf" allowed)
///   ub  followed by m numbers ("inf" allowed)
///
/// Numbers use round-trip precision.
void write_problem(std::ostream& out, const QpProblem& problem);
QpProblem read_problem(std::istream& in);

}  // namespace ecosim::qp
