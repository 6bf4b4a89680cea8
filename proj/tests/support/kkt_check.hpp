#pragma once

// Optimality residuals of  min 1/2 z'Pz + q'z  s.t.  lb <= Az <= ub  with the
// convention that y > 0 marks an active upper bound and y < 0 a lower one.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace oracle {

struct Kkt {
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double sign = 0.0;  // multipliers pointing the wrong way at finite bounds
};

inline Kkt check_kkt(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                     const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                     const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  Kkt k;
  const Eigen::VectorXd az = A * z;
  for (Eigen::Index i = 0; i < az.size(); ++i) {
    k.primal = std::max(k.primal, std::max(lb[i] - az[i], az[i] - ub[i]));
    if (y[i] > 0.0) {
      if (std::isfinite(ub[i])) {
        k.complementarity = std::max(k.complementarity, y[i] * std::abs(ub[i] - az[i]));
      } else {
        k.sign = std::max(k.sign, y[i]);
      }
    } else if (y[i] < 0.0) {
      if (std::isfinite(lb[i])) {
        k.complementarity = std::max(k.complementarity, -y[i] * std::abs(az[i] - lb[i]));
      } else {
        k.sign = std::max(k.sign, -y[i]);
      }
    }
  }
  k.dual = (P * z + q + A.transpose() * y).lpNorm<Eigen::Infinity>();
  return k;
}

}  // namespace oracle
