#pragma once

#include <Eigen/Dense>

namespace reachplan::qp {

/// min ½ xᵀG x + gᵀx  s.t.  A_eq x = b_eq,  A_in x ≤ b_in.
/// G must be symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
};

enum class QpStatus { Optimal, Infeasible, NotPositiveDefinite, MaxIterations };

const char* to_string(QpStatus s);

/// Multipliers satisfy G x + g + A_eqᵀ nu + A_inᵀ mu = 0 with mu ≥ 0.
struct QpSolution {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd nu;
  Eigen::VectorXd mu;
  int iterations = 0;
};

/// Dense dual active-set method of Goldfarb and Idnani.
QpSolution solve_qp(const QpProblem& p, double feas_tol = 1e-9);

}  // namespace reachplan::qp
