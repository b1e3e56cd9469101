#pragma once

#include <Eigen/Dense>

namespace reachplan::lp {

/// min cᵀx  s.t.  A_ub x ≤ b_ub,  A_eq x = b_eq,  lb ≤ x ≤ ub.
///
/// Empty `lb` means every variable is bounded below by zero and empty `ub`
/// means no upper bounds. Infinite entries are allowed in both. A matrix with
/// zero rows may be left default-constructed.
struct LpProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  Eigen::Index num_vars() const { return c.size(); }
};

enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status s);

struct LpSolution {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Multipliers of the A_ub rows (≥ 0) and of the A_eq rows (free sign),
  /// such that reduced_costs = c + A_ubᵀ dual_ub + A_eqᵀ dual_eq.
  Eigen::VectorXd dual_ub;
  Eigen::VectorXd dual_eq;
  Eigen::VectorXd reduced_costs;
  int iterations = 0;
};

/// Primal feasibility tolerance reported for optimal solutions.
inline constexpr double kFeasibilityTol = 1e-7;

/// Dense two-phase simplex on a compact dictionary with Bland's rule.
/// Never throws for infeasible or unbounded problems; those are statuses.
/// Throws reachplan::Error on malformed dimensions.
LpSolution solve_lp(const LpProblem& p);

}  // namespace reachplan::lp
