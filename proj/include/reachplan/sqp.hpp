#pragma once

#include <Eigen/Dense>

namespace reachplan::nlp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Values (and optionally first derivatives) of
///   min f(z)  s.t.  c_in(z) ≤ 0,  c_eq(z) = 0,  lb ≤ z ≤ ub.
struct NlpEval {
  double f = 0.0;
  Vec grad;
  Vec c_in;
  Mat J_in;
  Vec c_eq;
  Mat J_eq;
};

class NlpModel {
 public:
  virtual ~NlpModel() = default;
  virtual Eigen::Index num_vars() const = 0;
  virtual const Vec& lower() const = 0;
  virtual const Vec& upper() const = 0;
  virtual void evaluate(const Vec& z, NlpEval& out, bool derivatives) const = 0;
  /// Positive semidefinite curvature estimate used to seed the quasi-Newton
  /// matrix (and, in Structured mode, as the Hessian at every iteration).
  virtual Mat hessian_estimate(const Vec& z, const Vec& mu_in, const Vec& nu_eq) const = 0;
};

enum class HessianMode { Bfgs, Structured };

struct SqpOptions {
  int max_iter = 100;
  double kkt_tol = 1e-6;
  HessianMode hessian = HessianMode::Bfgs;
  double min_curvature = 1e-6;
  double elastic_weight = 1e4;
};

enum class SqpStatus { Converged, MaxIterations, Failed };

const char* to_string(SqpStatus s);

struct SqpResult {
  SqpStatus status = SqpStatus::Failed;
  Vec z;
  double f = 0.0;
  Vec mu_in;
  Vec nu_eq;
  double kkt = 0.0;
  double violation = 0.0;
  int iterations = 0;
  int elastic_steps = 0;
};

/// Line-search SQP on the ℓ1 merit function with damped BFGS (or a
/// user-supplied structured Hessian) and dense dual active-set subproblems.
/// Infeasible linearizations fall back to an elastic ℓ1 subproblem. The
/// returned point is the best iterate seen when not converged.
SqpResult solve_sqp(const NlpModel& model, const Vec& z0, const SqpOptions& opts = {});

}  // namespace reachplan::nlp
