#include "reachplan/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "reachplan/qp.hpp"

namespace reachplan::nlp {

const char* to_string(SqpStatus s) {
  switch (s) {
    case SqpStatus::Converged: return "Converged";
    case SqpStatus::MaxIterations: return "MaxIterations";
    case SqpStatus::Failed: return "Failed";
  }
  return "Unknown";
}

namespace {

constexpr double kBoundTol = 1e-9;

double violation(const NlpEval& e) {
  double v = 0.0;
  if (e.c_in.size()) v = std::max(v, e.c_in.maxCoeff());
  if (e.c_eq.size()) v = std::max(v, e.c_eq.cwiseAbs().maxCoeff());
  return std::max(v, 0.0);
}

double l1_violation(const NlpEval& e) {
  return e.c_in.cwiseMax(0.0).sum() + e.c_eq.cwiseAbs().sum();
}

Vec lagrangian_gradient(const NlpEval& e, const Vec& mu, const Vec& nu) {
  Vec g = e.grad;
  if (e.c_in.size()) g.noalias() += e.J_in.transpose() * mu;
  if (e.c_eq.size()) g.noalias() += e.J_eq.transpose() * nu;
  return g;
}

// Symmetric matrix with eigenvalues clipped from below.
Mat make_positive(const Mat& H, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
  Vec ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

struct Subproblem {
  bool ok = false;
  bool elastic = false;
  Vec d;
  Vec mu;
  Vec nu;
  double linear_l1 = 0.0;  // ℓ1 violation of the linearization at d
};

Subproblem solve_subproblem(const Mat& B, const NlpEval& e, const Vec& z, const Vec& lb, const Vec& ub,
                            const SqpOptions& opts, bool force_elastic) {
  const auto n = z.size();
  const auto mi = e.c_in.size();
  const auto me = e.c_eq.size();
  std::vector<Eigen::Index> lo_idx;
  std::vector<Eigen::Index> up_idx;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isfinite(lb(j))) lo_idx.push_back(j);
    if (std::isfinite(ub(j))) up_idx.push_back(j);
  }
  const auto nb = static_cast<Eigen::Index>(lo_idx.size() + up_idx.size());

  Subproblem out;
  if (!force_elastic) {
    qp::QpProblem p;
    p.G = B;
    p.g = e.grad;
    p.A_eq = e.J_eq;
    p.b_eq = -e.c_eq;
    p.A_in = Mat::Zero(mi + nb, n);
    p.b_in = Vec::Zero(mi + nb);
    if (mi) {
      p.A_in.topRows(mi) = e.J_in;
      p.b_in.head(mi) = -e.c_in;
    }
    Eigen::Index r = mi;
    for (auto j : lo_idx) {
      p.A_in(r, j) = -1.0;
      p.b_in(r++) = z(j) - lb(j);
    }
    for (auto j : up_idx) {
      p.A_in(r, j) = 1.0;
      p.b_in(r++) = ub(j) - z(j);
    }
    const auto s = qp::solve_qp(p);
    if (s.status == qp::QpStatus::Optimal) {
      out.ok = true;
      out.d = s.x;
      out.mu = s.mu.head(mi);
      out.nu = s.nu;
      return out;
    }
  }

  // Elastic form: slacks on every nonlinear constraint, ℓ1 + small ℓ2 penalty.
  const Eigen::Index ns = mi + 2 * me;
  const Eigen::Index nt = n + ns;
  qp::QpProblem p;
  p.G = Mat::Zero(nt, nt);
  p.G.topLeftCorner(n, n) = B;
  p.G.bottomRightCorner(ns, ns).diagonal().setOnes();
  p.g = Vec::Zero(nt);
  p.g.head(n) = e.grad;
  p.g.tail(ns).setConstant(opts.elastic_weight);
  p.A_eq = Mat::Zero(me, nt);
  p.b_eq = -e.c_eq;
  if (me) {
    p.A_eq.leftCols(n) = e.J_eq;
    p.A_eq.block(0, n + mi, me, me) = -Mat::Identity(me, me);
    p.A_eq.block(0, n + mi + me, me, me) = Mat::Identity(me, me);
  }
  p.A_in = Mat::Zero(mi + nb + ns, nt);
  p.b_in = Vec::Zero(mi + nb + ns);
  if (mi) {
    p.A_in.topLeftCorner(mi, n) = e.J_in;
    p.A_in.block(0, n, mi, mi) = -Mat::Identity(mi, mi);
    p.b_in.head(mi) = -e.c_in;
  }
  Eigen::Index r = mi;
  for (auto j : lo_idx) {
    p.A_in(r, j) = -1.0;
    p.b_in(r++) = z(j) - lb(j);
  }
  for (auto j : up_idx) {
    p.A_in(r, j) = 1.0;
    p.b_in(r++) = ub(j) - z(j);
  }
  for (Eigen::Index k = 0; k < ns; ++k) p.A_in(r++, n + k) = -1.0;
  const auto s = qp::solve_qp(p);
  if (s.status != qp::QpStatus::Optimal) return out;
  out.ok = true;
  out.elastic = true;
  out.d = s.x.head(n);
  out.mu = s.mu.head(mi);
  out.nu = s.nu;
  out.linear_l1 = s.x.tail(ns).cwiseMax(0.0).sum();
  return out;
}

}  // namespace

SqpResult solve_sqp(const NlpModel& model, const Vec& z0, const SqpOptions& opts) {
  const auto n = model.num_vars();
  const Vec& lb = model.lower();
  const Vec& ub = model.upper();
  Vec z = z0.cwiseMax(lb).cwiseMin(ub);

  NlpEval e;
  model.evaluate(z, e, true);
  Vec mu = Vec::Zero(e.c_in.size());
  Vec nu = Vec::Zero(e.c_eq.size());
  Mat B = make_positive(model.hessian_estimate(z, mu, nu), opts.min_curvature);
  double penalty = 1.0;

  SqpResult best;
  bool have_best = false;
  auto consider = [&](const Vec& zc, const NlpEval& ec, double kkt, int it) {
    const double v = violation(ec);
    bool better = !have_best;
    if (have_best) {
      const bool feas_c = v <= opts.kkt_tol;
      const bool feas_b = best.violation <= opts.kkt_tol;
      if (feas_c != feas_b) {
        better = feas_c;
      } else if (feas_c) {
        better = ec.f < best.f;
      } else {
        better = v < best.violation;
      }
    }
    if (better) {
      have_best = true;
      best.z = zc;
      best.f = ec.f;
      best.violation = v;
      best.kkt = kkt;
      best.mu_in = mu;
      best.nu_eq = nu;
      best.iterations = it;
    }
  };

  SqpResult res;
  int failures = 0;
  int iters = 0;
  for (int it = 0;; ++it) {
    iters = it;
    // KKT residual at z with the current multiplier estimates.
    const Vec gl = lagrangian_gradient(e, mu, nu);
    double stat = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double r = gl(j);
      if (r > 0.0 && z(j) - lb(j) <= kBoundTol * (1.0 + std::abs(lb(j)))) r = 0.0;
      if (r < 0.0 && ub(j) - z(j) <= kBoundTol * (1.0 + std::abs(ub(j)))) r = 0.0;
      stat = std::max(stat, std::abs(r));
    }
    double comp = 0.0;
    for (Eigen::Index i = 0; i < e.c_in.size(); ++i) comp = std::max(comp, std::abs(mu(i) * e.c_in(i)));
    const double mult_count = static_cast<double>(mu.size() + nu.size());
    const double s_d = mult_count > 0 ? std::max(100.0, (mu.lpNorm<1>() + nu.lpNorm<1>()) / mult_count) / 100.0 : 1.0;
    const double viol = violation(e);
    const double kkt = std::max({stat / s_d, comp / s_d, viol});
    consider(z, e, kkt, it);
    if (it > 0 && kkt <= opts.kkt_tol) {
      res.status = SqpStatus::Converged;
      res.z = z;
      res.f = e.f;
      res.mu_in = mu;
      res.nu_eq = nu;
      res.kkt = kkt;
      res.violation = viol;
      res.iterations = it;
      return res;
    }
    if (it >= opts.max_iter) break;

    Subproblem sp = solve_subproblem(B, e, z, lb, ub, opts, false);
    if (!sp.ok) {
      B = make_positive(model.hessian_estimate(z, mu, nu), opts.min_curvature);
      sp = solve_subproblem(B, e, z, lb, ub, opts, true);
      if (!sp.ok) {
        res.status = SqpStatus::Failed;
        break;
      }
    }
    if (sp.elastic) ++res.elastic_steps;

    double max_mult = 0.0;
    if (sp.mu.size()) max_mult = std::max(max_mult, sp.mu.cwiseAbs().maxCoeff());
    if (sp.nu.size()) max_mult = std::max(max_mult, sp.nu.cwiseAbs().maxCoeff());
    if (penalty < 1.1 * max_mult) penalty = std::max(1.5 * max_mult, 2.0 * penalty);

    const double v0 = l1_violation(e);
    const double phi0 = e.f + penalty * v0;
    const double dphi = e.grad.dot(sp.d) - penalty * (v0 - sp.linear_l1);

    NlpEval trial;
    Vec zt;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      zt = (z + alpha * sp.d).cwiseMax(lb).cwiseMin(ub);
      model.evaluate(zt, trial, false);
      const double phi = trial.f + penalty * l1_violation(trial);
      if (phi <= phi0 + 1e-4 * alpha * std::min(dphi, 0.0) || (sp.d.lpNorm<Eigen::Infinity>() * alpha < 1e-14)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      ++failures;
      B = make_positive(model.hessian_estimate(z, sp.mu, sp.nu), opts.min_curvature);
      mu = sp.mu;
      nu = sp.nu;
      if (failures >= 3) {
        res.status = SqpStatus::Failed;
        break;
      }
      continue;
    }
    failures = 0;

    NlpEval next;
    model.evaluate(zt, next, true);
    if (opts.hessian == HessianMode::Structured) {
      B = make_positive(model.hessian_estimate(zt, sp.mu, sp.nu), opts.min_curvature);
    } else {
      const Vec s = zt - z;
      Vec y = lagrangian_gradient(next, sp.mu, sp.nu) - lagrangian_gradient(e, sp.mu, sp.nu);
      const Vec Bs = B * s;
      const double sBs = s.dot(Bs);
      if (sBs > 1e-16) {
        double sy = s.dot(y);
        if (sy < 0.2 * sBs) {
          const double theta = 0.8 * sBs / (sBs - sy);
          y = theta * y + (1.0 - theta) * Bs;
          sy = s.dot(y);
        }
        B += y * y.transpose() / sy - Bs * Bs.transpose() / sBs;
      }
    }
    z = zt;
    e = std::move(next);
    mu = sp.mu;
    nu = sp.nu;
  }

  if (res.status != SqpStatus::Failed) res.status = SqpStatus::MaxIterations;
  res.z = best.z;
  res.f = best.f;
  res.mu_in = best.mu_in;
  res.nu_eq = best.nu_eq;
  res.kkt = best.kkt;
  res.violation = best.violation;
  res.iterations = iters;
  return res;
}

}  // namespace reachplan::nlp
