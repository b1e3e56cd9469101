#include "reachplan/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "reachplan/error.hpp"

namespace reachplan::qp {

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::NotPositiveDefinite: return "NotPositiveDefinite";
    case QpStatus::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-14;

// Factorization state of the dual method: J = L⁻ᵀ Q and R upper triangular
// with J[:, :iq]ᵀ N_active = R[:iq, :iq].
struct Work {
  Mat J;
  Mat R;
  int iq = 0;
  double r_norm = 1.0;

  // Rotates d = Jᵀ n so that only its first iq+1 entries are nonzero, then
  // appends it as a new column of R.
  bool add(Vec& d) {
    const auto n = J.rows();
    for (Eigen::Index j = n - 1; j > iq; --j) {
      double cc = d(j - 1);
      double ss = d(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d(j) = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d(j - 1) = -h;
      } else {
        d(j - 1) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double t1 = J(k, j - 1);
        const double t2 = J(k, j);
        J(k, j - 1) = t1 * cc + t2 * ss;
        J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
      }
    }
    ++iq;
    R.col(iq - 1).head(iq) = d.head(iq);
    if (std::abs(d(iq - 1)) <= kEps * r_norm) return false;
    r_norm = std::max(r_norm, std::abs(d(iq - 1)));
    return true;
  }

  // Removes active column qq and restores the triangular form.
  void remove(int qq) {
    const auto n = J.rows();
    for (int j = qq; j < iq - 1; ++j) R.col(j) = R.col(j + 1);
    R.col(iq - 1).setZero();
    --iq;
    for (int j = qq; j < iq; ++j) {
      double cc = R(j, j);
      double ss = R(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (int k = j + 1; k < iq; ++k) {
        const double t1 = R(j, k);
        const double t2 = R(j + 1, k);
        R(j, k) = t1 * cc + t2 * ss;
        R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const double t1 = J(k, j);
        const double t2 = J(k, j + 1);
        J(k, j) = t1 * cc + t2 * ss;
        J(k, j + 1) = xny * (J(k, j) + t1) - t2;
      }
    }
  }

  // Primal direction z and dual direction r for constraint normal np.
  void directions(const Vec& np, Vec& d, Vec& z, Vec& r) const {
    const auto n = J.rows();
    d = J.transpose() * np;
    z = J.rightCols(n - iq) * d.tail(n - iq);
    r = R.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(d.head(iq));
  }
};

double kkt_error(const QpProblem& p, const Vec& x, const Vec& nu, const Vec& mu) {
  Vec r = p.G * x + p.g;
  if (p.A_eq.rows()) r.noalias() += p.A_eq.transpose() * nu;
  if (p.A_in.rows()) r.noalias() += p.A_in.transpose() * mu;
  double e = r.lpNorm<Eigen::Infinity>();
  if (p.A_eq.rows()) e = std::max(e, (p.A_eq * x - p.b_eq).lpNorm<Eigen::Infinity>());
  if (p.A_in.rows()) {
    const Vec s = p.b_in - p.A_in * x;
    e = std::max({e, -s.minCoeff(), -mu.minCoeff(), s.cwiseProduct(mu).cwiseAbs().maxCoeff()});
  }
  return e;
}

// Re-solves the KKT system of the final active set with a rank-revealing
// factorization; the dual method loses accuracy when G is badly conditioned.
void polish(const QpProblem& p, const std::vector<char>& is_active, QpSolution& sol) {
  const auto n = p.G.rows();
  std::vector<Eigen::Index> act;
  for (std::size_t i = 0; i < is_active.size(); ++i) {
    if (is_active[i]) act.push_back(static_cast<Eigen::Index>(i));
  }
  const Eigen::Index me = p.A_eq.rows();
  const Eigen::Index m = me + static_cast<Eigen::Index>(act.size());
  Mat K = Mat::Zero(n + m, n + m);
  Vec rhs(n + m);
  K.topLeftCorner(n, n) = p.G;
  rhs.head(n) = -p.g;
  for (Eigen::Index i = 0; i < me; ++i) {
    K.block(n + i, 0, 1, n) = p.A_eq.row(i);
    rhs(n + i) = p.b_eq(i);
  }
  for (std::size_t k = 0; k < act.size(); ++k) {
    const Eigen::Index r = n + me + static_cast<Eigen::Index>(k);
    K.block(r, 0, 1, n) = p.A_in.row(act[k]);
    rhs(r) = p.b_in(act[k]);
  }
  K.topRightCorner(n, m) = K.bottomLeftCorner(m, n).transpose();
  Vec sol_k = K.completeOrthogonalDecomposition().solve(rhs);
  // One step of iterative refinement.
  sol_k += K.completeOrthogonalDecomposition().solve(rhs - K * sol_k);
  if (!sol_k.allFinite()) return;

  Vec nu = sol_k.segment(n, me);
  Vec mu = Vec::Zero(p.A_in.rows());
  for (std::size_t k = 0; k < act.size(); ++k) mu(act[k]) = sol_k(n + me + static_cast<Eigen::Index>(k));
  const Vec x = sol_k.head(n);
  if (kkt_error(p, x, nu, mu) < kkt_error(p, sol.x, sol.nu, sol.mu)) {
    sol.x = x;
    sol.nu = nu;
    sol.mu = mu;
  }
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, double feas_tol) {
  const auto n = p.G.rows();
  if (p.G.cols() != n || p.g.size() != n) throw Error(ErrorCode::DimensionMismatch, "solve_qp: G/g size");
  const Eigen::Index me = p.A_eq.rows();
  const Eigen::Index mi = p.A_in.rows();
  if ((me > 0 && (p.A_eq.cols() != n || p.b_eq.size() != me)) || (mi > 0 && (p.A_in.cols() != n || p.b_in.size() != mi))) {
    throw Error(ErrorCode::DimensionMismatch, "solve_qp: constraint size");
  }

  QpSolution out;
  out.nu = Vec::Zero(me);
  out.mu = Vec::Zero(mi);

  Eigen::LLT<Mat> llt(p.G);
  if (llt.info() != Eigen::Success) {
    out.status = QpStatus::NotPositiveDefinite;
    return out;
  }
  Work w;
  w.J = llt.matrixU().solve(Mat::Identity(n, n));
  w.R = Mat::Zero(n, n);
  Vec x = -llt.solve(p.g);

  // Active set entries: equality i is stored as -(i+1), inequality i as i.
  std::vector<int> active;
  std::vector<double> u;
  Vec d, z, r;

  for (Eigen::Index i = 0; i < me; ++i) {
    const Vec np = p.A_eq.row(i).transpose();
    w.directions(np, d, z, r);
    double t2 = 0.0;
    const double zn = z.dot(np);
    if (z.squaredNorm() > kEps) t2 = (p.b_eq(i) - np.dot(x)) / zn;
    x += t2 * z;
    for (int k = 0; k < w.iq; ++k) u[static_cast<std::size_t>(k)] -= t2 * r(k);
    if (!w.add(d)) {
      // Dependent equality; consistent only if already satisfied.
      --w.iq;
      w.R.col(w.iq).setZero();
      if (std::abs(p.A_eq.row(i).dot(x) - p.b_eq(i)) > feas_tol * (1.0 + std::abs(p.b_eq(i)))) {
        out.status = QpStatus::Infeasible;
        out.x = x;
        return out;
      }
      continue;
    }
    active.push_back(-static_cast<int>(i) - 1);
    u.push_back(t2);
  }

  std::vector<char> is_active(static_cast<std::size_t>(mi), 0);
  std::vector<char> skip(static_cast<std::size_t>(mi), 0);
  Vec row_norm(mi);
  for (Eigen::Index i = 0; i < mi; ++i) row_norm(i) = std::max(1e-300, p.A_in.row(i).norm());

  const int max_iter = static_cast<int>(50 * (n + mi + me) + 100);
  int iter = 0;
  for (;;) {
    if (++iter > max_iter) {
      out.status = QpStatus::MaxIterations;
      break;
    }
    // Most violated inequality, measured in scaled distance.
    Eigen::Index ip = -1;
    double worst = -feas_tol;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (is_active[static_cast<std::size_t>(i)] || skip[static_cast<std::size_t>(i)]) continue;
      const double s = (p.b_in(i) - p.A_in.row(i).dot(x)) / row_norm(i);
      if (s < worst) {
        worst = s;
        ip = i;
      }
    }
    if (ip < 0) {
      out.status = QpStatus::Optimal;
      break;
    }

    const Vec np = -p.A_in.row(ip).transpose();
    double u_p = 0.0;
    bool infeasible = false;
    for (;;) {
      if (++iter > max_iter) break;
      w.directions(np, d, z, r);
      double t1 = kInf;
      int l = -1;
      for (int k = 0; k < w.iq; ++k) {
        if (active[static_cast<std::size_t>(k)] < 0) continue;
        if (r(k) > 0.0) {
          const double ratio = u[static_cast<std::size_t>(k)] / r(k);
          if (ratio < t1) {
            t1 = ratio;
            l = k;
          }
        }
      }
      double t2 = kInf;
      const double s_p = p.b_in(ip) - p.A_in.row(ip).dot(x);
      if (z.squaredNorm() > kEps) t2 = -s_p / z.dot(np);
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        infeasible = true;
        break;
      }
      if (!std::isfinite(t2)) {
        for (int k = 0; k < w.iq; ++k) u[static_cast<std::size_t>(k)] -= t * r(k);
        u_p += t;
        is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(l)])] = 0;
        active.erase(active.begin() + l);
        u.erase(u.begin() + l);
        w.remove(l);
        continue;
      }
      x += t * z;
      for (int k = 0; k < w.iq; ++k) u[static_cast<std::size_t>(k)] -= t * r(k);
      u_p += t;
      if (t == t2) {
        if (!w.add(d)) {
          // Numerically dependent on the active set; give up on this row.
          --w.iq;
          w.R.col(w.iq).setZero();
          skip[static_cast<std::size_t>(ip)] = 1;
        } else {
          active.push_back(static_cast<int>(ip));
          u.push_back(u_p);
          is_active[static_cast<std::size_t>(ip)] = 1;
        }
        break;
      }
      is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(l)])] = 0;
      active.erase(active.begin() + l);
      u.erase(u.begin() + l);
      w.remove(l);
    }
    if (infeasible) {
      out.status = QpStatus::Infeasible;
      break;
    }
  }

  // Rows skipped as dependent must still be satisfied.
  if (out.status == QpStatus::Optimal) {
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (skip[static_cast<std::size_t>(i)] && (p.b_in(i) - p.A_in.row(i).dot(x)) / row_norm(i) < -10 * feas_tol) {
        out.status = QpStatus::Infeasible;
      }
    }
  }

  out.x = x;
  out.iterations = iter;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const int a = active[k];
    if (a < 0) {
      out.nu(-a - 1) = -u[k];
    } else {
      out.mu(a) = u[k];
    }
  }
  if (out.status == QpStatus::Optimal) polish(p, is_active, out);
  out.objective = 0.5 * out.x.dot(p.G * out.x) + p.g.dot(out.x);
  return out;
}

}  // namespace reachplan::qp
