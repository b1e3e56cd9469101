#include "reachplan/linprog.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "reachplan/error.hpp"

namespace reachplan::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kPhaseOneTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Compact dictionary for  max ζ  s.t.  x_B = D(:,0) - D(:,1:) x_N,  x ≥ 0.
// Variable ids: [0, n) structural, [n, n+m) row slacks, n+m auxiliary.
class Dictionary {
 public:
  Dictionary(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
      : D_(A.rows(), A.cols() + 1), cobj_(Eigen::VectorXd::Zero(A.cols())) {
    const auto m = A.rows();
    const auto n = A.cols();
    D_.col(0) = b;
    D_.rightCols(n) = A;
    basic_.resize(static_cast<std::size_t>(m));
    nonbasic_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < m; ++i) basic_[static_cast<std::size_t>(i)] = static_cast<int>(n + i);
    for (Eigen::Index j = 0; j < n; ++j) nonbasic_[static_cast<std::size_t>(j)] = static_cast<int>(j);
  }

  Eigen::Index rows() const { return D_.rows(); }
  Eigen::Index cols() const { return D_.cols() - 1; }

  void pivot(Eigen::Index l, Eigen::Index e) {
    const double a = D_(l, 1 + e);
    // Solve row l for the entering variable.
    D_.row(l) /= a;
    D_(l, 1 + e) = 1.0 / a;
    for (Eigen::Index i = 0; i < D_.rows(); ++i) {
      if (i == l) continue;
      const double f = D_(i, 1 + e);
      if (f == 0.0) continue;
      D_.row(i) -= f * D_.row(l);
      D_(i, 1 + e) = -f / a;
    }
    const double ce = cobj_(e);
    if (ce != 0.0) {
      obj0_ += ce * D_(l, 0);
      cobj_ -= ce * D_.row(l).tail(cols()).transpose();
      cobj_(e) = -ce / a;
    }
    std::swap(basic_[static_cast<std::size_t>(l)], nonbasic_[static_cast<std::size_t>(e)]);
  }

  // Bland's rule. Returns 0 optimal, 1 unbounded.
  int run(int& iterations) {
    for (;;) {
      Eigen::Index e = -1;
      int best_id = std::numeric_limits<int>::max();
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (cobj_(j) > kPivotTol && nonbasic_[static_cast<std::size_t>(j)] < best_id) {
          best_id = nonbasic_[static_cast<std::size_t>(j)];
          e = j;
        }
      }
      if (e < 0) return 0;
      Eigen::Index l = -1;
      double best_ratio = kInf;
      int best_basic = std::numeric_limits<int>::max();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = D_(i, 1 + e);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(D_(i, 0), 0.0) / a;
        const int id = basic_[static_cast<std::size_t>(i)];
        if (ratio < best_ratio - 1e-12 || (std::abs(ratio - best_ratio) <= 1e-12 && id < best_basic)) {
          best_ratio = ratio;
          best_basic = id;
          l = i;
        }
      }
      if (l < 0) return 1;
      pivot(l, e);
      ++iterations;
    }
  }

  Eigen::MatrixXd& table() { return D_; }
  Eigen::VectorXd& cobj() { return cobj_; }
  double& obj0() { return obj0_; }
  std::vector<int>& basic() { return basic_; }
  std::vector<int>& nonbasic() { return nonbasic_; }

  void append_column(double coeff, int id) {
    D_.conservativeResize(Eigen::NoChange, D_.cols() + 1);
    D_.col(D_.cols() - 1).setConstant(coeff);
    cobj_.conservativeResize(cobj_.size() + 1);
    cobj_(cobj_.size() - 1) = 0.0;
    nonbasic_.push_back(id);
  }

  void remove_column(Eigen::Index j) {
    const Eigen::Index last = cols() - 1;
    if (j != last) {
      D_.col(1 + j) = D_.col(1 + last);
      cobj_(j) = cobj_(last);
      nonbasic_[static_cast<std::size_t>(j)] = nonbasic_[static_cast<std::size_t>(last)];
    }
    D_.conservativeResize(Eigen::NoChange, D_.cols() - 1);
    cobj_.conservativeResize(cobj_.size() - 1);
    nonbasic_.pop_back();
  }

 private:
  Eigen::MatrixXd D_;
  Eigen::VectorXd cobj_;
  double obj0_ = 0.0;
  std::vector<int> basic_;
  std::vector<int> nonbasic_;
};

// x = offset + Σ sign_k z_k over the columns k mapped to variable j.
struct VariableMap {
  Eigen::VectorXd offset;
  std::vector<int> var;    // column -> original variable
  std::vector<double> sign;
};

void check_dims(const LpProblem& p, Eigen::Index n) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::DimensionMismatch, "solve_lp: " + what); };
  if (p.A_ub.rows() > 0 && p.A_ub.cols() != n) fail("A_ub column count");
  if (p.A_ub.rows() != p.b_ub.size()) fail("A_ub rows vs b_ub");
  if (p.A_eq.rows() > 0 && p.A_eq.cols() != n) fail("A_eq column count");
  if (p.A_eq.rows() != p.b_eq.size()) fail("A_eq rows vs b_eq");
  if (p.lb.size() != 0 && p.lb.size() != n) fail("lb size");
  if (p.ub.size() != 0 && p.ub.size() != n) fail("ub size");
}

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  const Eigen::Index n = p.num_vars();
  check_dims(p, n);
  const Eigen::VectorXd lb = p.lb.size() ? p.lb : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd ub = p.ub.size() ? p.ub : Eigen::VectorXd::Constant(n, kInf);

  LpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  sol.dual_ub = Eigen::VectorXd::Zero(p.A_ub.rows());
  sol.dual_eq = Eigen::VectorXd::Zero(p.A_eq.rows());
  sol.reduced_costs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lb(j) > ub(j)) {
      sol.status = Status::Infeasible;
      return sol;
    }
  }

  // Shift / reflect / split variables into z ≥ 0.
  VariableMap map;
  map.offset = Eigen::VectorXd::Zero(n);
  std::vector<std::pair<int, double>> upper_rows;  // (column, bound on z)
  for (Eigen::Index j = 0; j < n; ++j) {
    const int jj = static_cast<int>(j);
    const bool has_lb = std::isfinite(lb(j));
    const bool has_ub = std::isfinite(ub(j));
    if (has_lb) {
      map.offset(j) = lb(j);
      map.var.push_back(jj);
      map.sign.push_back(1.0);
      if (has_ub) upper_rows.emplace_back(static_cast<int>(map.var.size()) - 1, ub(j) - lb(j));
    } else if (has_ub) {
      map.offset(j) = ub(j);
      map.var.push_back(jj);
      map.sign.push_back(-1.0);
    } else {
      map.var.push_back(jj);
      map.sign.push_back(1.0);
      map.var.push_back(jj);
      map.sign.push_back(-1.0);
    }
  }
  const auto nz = static_cast<Eigen::Index>(map.var.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, nz);
  for (Eigen::Index k = 0; k < nz; ++k) T(map.var[static_cast<std::size_t>(k)], k) = map.sign[static_cast<std::size_t>(k)];

  const Eigen::Index m_ub = p.A_ub.rows();
  const Eigen::Index m_eq = p.A_eq.rows();
  const auto m_bd = static_cast<Eigen::Index>(upper_rows.size());
  const Eigen::Index m = m_ub + 2 * m_eq + m_bd;
  Eigen::MatrixXd A(m, nz);
  Eigen::VectorXd b(m);
  if (m_ub > 0) {
    A.topRows(m_ub) = p.A_ub * T;
    b.head(m_ub) = p.b_ub - p.A_ub * map.offset;
  }
  if (m_eq > 0) {
    const Eigen::MatrixXd AeT = p.A_eq * T;
    const Eigen::VectorXd be = p.b_eq - p.A_eq * map.offset;
    A.middleRows(m_ub, m_eq) = AeT;
    b.segment(m_ub, m_eq) = be;
    A.middleRows(m_ub + m_eq, m_eq) = -AeT;
    b.segment(m_ub + m_eq, m_eq) = -be;
  }
  for (Eigen::Index r = 0; r < m_bd; ++r) {
    A.row(m_ub + 2 * m_eq + r).setZero();
    A(m_ub + 2 * m_eq + r, upper_rows[static_cast<std::size_t>(r)].first) = 1.0;
    b(m_ub + 2 * m_eq + r) = upper_rows[static_cast<std::size_t>(r)].second;
  }
  const Eigen::VectorXd chat = T.transpose() * p.c;

  Dictionary dict(A, b);
  int iterations = 0;

  // Phase 1 with a single auxiliary column.
  Eigen::Index worst = -1;
  if (m > 0) {
    Eigen::Index arg;
    const double bmin = b.minCoeff(&arg);
    if (bmin < -kPhaseOneTol) worst = arg;
  }
  if (worst >= 0) {
    const int aux_id = static_cast<int>(nz + m);
    dict.append_column(-1.0, aux_id);
    const Eigen::Index aux_col = dict.cols() - 1;
    dict.cobj().setZero();
    dict.cobj()(aux_col) = -1.0;
    dict.obj0() = 0.0;
    dict.pivot(worst, aux_col);
    ++iterations;
    dict.run(iterations);
    if (dict.obj0() < -kPhaseOneTol * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      sol.status = Status::Infeasible;
      sol.iterations = iterations;
      return sol;
    }
    // Drive the auxiliary variable out of the basis if it is still there.
    for (Eigen::Index i = 0; i < dict.rows(); ++i) {
      if (dict.basic()[static_cast<std::size_t>(i)] != aux_id) continue;
      Eigen::Index e = -1;
      double best = 0.0;
      for (Eigen::Index j = 0; j < dict.cols(); ++j) {
        const double a = std::abs(dict.table()(i, 1 + j));
        if (a > best) {
          best = a;
          e = j;
        }
      }
      if (e >= 0) dict.pivot(i, e);
      break;
    }
    for (Eigen::Index j = 0; j < dict.cols(); ++j) {
      if (dict.nonbasic()[static_cast<std::size_t>(j)] == aux_id) {
        dict.remove_column(j);
        break;
      }
    }
  }

  // Phase 2 objective: maximize -ĉᵀz expressed in the current nonbasis.
  {
    auto& D = dict.table();
    dict.obj0() = 0.0;
    dict.cobj().setZero();
    for (Eigen::Index j = 0; j < dict.cols(); ++j) {
      const int id = dict.nonbasic()[static_cast<std::size_t>(j)];
      if (id < nz) dict.cobj()(j) = -chat(id);
    }
    for (Eigen::Index i = 0; i < dict.rows(); ++i) {
      const int id = dict.basic()[static_cast<std::size_t>(i)];
      if (id >= nz) continue;
      const double w = -chat(id);
      if (w == 0.0) continue;
      dict.obj0() += w * D(i, 0);
      dict.cobj() -= w * D.row(i).tail(dict.cols()).transpose();
    }
  }
  const int rc = dict.run(iterations);
  sol.iterations = iterations;
  if (rc == 1) {
    sol.status = Status::Unbounded;
    return sol;
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(nz);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < dict.rows(); ++i) {
    const int id = dict.basic()[static_cast<std::size_t>(i)];
    if (id < nz) z(id) = std::max(dict.table()(i, 0), 0.0);
  }
  for (Eigen::Index j = 0; j < dict.cols(); ++j) {
    const int id = dict.nonbasic()[static_cast<std::size_t>(j)];
    if (id >= nz && id < nz + m) y(id - nz) = std::max(-dict.cobj()(j), 0.0);
  }

  sol.status = Status::Optimal;
  sol.x = map.offset + T * z;
  sol.objective = p.c.dot(sol.x);
  if (m_ub > 0) sol.dual_ub = y.head(m_ub);
  if (m_eq > 0) sol.dual_eq = y.segment(m_ub, m_eq) - y.segment(m_ub + m_eq, m_eq);
  sol.reduced_costs = p.c;
  if (m_ub > 0) sol.reduced_costs += p.A_ub.transpose() * sol.dual_ub;
  if (m_eq > 0) sol.reduced_costs += p.A_eq.transpose() * sol.dual_eq;
  return sol;
}

}  // namespace reachplan::lp
