#include "reachplan/planner.hpp"

#include <cmath>
#include <limits>

#include "reachplan/error.hpp"

namespace reachplan::planner {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Proposed: return "proposed";
    case Mode::Rmpc: return "rmpc";
    case Mode::Dmpc: return "dmpc";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& s) {
  if (s == "proposed") return Mode::Proposed;
  if (s == "rmpc") return Mode::Rmpc;
  if (s == "dmpc") return Mode::Dmpc;
  throw Error(ErrorCode::Config, "unknown mode '" + s + "' (expected proposed, rmpc or dmpc)");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Failed: return "failed";
  }
  return "unknown";
}

void PlannerConfig::validate() const {
  ego.validate();
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "PlannerConfig: N must be at least 1");
  if (Q1 < 0 || Q2 < 0 || Q4 < 0 || (Q3.array() < 0).any()) {
    throw Error(ErrorCode::InvalidArgument, "PlannerConfig: weights must be nonnegative");
  }
  if (D.rows() > 0 && D.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "PlannerConfig: D must be planar");
  if (!(kkt_tol > 0) || max_iter < 1) throw Error(ErrorCode::InvalidArgument, "PlannerConfig: bad solver settings");
}

double compute_d_min(double ego_length, double ego_width, double obs_length, double obs_width) {
  if (ego_length < 0 || ego_width < 0 || obs_length < 0 || obs_width < 0) {
    throw Error(ErrorCode::InvalidArgument, "compute_d_min: negative dimension");
  }
  return std::hypot(ego_length / 2, ego_width / 2) + std::hypot(obs_length / 2, obs_width / 2);
}

namespace {

constexpr double kLambdaMax = 100.0;
constexpr double kLambdaProx = 1e-6;

using vehicle::InputJac;
using vehicle::InputVec;
using vehicle::StateJac;
using vehicle::StateVec;

// Nonnegative λ minimizing ‖Hᵀλ − e‖, over supports of one or two rows, then
// rescaled so that ‖Hᵀλ‖ = 1.
Vec initial_dual(const Mat& H, const Eigen::Vector2d& e) {
  const auto nh = H.rows();
  Vec best = Vec::Zero(nh);
  double best_res = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < nh; ++j) {
    const Eigen::Vector2d a = H.row(j).transpose();
    const double t = std::max(0.0, a.dot(e) / std::max(a.squaredNorm(), 1e-300));
    const double res = (t * a - e).norm();
    if (res < best_res - 1e-12) {
      best_res = res;
      best.setZero();
      best(j) = t;
    }
  }
  for (Eigen::Index j = 0; j < nh; ++j) {
    for (Eigen::Index k = j + 1; k < nh; ++k) {
      Eigen::Matrix2d M;
      M.col(0) = H.row(j).transpose();
      M.col(1) = H.row(k).transpose();
      if (std::abs(M.determinant()) < 1e-9) continue;
      const Eigen::Vector2d t = M.partialPivLu().solve(e);
      if ((t.array() < 0).any()) continue;
      if (best_res > 1e-12) {
        best_res = 0.0;
        best.setZero();
        best(j) = t(0);
        best(k) = t(1);
      }
    }
  }
  const double norm = (H.transpose() * best).norm();
  if (norm < 1e-9) {
    Eigen::Index j = 0;
    (H * e).maxCoeff(&j);
    best.setZero();
    best(j) = 1.0 / H.row(j).norm();
    return best;
  }
  return (best / norm).cwiseMin(kLambdaMax);
}

Eigen::Vector2d polygon_center(const HPolytope& P) {
  try {
    const auto V = geometry::vertices_2d(P);
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& v : V.vertices) c += v.head<2>();
    return c / static_cast<double>(V.size());
  } catch (const Error&) {
    return Eigen::Vector2d::Zero();
  }
}

struct Block {
  Eigen::Index lambda = 0;  // offset of λ
  Eigen::Index nh = 0;
  Eigen::Index eps = 0;     // index of ε
  const HPolytope* P = nullptr;
  double d_min = 0.0;
  int step = 0;             // 1..N
};

class OcpModel : public nlp::NlpModel {
 public:
  OcpModel(const EgoState& x0, const std::vector<ObstacleOccupancy>& occ, const PlannerConfig& cfg)
      : x0_(x0.vec()), cfg_(cfg), N_(cfg.N) {
    const bool jerk = cfg.ego.kind == vehicle::EgoModelKind::Jerk;
    Eigen::Index n = 2 * N_;
    for (const auto& o : occ) {
      if (static_cast<int>(o.steps.size()) < N_) {
        throw Error(ErrorCode::InvalidArgument, "build_and_solve: occupancy shorter than horizon");
      }
      for (int i = 1; i <= N_; ++i) {
        const HPolytope& P = o.steps[static_cast<std::size_t>(i - 1)];
        if (P.dim() != 2 || P.rows() < 3) throw Error(ErrorCode::InvalidArgument, "build_and_solve: occupancy must be a planar polygon");
        Block b;
        b.lambda = n;
        b.nh = P.rows();
        b.eps = n + b.nh;
        b.P = &P;
        b.d_min = o.d_min;
        b.step = i;
        blocks_.push_back(b);
        n += b.nh + 1;
      }
    }
    n_ = n;
    lb_ = Vec::Constant(n, -std::numeric_limits<double>::infinity());
    ub_ = Vec::Constant(n, std::numeric_limits<double>::infinity());
    for (int i = 0; i < N_; ++i) {
      lb_(2 * i) = cfg.ego.delta_min;
      ub_(2 * i) = cfg.ego.delta_max;
      if (!jerk) {
        lb_(2 * i + 1) = cfg.ego.a_min;
        ub_(2 * i + 1) = cfg.ego.a_max;
      }
    }
    for (const auto& b : blocks_) {
      lb_.segment(b.lambda, b.nh).setZero();
      ub_.segment(b.lambda, b.nh).setConstant(kLambdaMax);
      lb_(b.eps) = 0.0;
      ub_(b.eps) = b.d_min;
    }
    state_rows_ = jerk ? 4 : 2;
    n_in_ = N_ * (state_rows_ + cfg.D.rows()) + static_cast<Eigen::Index>(blocks_.size());
    n_eq_ = static_cast<Eigen::Index>(blocks_.size());
  }

  Eigen::Index num_vars() const override { return n_; }
  const Vec& lower() const override { return lb_; }
  const Vec& upper() const override { return ub_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  // States along the horizon and, optionally, sensitivities S_i = ∂x_i/∂U.
  void rollout(const Vec& z, std::vector<StateVec>& xs, std::vector<Mat>* S) const {
    xs.assign(static_cast<std::size_t>(N_ + 1), StateVec::Zero());
    xs[0] = x0_;
    if (S) S->assign(static_cast<std::size_t>(N_ + 1), Mat::Zero(5, 2 * N_));
    StateJac A;
    InputJac B;
    for (int i = 0; i < N_; ++i) {
      const InputVec u = z.segment<2>(2 * i);
      const auto k = static_cast<std::size_t>(i);
      if (S) {
        xs[k + 1] = vehicle::ego_step_rk4(xs[k], u, cfg_.ego, &A, &B);
        (*S)[k + 1].leftCols(2 * i) = A * (*S)[k].leftCols(2 * i);
        (*S)[k + 1].middleCols(2 * i, 2) = B;
      } else {
        xs[k + 1] = vehicle::ego_step_rk4(xs[k], u, cfg_.ego);
      }
    }
  }

  Eigen::Vector4d terminal_error(const StateVec& x) const {
    return {x(3) - cfg_.ref.v, x(0) - cfg_.ref.x, x(1) - cfg_.ref.y, x(2) - cfg_.ref.phi};
  }

  void evaluate(const Vec& z, nlp::NlpEval& out, bool derivatives) const override {
    std::vector<StateVec> xs;
    std::vector<Mat> S;
    rollout(z, xs, derivatives ? &S : nullptr);
    const auto nu_cols = 2 * N_;

    // Objective.
    double f = 0.0;
    for (int i = 0; i < N_; ++i) f += cfg_.Q1 * z(2 * i) * z(2 * i) + cfg_.Q2 * z(2 * i + 1) * z(2 * i + 1);
    const Eigen::Vector4d E = terminal_error(xs.back());
    f += E.dot(cfg_.Q3.cwiseProduct(E));
    for (const auto& b : blocks_) f += cfg_.Q4 * z(b.eps) * z(b.eps);
    out.f = f;

    out.c_in.resize(n_in_);
    out.c_eq.resize(n_eq_);
    if (derivatives) {
      out.grad = Vec::Zero(n_);
      for (int i = 0; i < N_; ++i) {
        out.grad(2 * i) = 2 * cfg_.Q1 * z(2 * i);
        out.grad(2 * i + 1) = 2 * cfg_.Q2 * z(2 * i + 1);
      }
      const Mat SE = terminal_sensitivity(S.back());
      out.grad.head(nu_cols) += 2.0 * SE.transpose() * cfg_.Q3.cwiseProduct(E);
      for (const auto& b : blocks_) out.grad(b.eps) = 2 * cfg_.Q4 * z(b.eps);
      out.J_in = Mat::Zero(n_in_, n_);
      out.J_eq = Mat::Zero(n_eq_, n_);
    }

    Eigen::Index r = 0;
    const auto& p = cfg_.ego;
    for (int i = 1; i <= N_; ++i) {
      const auto& x = xs[static_cast<std::size_t>(i)];
      out.c_in(r) = x(3) - p.v_max;
      out.c_in(r + 1) = p.v_min - x(3);
      if (derivatives) {
        out.J_in.block(r, 0, 1, nu_cols) = S[static_cast<std::size_t>(i)].row(3);
        out.J_in.block(r + 1, 0, 1, nu_cols) = -S[static_cast<std::size_t>(i)].row(3);
      }
      if (state_rows_ == 4) {
        out.c_in(r + 2) = x(4) - p.a_max;
        out.c_in(r + 3) = p.a_min - x(4);
        if (derivatives) {
          out.J_in.block(r + 2, 0, 1, nu_cols) = S[static_cast<std::size_t>(i)].row(4);
          out.J_in.block(r + 3, 0, 1, nu_cols) = -S[static_cast<std::size_t>(i)].row(4);
        }
      }
      r += state_rows_;
      const auto nd = cfg_.D.rows();
      if (nd) {
        out.c_in.segment(r, nd) = cfg_.D.H * x.head<2>() - cfg_.D.b;
        if (derivatives) out.J_in.block(r, 0, nd, nu_cols) = cfg_.D.H * S[static_cast<std::size_t>(i)].topRows(2);
        r += nd;
      }
    }
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto& b = blocks_[k];
      const auto& x = xs[static_cast<std::size_t>(b.step)];
      const Vec lam = z.segment(b.lambda, b.nh);
      const Vec gap = b.P->H * x.head<2>() - b.P->b;
      out.c_in(r) = b.d_min - z(b.eps) - gap.dot(lam);
      const Eigen::Vector2d w = b.P->H.transpose() * lam;
      out.c_eq(static_cast<Eigen::Index>(k)) = w.squaredNorm() - 1.0;
      if (derivatives) {
        out.J_in.block(r, 0, 1, nu_cols) = -w.transpose() * S[static_cast<std::size_t>(b.step)].topRows(2);
        out.J_in.block(r, b.lambda, 1, b.nh) = -gap.transpose();
        out.J_in(r, b.eps) = -1.0;
        out.J_eq.block(static_cast<Eigen::Index>(k), b.lambda, 1, b.nh) = 2.0 * (b.P->H * w).transpose();
      }
      ++r;
    }
  }

  Mat hessian_estimate(const Vec& z, const Vec& mu_in, const Vec& nu_eq) const override {
    std::vector<StateVec> xs;
    std::vector<Mat> S;
    rollout(z, xs, &S);
    const auto nu_cols = 2 * N_;
    Mat Hs = Mat::Zero(n_, n_);
    for (int i = 0; i < N_; ++i) {
      Hs(2 * i, 2 * i) = 2 * cfg_.Q1;
      Hs(2 * i + 1, 2 * i + 1) = 2 * cfg_.Q2;
    }
    if (mu_in.size()) {
      // Input block of the Lagrangian Hessian by central differences of its gradient.
      Mat Huu(nu_cols, nu_cols);
      Vec zp = z;
      for (Eigen::Index j = 0; j < nu_cols; ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(z(j)));
        zp(j) = z(j) + h;
        const Vec gp = input_lagrangian_gradient(zp, mu_in);
        zp(j) = z(j) - h;
        const Vec gm = input_lagrangian_gradient(zp, mu_in);
        zp(j) = z(j);
        Huu.col(j) = (gp - gm) / (2 * h);
      }
      Hs.topLeftCorner(nu_cols, nu_cols) = 0.5 * (Huu + Huu.transpose());
    } else {
      const Mat SE = terminal_sensitivity(S.back());
      Hs.topLeftCorner(nu_cols, nu_cols) += 2.0 * SE.transpose() * cfg_.Q3.asDiagonal() * SE;
    }
    const Eigen::Index coll0 = n_in_ - static_cast<Eigen::Index>(blocks_.size());
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto& b = blocks_[k];
      Hs(b.eps, b.eps) = 2 * cfg_.Q4;
      const double nu = nu_eq.size() ? nu_eq(static_cast<Eigen::Index>(k)) : 0.0;
      const double mu = mu_in.size() ? mu_in(coll0 + static_cast<Eigen::Index>(k)) : 0.0;
      Hs.block(b.lambda, b.lambda, b.nh, b.nh) += 2.0 * nu * b.P->H * b.P->H.transpose();
      Hs.block(b.lambda, b.lambda, b.nh, b.nh).diagonal().array() += kLambdaProx;
      if (mu != 0.0) {
        const Mat cross = -mu * S[static_cast<std::size_t>(b.step)].topRows(2).transpose() * b.P->H.transpose();
        Hs.block(0, b.lambda, nu_cols, b.nh) += cross;
        Hs.block(b.lambda, 0, b.nh, nu_cols) += cross.transpose();
      }
    }
    return Hs;
  }

  Vec initial_guess(const std::vector<EgoInput>& inputs) const {
    Vec z = Vec::Zero(n_);
    for (int i = 0; i < N_ && i < static_cast<int>(inputs.size()); ++i) {
      z(2 * i) = inputs[static_cast<std::size_t>(i)].delta;
      z(2 * i + 1) = inputs[static_cast<std::size_t>(i)].eta;
    }
    z = z.cwiseMax(lb_).cwiseMin(ub_);
    std::vector<StateVec> xs;
    rollout(z, xs, nullptr);
    for (const auto& b : blocks_) {
      const Eigen::Vector2d pos = xs[static_cast<std::size_t>(b.step)].head<2>();
      Eigen::Vector2d e = pos - polygon_center(*b.P);
      if (e.norm() < 1e-9) e = Eigen::Vector2d(1, 0);
      z.segment(b.lambda, b.nh) = initial_dual(b.P->H, e.normalized());
      z(b.eps) = b.d_min / 2;
    }
    return z;
  }

 private:
  Vec input_lagrangian_gradient(const Vec& z, const Vec& mu_in) const {
    nlp::NlpEval e;
    evaluate(z, e, true);
    return (e.grad + e.J_in.transpose() * mu_in).head(2 * N_);
  }

  Mat terminal_sensitivity(const Mat& SN) const {
    Mat SE(4, SN.cols());
    SE.row(0) = SN.row(3);
    SE.row(1) = SN.row(0);
    SE.row(2) = SN.row(1);
    SE.row(3) = SN.row(2);
    return SE;
  }

  StateVec x0_;
  const PlannerConfig& cfg_;
  int N_;
  Eigen::Index n_ = 0;
  Eigen::Index n_in_ = 0;
  Eigen::Index n_eq_ = 0;
  Eigen::Index state_rows_ = 4;
  Vec lb_;
  Vec ub_;
  std::vector<Block> blocks_;
};

}  // namespace

PlanResult build_and_solve(const EgoState& x0, const std::vector<ObstacleOccupancy>& occ, const PlannerConfig& cfg,
                           const WarmStart* warm) {
  cfg.validate();
  if (!x0.vec().allFinite()) throw Error(ErrorCode::InvalidArgument, "build_and_solve: non-finite initial state");
  for (const auto& o : occ) {
    if (!(o.d_min > 0)) throw Error(ErrorCode::InvalidArgument, "build_and_solve: d_min must be positive");
  }
  OcpModel model(x0, occ, cfg);
  const Vec z0 = model.initial_guess(warm ? warm->inputs : std::vector<EgoInput>{});

  nlp::SqpOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.kkt_tol = cfg.kkt_tol;
  opts.hessian = cfg.hessian;
  const auto sol = nlp::solve_sqp(model, z0, opts);

  PlanResult r;
  switch (sol.status) {
    case nlp::SqpStatus::Converged: r.status = SolveStatus::Converged; break;
    case nlp::SqpStatus::MaxIterations: r.status = SolveStatus::MaxIterations; break;
    case nlp::SqpStatus::Failed: r.status = SolveStatus::Failed; break;
  }
  r.iterations = sol.iterations;
  r.kkt = sol.kkt;
  r.violation = sol.violation;
  r.cost = sol.f;

  std::vector<StateVec> xs;
  model.rollout(sol.z, xs, nullptr);
  for (const auto& x : xs) r.states.push_back(EgoState::from_vec(x));
  for (int i = 0; i < cfg.N; ++i) r.inputs.push_back(EgoInput{sol.z(2 * i), sol.z(2 * i + 1)});
  r.lambdas.assign(occ.size(), {});
  r.slacks.assign(occ.size(), {});
  std::size_t k = 0;
  for (std::size_t s = 0; s < occ.size(); ++s) {
    for (int i = 0; i < cfg.N; ++i, ++k) {
      const auto& b = model.blocks()[k];
      r.lambdas[s].push_back(sol.z.segment(b.lambda, b.nh));
      r.slacks[s].push_back(sol.z(b.eps));
    }
  }
  return r;
}

double plan_cost(const PlanResult& r, const PlannerConfig& cfg) {
  double f = 0.0;
  for (const auto& u : r.inputs) f += cfg.Q1 * u.delta * u.delta + cfg.Q2 * u.eta * u.eta;
  const auto& x = r.states.back();
  const Eigen::Vector4d E(x.v - cfg.ref.v, x.px - cfg.ref.x, x.py - cfg.ref.y, x.phi - cfg.ref.phi);
  f += E.dot(cfg.Q3.cwiseProduct(E));
  for (const auto& per : r.slacks)
    for (double e : per) f += cfg.Q4 * e * e;
  return f;
}

VPolytope prediction_set(const ObstacleTrack& track, Mode mode) {
  switch (mode) {
    case Mode::Proposed:
      if (!track.learned) throw Error(ErrorCode::InvalidArgument, "prediction_set: proposed mode needs a learned set");
      return setlearn::to_vertices(*track.learned);
    case Mode::Rmpc: return geometry::vertices_2d(track.admissible.polytope());
    case Mode::Dmpc: return geometry::point_set(Vec::Zero(track.admissible.dim()));
  }
  return {};
}

Planner::Planner(PlannerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

PlanResult Planner::plan_step(const EgoState& x0, const std::vector<ObstacleTrack>& tracks) {
  const auto model = reach::LtvModel::double_integrator(cfg_.ego.T, cfg_.N);
  std::vector<ObstacleOccupancy> occ;
  tubes_.clear();
  for (const auto& t : tracks) {
    tubes_.push_back(reach::forward_occupancy(model, t.state, prediction_set(t, cfg_.mode), cfg_.N, {false}));
    occ.push_back(ObstacleOccupancy{reach::occupancy_hrep(tubes_.back()), t.d_min});
  }
  WarmStart warm;
  if (prev_) {
    warm.inputs.assign(prev_->inputs.begin() + 1, prev_->inputs.end());
    warm.inputs.push_back(prev_->inputs.back());
  }
  PlanResult r = build_and_solve(x0, occ, cfg_, prev_ ? &warm : nullptr);
  prev_ = r;
  return r;
}

}  // namespace reachplan::planner
