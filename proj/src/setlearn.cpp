#include "reachplan/setlearn.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "reachplan/error.hpp"
#include "reachplan/linprog.hpp"

namespace reachplan::setlearn {

namespace {

constexpr double kAdmissibleTol = 1e-7;

void check_sample(const Mat& H, const Vec& u) {
  if (u.size() != H.cols()) throw Error(ErrorCode::DimensionMismatch, "sample dimension does not match H");
  if (!u.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite sample");
  if (((H * u).array() > 1.0 + kAdmissibleTol).any()) {
    throw Error(ErrorCode::SampleOutsideAdmissible, "sample violates H u <= 1");
  }
}

// Variables are ordered (y, rho, theta).
struct LpLayout {
  Eigen::Index nu;
  Eigen::Index nv;
  Eigen::Index rho() const { return nu; }
  Eigen::Index theta() const { return nu + 1; }
  Eigen::Index size() const { return nu + 1 + nv; }
};

// Rows shared by the batch and recursive programs:
//   H y + rho·1 ≤ 1,   theta - rho·1 ≤ 0.
lp::LpProblem base_problem(const Mat& H, Eigen::Index extra_rows) {
  const LpLayout L{H.cols(), H.rows()};
  lp::LpProblem p;
  p.c = Vec::Zero(L.size());
  p.c(L.rho()) = 1.0;
  p.c.segment(L.theta(), L.nv).setOnes();
  p.A_ub = Mat::Zero(extra_rows + 2 * L.nv, L.size());
  p.b_ub = Vec::Zero(extra_rows + 2 * L.nv);
  const Eigen::Index r0 = extra_rows;
  p.A_ub.block(r0, 0, L.nv, L.nu) = H;
  p.A_ub.block(r0, L.rho(), L.nv, 1).setOnes();
  p.b_ub.segment(r0, L.nv).setOnes();
  p.A_ub.block(r0 + L.nv, L.theta(), L.nv, L.nv) = Mat::Identity(L.nv, L.nv);
  p.A_ub.block(r0 + L.nv, L.rho(), L.nv, 1).setConstant(-1.0);
  p.lb = Vec::Zero(L.size());
  p.ub = Vec::Ones(L.size());
  p.lb.head(L.nu).setConstant(-std::numeric_limits<double>::infinity());
  p.ub.head(L.nu).setConstant(std::numeric_limits<double>::infinity());
  return p;
}

// -H y - theta ≤ -h  (i.e. h ≤ H y + theta) written at row offset r0.
void add_cover_rows(lp::LpProblem& p, const Mat& H, Eigen::Index r0, const Vec& h) {
  const LpLayout L{H.cols(), H.rows()};
  p.A_ub.block(r0, 0, L.nv, L.nu) = -H;
  p.A_ub.block(r0, L.theta(), L.nv, L.nv) = -Mat::Identity(L.nv, L.nv);
  p.b_ub.segment(r0, L.nv) = -h;
}

LearnedSet unpack(const Mat& H, const lp::LpSolution& sol) {
  if (sol.status != lp::Status::Optimal) {
    // The program is always feasible (theta = rho = 1, y = 0) for admissible samples.
    throw Error(ErrorCode::InvalidArgument, std::string("set learning LP returned ") + lp::to_string(sol.status));
  }
  const LpLayout L{H.cols(), H.rows()};
  LearnedSet s;
  s.H = H;
  s.y = sol.x.head(L.nu);
  s.rho = sol.x(L.rho());
  s.theta = sol.x.segment(L.theta(), L.nv);
  s.objective = sol.objective;
  return s;
}

}  // namespace

bool AdmissibleSet::contains(const Vec& u, double tol) const {
  return u.size() == H.cols() && ((H * u).array() <= 1.0 + tol).all();
}

HPolytope AdmissibleSet::polytope() const { return HPolytope{H, Vec::Ones(H.rows())}; }

AdmissibleSet AdmissibleSet::box(const Vec& half_extent) {
  const auto d = half_extent.size();
  Mat H = Mat::Zero(2 * d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(half_extent(k) > 0.0)) throw Error(ErrorCode::InvalidArgument, "box half extent must be positive");
    H(2 * k, k) = 1.0 / half_extent(k);
    H(2 * k + 1, k) = -1.0 / half_extent(k);
  }
  return AdmissibleSet{H};
}

AdmissibleSet AdmissibleSet::regular_polygon(int sides, double inradius, double rotation) {
  if (sides < 3 || !(inradius > 0.0)) throw Error(ErrorCode::InvalidArgument, "regular_polygon: need >= 3 sides and positive inradius");
  Mat H(sides, 2);
  for (int k = 0; k < sides; ++k) {
    const double ang = rotation + 2.0 * std::numbers::pi * k / sides;
    H(k, 0) = std::cos(ang) / inradius;
    H(k, 1) = std::sin(ang) / inradius;
  }
  return AdmissibleSet{H};
}

AdmissibleSet AdmissibleSet::from_matrix(Mat H) {
  if (H.rows() == 0 || H.cols() == 0 || !H.allFinite()) throw Error(ErrorCode::InvalidArgument, "admissible set: bad H");
  AdmissibleSet U{std::move(H)};
  if (U.dim() == 2) {
    try {
      (void)geometry::vertices_2d(U.polytope());
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("admissible set: ") + e.what());
    }
  }
  return U;
}

void InfoSet::push(const Vec& u) {
  if (!u.allFinite()) throw Error(ErrorCode::InvalidArgument, "InfoSet: non-finite sample");
  samples_.push_back(u);
  if (capacity_ && samples_.size() > *capacity_) samples_.pop_front();
}

std::optional<Vec> LearnedSet::center_parameter() const {
  if (rho >= 1.0) return std::nullopt;
  return Vec(y / (1.0 - rho));
}

LearnedSet batch_learn(const AdmissibleSet& U, std::span<const Vec> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInfoSet, "batch_learn: no samples");
  const Mat& H = U.H;
  for (const auto& u : samples) check_sample(H, u);
  const auto nv = H.rows();
  const auto k = static_cast<Eigen::Index>(samples.size());
  lp::LpProblem p = base_problem(H, k * nv);
  for (Eigen::Index i = 0; i < k; ++i) add_cover_rows(p, H, i * nv, H * samples[static_cast<std::size_t>(i)]);
  return unpack(H, lp::solve_lp(p));
}

LearnedSet batch_learn(const AdmissibleSet& U, const InfoSet& info) {
  const std::vector<Vec> samples(info.samples().begin(), info.samples().end());
  return batch_learn(U, std::span<const Vec>(samples));
}

LearnedSet recursive_update(const LearnedSet& prev, const Vec& u_new) {
  const Mat& H = prev.H;
  check_sample(H, u_new);
  const auto nv = H.rows();
  lp::LpProblem p = base_problem(H, 2 * nv);
  add_cover_rows(p, H, 0, H * u_new);
  add_cover_rows(p, H, nv, H * prev.y + prev.theta);
  return unpack(H, lp::solve_lp(p));
}

LearnedSet moving_horizon_learn(const AdmissibleSet& U, const InfoSet& info) {
  if (!info.capacity()) throw Error(ErrorCode::InvalidArgument, "moving_horizon_learn: InfoSet needs a capacity");
  return batch_learn(U, info);
}

HPolytope to_polytope(const LearnedSet& s) { return HPolytope{s.H, s.theta + s.H * s.y}; }

VPolytope to_vertices(const LearnedSet& s) { return geometry::vertices_2d(to_polytope(s)); }

double area(const LearnedSet& s) { return geometry::area_2d(to_vertices(s)); }

LearnedSet init_seed(const AdmissibleSet& U, std::span<const Vec> seeds) { return batch_learn(U, seeds); }

std::vector<Vec> default_seeds(const AdmissibleSet& U, double fraction) {
  const auto d = U.dim();
  std::vector<Vec> seeds;
  for (Eigen::Index k = 0; k < d; ++k) {
    // Extent of U along axis k: max t with t·|H e_k| ≤ 1 over the positive rows.
    for (double sign : {1.0, -1.0}) {
      double extent = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < U.num_rows(); ++r) {
        const double a = sign * U.H(r, k);
        if (a > 0.0) extent = std::min(extent, 1.0 / a);
      }
      if (!std::isfinite(extent)) throw Error(ErrorCode::Unbounded, "default_seeds: admissible set unbounded along an axis");
      Vec s = Vec::Zero(d);
      s(k) = sign * fraction * extent;
      seeds.push_back(s);
    }
  }
  return seeds;
}

}  // namespace reachplan::setlearn
