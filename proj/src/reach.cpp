#include "reachplan/reach.hpp"

#include <string>

#include "reachplan/error.hpp"
#include "reachplan/vehicle.hpp"

namespace reachplan::reach {

namespace {

void validate(const LtvModel& m, const Vec& x0, const VPolytope& U, int N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "forward_occupancy: horizon must be at least 1");
  if (static_cast<int>(m.A_seq.size()) < N || static_cast<int>(m.B_seq.size()) < N) {
    throw Error(ErrorCode::InvalidArgument, "forward_occupancy: model sequences shorter than horizon");
  }
  if (U.vertices.empty()) throw Error(ErrorCode::EmptySet, "forward_occupancy: empty control set");
  const auto nx = m.state_dim();
  const auto nu = m.input_dim();
  if (x0.size() != nx) throw Error(ErrorCode::DimensionMismatch, "forward_occupancy: x0 dimension");
  if (U.dim() != nu) throw Error(ErrorCode::DimensionMismatch, "forward_occupancy: control set dimension");
  for (int i = 0; i < N; ++i) {
    const auto& A = m.A_seq[static_cast<std::size_t>(i)];
    const auto& B = m.B_seq[static_cast<std::size_t>(i)];
    if (A.rows() != nx || A.cols() != nx || B.rows() != nx || B.cols() != nu) {
      throw Error(ErrorCode::DimensionMismatch, "forward_occupancy: inconsistent model matrices at step " + std::to_string(i));
    }
  }
  if (m.position_dims.empty()) throw Error(ErrorCode::InvalidArgument, "forward_occupancy: no position dimensions");
  for (int d : m.position_dims) {
    if (d < 0 || d >= nx) throw Error(ErrorCode::DimensionMismatch, "forward_occupancy: position index out of range");
  }
}

Mat selector(const std::vector<int>& dims, Eigen::Index nx) {
  Mat P = Mat::Zero(static_cast<Eigen::Index>(dims.size()), nx);
  for (std::size_t k = 0; k < dims.size(); ++k) P(static_cast<Eigen::Index>(k), dims[k]) = 1.0;
  return P;
}

// States ordered (p0, v0, p1, v1, ...) with input k driving only the pair k.
bool axis_separable(const LtvModel& m, int N) {
  const auto nx = m.state_dim();
  const auto nu = m.input_dim();
  if (nx != 2 * nu) return false;
  for (int i = 0; i < N; ++i) {
    const auto& A = m.A_seq[static_cast<std::size_t>(i)];
    const auto& B = m.B_seq[static_cast<std::size_t>(i)];
    for (Eigen::Index r = 0; r < nx; ++r) {
      for (Eigen::Index c = 0; c < nx; ++c) {
        if (r / 2 != c / 2 && A(r, c) != 0.0) return false;
      }
      for (Eigen::Index c = 0; c < nu; ++c) {
        if (r / 2 != c && B(r, c) != 0.0) return false;
      }
    }
  }
  return true;
}

// U equals the product of its coordinate intervals.
bool is_axis_box(const VPolytope& U, Vec& lo, Vec& hi) {
  const auto d = U.dim();
  lo = U.vertices.front();
  hi = lo;
  for (const auto& v : U.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const long corners = 1L << d;
  for (long mask = 0; mask < corners; ++mask) {
    Vec c(d);
    for (Eigen::Index k = 0; k < d; ++k) c(k) = (mask >> k) & 1 ? hi(k) : lo(k);
    if (!geometry::contains(U, c, 1e-12)) return false;
  }
  return true;
}

std::vector<VPolytope> state_sets_separable(const LtvModel& m, const Vec& x0, const Vec& lo, const Vec& hi, int N) {
  const auto nu = m.input_dim();
  std::vector<std::vector<VPolytope>> axis(static_cast<std::size_t>(nu));
  for (Eigen::Index k = 0; k < nu; ++k) {
    auto& tube = axis[static_cast<std::size_t>(k)];
    tube.push_back(geometry::point_set(x0.segment(2 * k, 2)));
    VPolytope Uk{{Vec::Constant(1, lo(k))}};
    if (hi(k) > lo(k)) Uk.vertices.push_back(Vec::Constant(1, hi(k)));
    for (int i = 0; i < N; ++i) {
      const Mat Ak = m.A_seq[static_cast<std::size_t>(i)].block(2 * k, 2 * k, 2, 2);
      const Mat Bk = m.B_seq[static_cast<std::size_t>(i)].block(2 * k, k, 2, 1);
      tube.push_back(geometry::minkowski_sum(geometry::affine_image(Ak, tube.back()), geometry::affine_image(Bk, Uk)));
    }
  }
  std::vector<VPolytope> R;
  for (int i = 0; i <= N; ++i) {
    std::vector<Vec> verts{Vec::Zero(2 * nu)};
    for (Eigen::Index k = 0; k < nu; ++k) {
      std::vector<Vec> next;
      for (const auto& partial : verts) {
        for (const auto& w : axis[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)].vertices) {
          Vec v = partial;
          v.segment(2 * k, 2) = w;
          next.push_back(std::move(v));
        }
      }
      verts = std::move(next);
    }
    R.push_back(VPolytope{std::move(verts)});
  }
  return R;
}

std::vector<VPolytope> state_sets_generic(const LtvModel& m, const Vec& x0, const VPolytope& U, int N) {
  std::vector<VPolytope> R{geometry::point_set(x0)};
  for (int i = 0; i < N; ++i) {
    const auto& A = m.A_seq[static_cast<std::size_t>(i)];
    const auto& B = m.B_seq[static_cast<std::size_t>(i)];
    R.push_back(geometry::minkowski_sum(geometry::affine_image(A, R.back()), geometry::affine_image(B, U)));
  }
  return R;
}

}  // namespace

LtvModel LtvModel::double_integrator(double T, int horizon) {
  const auto [A, B] = vehicle::sv_matrices(T);
  LtvModel m;
  m.A_seq.assign(static_cast<std::size_t>(horizon), Mat(A));
  m.B_seq.assign(static_cast<std::size_t>(horizon), Mat(B));
  m.position_dims = {0, 2};
  return m;
}

ReachTube forward_occupancy(const LtvModel& m, const Vec& x0, const VPolytope& U, int N, ReachOptions opts) {
  validate(m, x0, U, N);
  ReachTube tube;
  const auto nx = m.state_dim();

  if (opts.state_sets) {
    Vec lo;
    Vec hi;
    if (axis_separable(m, N) && is_axis_box(U, lo, hi)) {
      tube.R = state_sets_separable(m, x0, lo, hi, N);
    } else {
      tube.R = state_sets_generic(m, x0, U, N);
    }
  }

  // Projection and linear maps commute with ⊕, so each occupancy is built
  // directly in position space:
  //   O_i = P Φ(i,0) x0 ⊕ ⊕_{k<i} P Φ(i,k+1) B_k U.
  const Mat P = selector(m.position_dims, nx);
  for (int i = 1; i <= N; ++i) {
    Mat G = P;
    VPolytope acc;
    for (int k = i - 1; k >= 0; --k) {
      const VPolytope term = geometry::affine_image(G * m.B_seq[static_cast<std::size_t>(k)], U);
      acc = acc.vertices.empty() ? term : geometry::minkowski_sum(acc, term);
      G = G * m.A_seq[static_cast<std::size_t>(k)];
    }
    tube.O.push_back(geometry::translate(acc, G * x0));
  }
  return tube;
}

std::vector<HPolytope> occupancy_hrep(const ReachTube& tube) {
  std::vector<HPolytope> out;
  out.reserve(tube.O.size());
  for (const auto& O : tube.O) out.push_back(geometry::hrep_from_vertices_2d_inflated(O));
  return out;
}

}  // namespace reachplan::reach
