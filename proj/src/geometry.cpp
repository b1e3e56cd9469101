#include "reachplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "reachplan/error.hpp"
#include "reachplan/linprog.hpp"

namespace reachplan::geometry {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

void require_dim(Eigen::Index got, Eigen::Index want, const char* where) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(where) + ": expected dimension " + std::to_string(want) + ", got " + std::to_string(got));
  }
}

std::vector<Point2> as_points2(const VPolytope& V) {
  std::vector<Point2> pts;
  pts.reserve(V.size());
  for (const auto& v : V.vertices) pts.emplace_back(v(0), v(1));
  return pts;
}

// Re-hulls a point cloud of any dimension.
VPolytope rehull(const std::vector<Vec>& points) {
  if (points.empty()) return {};
  const auto d = points.front().size();
  if (d == 2) return hull_2d(points);
  if (d == 1) {
    double lo = points.front()(0);
    double hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, p(0));
      hi = std::max(hi, p(0));
    }
    VPolytope out;
    out.vertices.push_back(Vec::Constant(1, lo));
    if (hi - lo > kDegeneracyTol * std::max(1.0, std::abs(lo) + std::abs(hi))) out.vertices.push_back(Vec::Constant(1, hi));
    return out;
  }
  return reduce_to_extreme_points(points);
}

// L1 residual of the best convex combination of `points` reproducing x.
double hull_residual(const std::vector<Vec>& points, const Vec& x) {
  const auto d = x.size();
  const auto k = static_cast<Eigen::Index>(points.size());
  // variables: w (k), s+ (d), s- (d)
  lp::LpProblem p;
  p.c = Vec::Zero(k + 2 * d);
  p.c.tail(2 * d).setOnes();
  p.A_eq = Mat::Zero(d + 1, k + 2 * d);
  p.b_eq = Vec::Zero(d + 1);
  for (Eigen::Index j = 0; j < k; ++j) {
    p.A_eq.block(0, j, d, 1) = points[static_cast<std::size_t>(j)];
    p.A_eq(d, j) = 1.0;
  }
  p.A_eq.block(0, k, d, d) = Mat::Identity(d, d);
  p.A_eq.block(0, k + d, d, d) = -Mat::Identity(d, d);
  p.b_eq.head(d) = x;
  p.b_eq(d) = 1.0;
  const auto sol = lp::solve_lp(p);
  if (sol.status != lp::Status::Optimal) return std::numeric_limits<double>::infinity();
  return sol.objective;
}

}  // namespace

HPolytope box(const Vec& lo, const Vec& hi) {
  require_dim(hi.size(), lo.size(), "box");
  const auto d = lo.size();
  HPolytope P{Mat::Zero(2 * d, d), Vec::Zero(2 * d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    P.H(2 * k, k) = 1.0;
    P.b(2 * k) = hi(k);
    P.H(2 * k + 1, k) = -1.0;
    P.b(2 * k + 1) = -lo(k);
  }
  return P;
}

VPolytope point_set(const Vec& p) { return VPolytope{{p}}; }

VPolytope oriented_rectangle(const Point2& center, double length, double width, double heading) {
  const Eigen::Rotation2Dd R(heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  VPolytope out;
  for (const Point2& c : {Point2(hl, hw), Point2(-hl, hw), Point2(-hl, -hw), Point2(hl, -hw)}) {
    out.vertices.emplace_back(center + R * c);
  }
  return hull_2d(out.vertices);
}

bool contains(const HPolytope& P, const Vec& x, double tol) {
  require_dim(x.size(), P.dim(), "contains");
  return ((P.H * x - P.b).array() <= tol).all();
}

bool contains(const VPolytope& V, const Vec& x, double tol) {
  if (V.vertices.empty()) return false;
  require_dim(x.size(), V.dim(), "contains");
  if (V.dim() == 2) {
    const Point2 q(x(0), x(1));
    const auto pts = as_points2(V);
    if (pts.size() == 1) return (q - pts[0]).norm() <= tol;
    if (pts.size() == 2) return point_segment_distance(q, pts[0], pts[1]) <= tol;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2& a = pts[i];
      const Point2& b = pts[(i + 1) % pts.size()];
      const double len = (b - a).norm();
      if (len <= kDegeneracyTol) continue;
      if (cross(a, b, q) / len < -tol) return false;
    }
    return true;
  }
  if (V.dim() == 1) {
    double lo = V.vertices.front()(0);
    double hi = lo;
    for (const auto& v : V.vertices) {
      lo = std::min(lo, v(0));
      hi = std::max(hi, v(0));
    }
    return x(0) >= lo - tol && x(0) <= hi + tol;
  }
  return hull_residual(V.vertices, x) <= tol * static_cast<double>(x.size());
}

VPolytope vertices_2d(const HPolytope& P) {
  require_dim(P.dim(), 2, "vertices_2d");
  if (P.b.size() != P.H.rows()) throw Error(ErrorCode::DimensionMismatch, "vertices_2d: H rows vs b");
  if (!P.H.allFinite() || !P.b.allFinite()) throw Error(ErrorCode::InvalidArgument, "vertices_2d: non-finite entries");

  std::vector<Point2> normals;
  std::vector<double> rhs;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const Point2 n(P.H(i, 0), P.H(i, 1));
    const double len = n.norm();
    if (len <= kDegeneracyTol) {
      if (P.b(i) < -kMembershipTol) throw Error(ErrorCode::EmptySet, "vertices_2d: infeasible zero row");
      continue;
    }
    normals.push_back(n / len);
    rhs.push_back(P.b(i) / len);
  }
  if (normals.size() < 3) throw Error(ErrorCode::Unbounded, "vertices_2d: fewer than three halfspaces");

  std::vector<double> angles;
  for (const auto& n : normals) angles.push_back(std::atan2(n.y(), n.x()));
  std::sort(angles.begin(), angles.end());
  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
  if (max_gap >= std::numbers::pi - 1e-12) throw Error(ErrorCode::Unbounded, "vertices_2d: normals do not span the plane");

  double scale = 1.0;
  for (double r : rhs) scale = std::max(scale, std::abs(r));
  const double tol = kMembershipTol * scale;

  std::vector<Point2> candidates;
  const std::size_t m = normals.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double det = normals[i].x() * normals[j].y() - normals[i].y() * normals[j].x();
      if (std::abs(det) <= 1e-12) continue;
      const Point2 x((rhs[i] * normals[j].y() - rhs[j] * normals[i].y()) / det,
                     (normals[i].x() * rhs[j] - normals[j].x() * rhs[i]) / det);
      bool feasible = true;
      for (std::size_t k = 0; k < m && feasible; ++k) feasible = normals[k].dot(x) <= rhs[k] + tol;
      if (feasible) candidates.push_back(x);
    }
  }
  if (candidates.empty()) throw Error(ErrorCode::EmptySet, "vertices_2d: empty polytope");
  return hull_2d(candidates);
}

VPolytope hull_2d(const std::vector<Vec>& points) {
  std::vector<Point2> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    require_dim(p.size(), 2, "hull_2d");
    pts.emplace_back(p(0), p(1));
  }
  return hull_2d(pts);
}

VPolytope hull_2d(const std::vector<Point2>& points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "hull_2d: no points");
  double extent = 1.0;
  for (const auto& p : points) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  const double merge_tol = 1e-10 * extent;
  // Turn test relative to the edge lengths so tiny hulls far from the origin survive.
  auto left_turn = [](const Point2& o, const Point2& a, const Point2& b) {
    return cross(o, a, b) > kOrientationEps * (a - o).norm() * (b - o).norm();
  };

  std::vector<Point2> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    bool dup = false;
    for (const auto& q : pts) {
      if ((p - q).cwiseAbs().maxCoeff() <= merge_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });

  VPolytope out;
  if (pts.size() <= 2) {
    for (const auto& p : pts) out.vertices.emplace_back(p);
    return out;
  }
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && !left_turn(hull[k - 2], hull[k - 1], p)) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && !left_turn(hull[k - 2], hull[k - 1], *it)) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  for (const auto& p : hull) out.vertices.emplace_back(p);
  return out;
}

HPolytope hrep_from_vertices_2d(const VPolytope& V) {
  if (V.vertices.empty()) throw Error(ErrorCode::EmptySet, "hrep_from_vertices_2d: no vertices");
  require_dim(V.dim(), 2, "hrep_from_vertices_2d");
  const VPolytope hull = hull_2d(V.vertices);
  if (hull.size() < 3 || area_2d(hull) <= kDegeneracyTol) {
    throw Error(ErrorCode::DegenerateHull, "hrep_from_vertices_2d: area below tolerance");
  }
  const auto n = static_cast<Eigen::Index>(hull.size());
  HPolytope P{Mat(n, 2), Vec(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec& a = hull.vertices[static_cast<std::size_t>(i)];
    const Vec& b = hull.vertices[static_cast<std::size_t>((i + 1) % n)];
    Point2 normal(b(1) - a(1), a(0) - b(0));
    normal.normalize();
    P.H.row(i) = normal.transpose();
    P.b(i) = normal.dot(Point2(a(0), a(1)));
  }
  return P;
}

HPolytope hrep_from_vertices_2d_inflated(const VPolytope& V) {
  if (V.vertices.empty()) throw Error(ErrorCode::EmptySet, "hrep_from_vertices_2d_inflated: no vertices");
  const VPolytope hull = hull_2d(V.vertices);
  if (hull.size() >= 3 && area_2d(hull) > kDegeneracyTol) return hrep_from_vertices_2d(hull);
  const VPolytope grow = hull_2d(std::vector<Point2>{{kInflateEps, kInflateEps},
                                                     {-kInflateEps, kInflateEps},
                                                     {-kInflateEps, -kInflateEps},
                                                     {kInflateEps, -kInflateEps}});
  return hrep_from_vertices_2d(minkowski_sum(hull, grow));
}

VPolytope affine_image(const Mat& A, const VPolytope& V) {
  if (V.vertices.empty()) return {};
  require_dim(A.cols(), V.dim(), "affine_image");
  std::vector<Vec> pts;
  pts.reserve(V.size());
  for (const auto& v : V.vertices) pts.emplace_back(A * v);
  return rehull(pts);
}

VPolytope minkowski_sum(const VPolytope& P, const VPolytope& Q) {
  if (P.vertices.empty() || Q.vertices.empty()) throw Error(ErrorCode::EmptySet, "minkowski_sum: empty operand");
  require_dim(Q.dim(), P.dim(), "minkowski_sum");
  std::vector<Vec> pts;
  pts.reserve(P.size() * Q.size());
  for (const auto& p : P.vertices) {
    for (const auto& q : Q.vertices) pts.emplace_back(p + q);
  }
  return rehull(pts);
}

VPolytope project(const VPolytope& V, const std::vector<int>& dims) {
  if (dims.empty()) throw Error(ErrorCode::InvalidArgument, "project: empty dimension list");
  for (int d : dims) {
    if (d < 0 || d >= V.dim()) throw Error(ErrorCode::DimensionMismatch, "project: index out of range");
  }
  std::vector<Vec> pts;
  pts.reserve(V.size());
  for (const auto& v : V.vertices) {
    Vec p(static_cast<Eigen::Index>(dims.size()));
    for (std::size_t k = 0; k < dims.size(); ++k) p(static_cast<Eigen::Index>(k)) = v(dims[k]);
    pts.push_back(std::move(p));
  }
  return rehull(pts);
}

HPolytope translate(const HPolytope& P, const Vec& y) {
  require_dim(y.size(), P.dim(), "translate");
  return HPolytope{P.H, P.b + P.H * y};
}

VPolytope translate(const VPolytope& V, const Vec& y) {
  VPolytope out = V;
  for (auto& v : out.vertices) {
    require_dim(y.size(), v.size(), "translate");
    v += y;
  }
  return out;
}

VPolytope scale(const VPolytope& V, double s) {
  if (s == 0.0 && !V.vertices.empty()) return point_set(Vec::Zero(V.dim()));
  VPolytope out = V;
  for (auto& v : out.vertices) v *= s;
  if (s < 0.0) return rehull(out.vertices);
  return out;
}

VPolytope reduce_to_extreme_points(const std::vector<Vec>& points) {
  std::vector<Vec> unique;
  for (const auto& p : points) {
    bool dup = false;
    for (const auto& q : unique) {
      if ((p - q).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, p.cwiseAbs().maxCoeff())) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(p);
  }
  if (unique.size() <= 2) return VPolytope{unique};
  std::vector<bool> keep(unique.size(), true);
  for (std::size_t k = 0; k < unique.size(); ++k) {
    std::vector<Vec> others;
    for (std::size_t j = 0; j < unique.size(); ++j) {
      if (j != k && keep[j]) others.push_back(unique[j]);
    }
    if (hull_residual(others, unique[k]) <= 1e-10 * std::max(1.0, unique[k].cwiseAbs().maxCoeff())) keep[k] = false;
  }
  VPolytope out;
  for (std::size_t k = 0; k < unique.size(); ++k) {
    if (keep[k]) out.vertices.push_back(unique[k]);
  }
  return out;
}

double area_2d(const VPolytope& V) {
  if (V.size() < 3) return 0.0;
  require_dim(V.dim(), 2, "area_2d");
  double twice = 0.0;
  for (std::size_t i = 0; i < V.size(); ++i) {
    const Vec& a = V.vertices[i];
    const Vec& b = V.vertices[(i + 1) % V.size()];
    twice += a(0) * b(1) - a(1) * b(0);
  }
  return 0.5 * std::abs(twice);
}

Point2 centroid_2d(const VPolytope& V) {
  require_dim(V.dim(), 2, "centroid_2d");
  Point2 mean = Point2::Zero();
  for (const auto& v : V.vertices) mean += Point2(v(0), v(1));
  mean /= static_cast<double>(V.size());
  const double area = area_2d(V);
  if (area <= kDegeneracyTol) return mean;
  double cx = 0.0;
  double cy = 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < V.size(); ++i) {
    const Point2 a = Point2(V.vertices[i](0), V.vertices[i](1)) - mean;
    const Vec& bv = V.vertices[(i + 1) % V.size()];
    const Point2 b = Point2(bv(0), bv(1)) - mean;
    const double c = a.x() * b.y() - b.x() * a.y();
    twice += c;
    cx += (a.x() + b.x()) * c;
    cy += (a.y() + b.y()) * c;
  }
  return mean + Point2(cx, cy) / (3.0 * twice);
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double segment_segment_distance(const Point2& a0, const Point2& a1, const Point2& b0, const Point2& b1) {
  const double o1 = cross(a0, a1, b0);
  const double o2 = cross(a0, a1, b1);
  const double o3 = cross(b0, b1, a0);
  const double o4 = cross(b0, b1, a1);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

namespace {

std::vector<std::pair<Point2, Point2>> edges_of(const std::vector<Point2>& pts) {
  std::vector<std::pair<Point2, Point2>> edges;
  if (pts.size() == 1) {
    edges.emplace_back(pts[0], pts[0]);
  } else if (pts.size() == 2) {
    edges.emplace_back(pts[0], pts[1]);
  } else {
    for (std::size_t i = 0; i < pts.size(); ++i) edges.emplace_back(pts[i], pts[(i + 1) % pts.size()]);
  }
  return edges;
}

}  // namespace

double distance_2d(const VPolytope& P, const VPolytope& Q) {
  if (P.vertices.empty() || Q.vertices.empty()) throw Error(ErrorCode::EmptySet, "distance_2d: empty operand");
  require_dim(P.dim(), 2, "distance_2d");
  require_dim(Q.dim(), 2, "distance_2d");
  if (P.size() >= 3 && contains(P, Q.vertices.front(), 0.0)) return 0.0;
  if (Q.size() >= 3 && contains(Q, P.vertices.front(), 0.0)) return 0.0;
  const auto ep = edges_of(as_points2(P));
  const auto eq = edges_of(as_points2(Q));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [a0, a1] : ep) {
    for (const auto& [b0, b1] : eq) best = std::min(best, segment_segment_distance(a0, a1, b0, b1));
  }
  return best;
}

double signed_distance_2d(const VPolytope& P, const Point2& x) {
  require_dim(P.dim(), 2, "signed_distance_2d");
  const auto pts = as_points2(P);
  const auto edges = edges_of(pts);
  double outside = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : edges) outside = std::min(outside, point_segment_distance(x, a, b));
  if (pts.size() >= 3 && contains(P, Vec(x), 0.0)) return -outside;
  return outside;
}

Point2 closest_point_2d(const VPolytope& P, const Point2& x) {
  require_dim(P.dim(), 2, "closest_point_2d");
  const auto pts = as_points2(P);
  if (pts.size() >= 3 && contains(P, Vec(x), 0.0)) return x;
  Point2 best = pts.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : edges_of(pts)) {
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const Point2 c = a + t * ab;
    const double d = (x - c).norm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

double diameter(const VPolytope& V) {
  double best = 0.0;
  for (std::size_t i = 0; i < V.size(); ++i) {
    for (std::size_t j = i + 1; j < V.size(); ++j) best = std::max(best, (V.vertices[i] - V.vertices[j]).norm());
  }
  return best;
}

}  // namespace reachplan::geometry
