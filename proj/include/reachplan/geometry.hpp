#pragma once

#include <vector>

#include <Eigen/Dense>

namespace reachplan::geometry {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point2 = Eigen::Vector2d;

/// Tolerance policy shared by every module.
inline constexpr double kMembershipTol = 1e-9;
inline constexpr double kDegeneracyTol = 1e-12;
inline constexpr double kOrientationEps = 1e-12;
/// Half-width of the box added to degenerate hulls before H-conversion.
inline constexpr double kInflateEps = 1e-6;

/// {x : H x ≤ b}
struct HPolytope {
  Mat H;
  Vec b;

  Eigen::Index dim() const { return H.cols(); }
  Eigen::Index rows() const { return H.rows(); }
};

/// Convex hull of `vertices`; counter-clockwise when two-dimensional.
struct VPolytope {
  std::vector<Vec> vertices;

  Eigen::Index dim() const { return vertices.empty() ? 0 : vertices.front().size(); }
  std::size_t size() const { return vertices.size(); }
};

HPolytope box(const Vec& lo, const Vec& hi);
VPolytope point_set(const Vec& p);
/// Axis-aligned 2-D rectangle of the given half extents rotated by `heading`.
VPolytope oriented_rectangle(const Point2& center, double length, double width, double heading);

bool contains(const HPolytope& P, const Vec& x, double tol = kMembershipTol);
/// Membership in the hull; closed-form for 2-D, an LP feasibility test otherwise.
bool contains(const VPolytope& V, const Vec& x, double tol = kMembershipTol);

/// Exact vertex set of a bounded 2-D H-polytope, counter-clockwise.
/// Degenerate sets come back with one or two vertices.
VPolytope vertices_2d(const HPolytope& P);

/// Andrew monotone chain; drops collinear and duplicate points.
VPolytope hull_2d(const std::vector<Point2>& points);
VPolytope hull_2d(const std::vector<Vec>& points);

/// One unit-normal halfspace per hull edge. Throws DegenerateHull when the
/// area is at most kDegeneracyTol.
HPolytope hrep_from_vertices_2d(const VPolytope& V);

/// Same, but degenerate hulls are first grown by a kInflateEps box.
HPolytope hrep_from_vertices_2d_inflated(const VPolytope& V);

VPolytope affine_image(const Mat& A, const VPolytope& V);
VPolytope minkowski_sum(const VPolytope& P, const VPolytope& Q);
VPolytope project(const VPolytope& V, const std::vector<int>& dims);
HPolytope translate(const HPolytope& P, const Vec& y);
VPolytope translate(const VPolytope& V, const Vec& y);
VPolytope scale(const VPolytope& V, double s);

/// Drops points that are convex combinations of the others (any dimension).
VPolytope reduce_to_extreme_points(const std::vector<Vec>& points);

double area_2d(const VPolytope& V);
Point2 centroid_2d(const VPolytope& V);

/// Euclidean distance between two convex polygons; zero iff they intersect.
double distance_2d(const VPolytope& P, const VPolytope& Q);
/// Positive outside, negative (penetration depth) inside.
double signed_distance_2d(const VPolytope& P, const Point2& x);
/// Euclidean projection of x onto the polygon (x itself when inside).
Point2 closest_point_2d(const VPolytope& P, const Point2& x);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);
double segment_segment_distance(const Point2& a0, const Point2& a1, const Point2& b0, const Point2& b1);

double diameter(const VPolytope& V);

}  // namespace reachplan::geometry
