#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "reachplan/error.hpp"
#include "reachplan/geometry.hpp"

using namespace reachplan::geometry;
using reachplan::Error;
using reachplan::ErrorCode;

namespace {

VPolytope square(double h) {
  return VPolytope{{Vec(Point2(-h, -h)), Vec(Point2(h, -h)), Vec(Point2(h, h)), Vec(Point2(-h, h))}};
}

std::vector<Point2> pts(const VPolytope& V) {
  std::vector<Point2> out;
  for (const auto& v : V.vertices) out.emplace_back(v(0), v(1));
  return out;
}

VPolytope random_polygon(std::mt19937_64& rng, int n, double r, Point2 c = Point2::Zero()) {
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<Point2> p;
  while (static_cast<int>(p.size()) < n) {
    Point2 q(U(rng), U(rng));
    if (q.norm() <= 1) p.push_back(c + r * q);
  }
  return hull_2d(p);
}

}  // namespace

TEST_CASE("geometry: contains with tolerance") {
  const auto P = box(Vec(Point2(-1, -1)), Vec(Point2(1, 1)));
  CHECK(contains(P, Vec(Point2(0, 0)), 1e-9));
  CHECK(contains(P, Vec(Point2(1.0000000001, 0)), 1e-9));
  CHECK_FALSE(contains(P, Vec(Point2(2, 0)), 1e-9));
  CHECK_THROWS_AS(contains(P, Vec::Zero(3)), Error);
}

TEST_CASE("geometry: vertices_2d") {
  auto P = box(Vec(Point2(-1, -1)), Vec(Point2(1, 1)));
  auto V = vertices_2d(P);
  CHECK(oracle::same_point_set(V.vertices, square(1).vertices, 1e-12));
  CHECK(area_2d(V) == doctest::Approx(4.0));

  P.H.conservativeResize(5, 2);
  P.b.conservativeResize(5);
  P.H.row(4) << 1, 0;
  P.b(4) = 5;
  CHECK(vertices_2d(P).size() == 4);

  HPolytope Q{Mat(5, 2), Vec(5)};
  Q.H << 1, 0, -1, 0, 0, 1, 0, -1, 1, 1;
  Q.b << 1, 0, 1, 0, 1.5;
  const auto W = vertices_2d(Q);
  const std::vector<Vec> expect{Vec(Point2(0, 0)), Vec(Point2(1, 0)), Vec(Point2(1, 0.5)), Vec(Point2(0.5, 1)),
                                Vec(Point2(0, 1))};
  CHECK(oracle::same_point_set(W.vertices, expect, 1e-12));

  HPolytope empty{Mat(2, 2), Vec(2)};
  empty.H << 1, 0, -1, 0;
  empty.b << -1, -1;
  CHECK_THROWS_AS(vertices_2d(empty), Error);
  HPolytope half{Mat(1, 2), Vec(1)};
  half.H << 1, 0;
  half.b << 1;
  try {
    (void)vertices_2d(half);
    FAIL("expected Unbounded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unbounded);
  }
}

TEST_CASE("geometry: hull_2d against brute force") {
  CHECK(hull_2d(std::vector<Point2>{Point2(0, 0)}).size() == 1);
  auto sq = pts(square(1));
  sq.emplace_back(0, 0);
  sq.emplace_back(1, 0);
  CHECK(hull_2d(sq).size() == 4);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> p;
    while (p.size() < 100) {
      Point2 q(U(rng), U(rng));
      if (q.norm() <= 1) p.push_back(q);
    }
    const auto H = hull_2d(p);
    CHECK(oracle::same_point_set(H.vertices, oracle::to_vecs(oracle::brute_hull(p)), 1e-12));
    for (std::size_t i = 0; i < H.size(); ++i) {
      const auto a = pts(H)[i];
      const auto b = pts(H)[(i + 1) % H.size()];
      const auto c = pts(H)[(i + 2) % H.size()];
      CHECK(oracle::cross(a, b, c) > 0);
    }
  }
}

TEST_CASE("geometry: hrep round trips") {
  const auto H = hrep_from_vertices_2d(square(1));
  CHECK(H.rows() == 4);
  CHECK(oracle::same_point_set(vertices_2d(H).vertices, square(1).vertices, 1e-9));
  const VPolytope tri{{Vec(Point2(0, 0)), Vec(Point2(1, 0)), Vec(Point2(0, 1))}};
  CHECK(hrep_from_vertices_2d(tri).rows() == 3);
  CHECK(oracle::same_point_set(vertices_2d(hrep_from_vertices_2d(tri)).vertices, tri.vertices, 1e-9));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point2> p;
    for (int k = 0; k < 5; ++k) {
      const double ang = 2 * std::numbers::pi * (k + 0.3 * U(rng) / 3) / 5;
      p.emplace_back(std::cos(ang) * (1 + 0.1 * U(rng)), std::sin(ang) * (1 + 0.1 * U(rng)));
    }
    const auto V = hull_2d(p);
    const auto R = hrep_from_vertices_2d(V);
    for (const auto& v : V.vertices) CHECK(((R.H * v - R.b).array().abs() <= 1e-9 || (R.H * v - R.b).array() <= 0).all());
    CHECK(oracle::same_point_set(vertices_2d(R).vertices, V.vertices, 1e-9));
    for (int s = 0; s < 1000 / 50; ++s) {
      const Vec x = Vec(Point2(U(rng), U(rng)));
      CHECK(contains(R, x, 1e-9) == contains(V, x, 1e-9));
    }
  }
  const VPolytope seg{{Vec(Point2(0, 0)), Vec(Point2(1, 0))}};
  CHECK_THROWS_AS(hrep_from_vertices_2d(seg), Error);
  const auto I = hrep_from_vertices_2d_inflated(point_set(Vec(Point2(2, 3))));
  CHECK(contains(I, Vec(Point2(2 + 0.9e-6, 3 - 0.9e-6))));
  CHECK_FALSE(contains(I, Vec(Point2(2 + 2e-6, 3)), 0.0));
}

TEST_CASE("geometry: affine image") {
  const VPolytope S = square(1);
  CHECK(oracle::same_point_set(affine_image(Mat::Identity(2, 2), S).vertices, S.vertices, 1e-12));
  CHECK(affine_image(Mat::Zero(2, 2), S).size() == 1);
  const VPolytope B{{Vec(Point2(-1, -2)), Vec(Point2(1, -2)), Vec(Point2(1, 2)), Vec(Point2(-1, 2))}};
  Mat R(2, 2);
  R << 0, -1, 1, 0;
  const VPolytope expect{{Vec(Point2(-2, -1)), Vec(Point2(2, -1)), Vec(Point2(2, 1)), Vec(Point2(-2, 1))}};
  CHECK(oracle::same_point_set(affine_image(R, B).vertices, expect.vertices, 1e-12));
  CHECK_THROWS_AS(affine_image(Mat::Identity(3, 3), S), Error);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto P = random_polygon(rng, 8, 1.0);
    const auto Q = random_polygon(rng, 8, 0.5);
    Mat A = Mat::NullaryExpr(2, 2, [&] { return U(rng); });
    const auto lhs = affine_image(A, minkowski_sum(P, Q));
    const auto rhs = minkowski_sum(affine_image(A, P), affine_image(A, Q));
    CHECK(oracle::same_point_set(lhs.vertices, rhs.vertices, 1e-9));
    CHECK(area_2d(affine_image(A, P)) == doctest::Approx(std::abs(A.determinant()) * area_2d(P)).epsilon(1e-9));
  }
}

TEST_CASE("geometry: minkowski sum") {
  const auto S = square(1);
  CHECK(oracle::same_point_set(minkowski_sum(S, point_set(Vec::Zero(2))).vertices, S.vertices, 1e-12));
  CHECK(oracle::same_point_set(minkowski_sum(S, S).vertices, square(2).vertices, 1e-12));

  const VPolytope unit{{Vec(Point2(0, 0)), Vec(Point2(1, 0)), Vec(Point2(1, 1)), Vec(Point2(0, 1))}};
  const VPolytope tri{{Vec(Point2(0, 0)), Vec(Point2(1, 0)), Vec(Point2(0, 1))}};
  const auto M = minkowski_sum(unit, tri);
  std::vector<Point2> sums;
  for (const auto& p : unit.vertices)
    for (const auto& q : tri.vertices) sums.emplace_back(p + q);
  CHECK(oracle::same_point_set(M.vertices, oracle::to_vecs(oracle::brute_hull(sums)), 1e-12));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 100; ++k) {
    double a = U(rng), b = U(rng);
    if (a + b > 1) {
      a = 1 - a;
      b = 1 - b;
    }
    const Vec x = Vec(Point2(U(rng), U(rng))) + Vec(Point2(a, b));
    CHECK(contains(M, x, 1e-9));
  }
  CHECK_THROWS_AS(minkowski_sum(S, point_set(Vec::Zero(3))), Error);
}

TEST_CASE("geometry: projection") {
  const auto seg = project(square(1), {0});
  REQUIRE(seg.size() == 2);
  CHECK(std::min(seg.vertices[0](0), seg.vertices[1](0)) == doctest::Approx(-1));
  CHECK(std::max(seg.vertices[0](0), seg.vertices[1](0)) == doctest::Approx(1));

  std::vector<Vec> corners;
  for (int mask = 0; mask < 16; ++mask) {
    Vec c(4);
    for (int k = 0; k < 4; ++k) c(k) = (mask >> k) & 1 ? 1.0 : -1.0;
    corners.push_back(c);
  }
  CHECK(oracle::same_point_set(project(VPolytope{corners}, {0, 2}).vertices, square(1).vertices, 1e-12));
  CHECK_THROWS_AS(project(square(1), {}), Error);
  CHECK_THROWS_AS(project(square(1), {2}), Error);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<Vec> cloud;
  for (int k = 0; k < 20; ++k) cloud.push_back(Vec::NullaryExpr(4, [&] { return N(rng); }));
  const auto P = project(VPolytope{cloud}, {1, 3});
  for (int s = 0; s < 200; ++s) {
    Vec w = Vec::NullaryExpr(20, [&] { return U(rng); });
    w /= w.sum();
    Vec x = Vec::Zero(4);
    for (int k = 0; k < 20; ++k) x += w(k) * cloud[static_cast<std::size_t>(k)];
    CHECK(contains(P, Vec(Point2(x(1), x(3))), 1e-9));
  }
}

TEST_CASE("geometry: translation") {
  const auto B = box(Vec(Point2(-1, -1)), Vec(Point2(1, 1)));
  const auto same = translate(B, Vec::Zero(2));
  CHECK(same.b.isApprox(B.b));
  const auto moved = translate(B, Vec(Point2(1, 0)));
  CHECK(oracle::same_point_set(vertices_2d(moved).vertices,
                               VPolytope{{Vec(Point2(0, -1)), Vec(Point2(2, -1)), Vec(Point2(2, 1)), Vec(Point2(0, 1))}}.vertices,
                               1e-12));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-2, 2);
  const auto P = hrep_from_vertices_2d(random_polygon(rng, 7, 1.0));
  const Vec y = Vec(Point2(U(rng), U(rng)));
  const auto T = translate(P, y);
  for (int k = 0; k < 100; ++k) {
    const Vec x = Vec(Point2(U(rng), U(rng)));
    CHECK(contains(T, x) == contains(P, Vec(x - y)));
  }
}

TEST_CASE("geometry: area") {
  CHECK(area_2d(square(1)) == doctest::Approx(4.0));
  CHECK(area_2d(point_set(Vec::Zero(2))) == 0.0);
  CHECK(area_2d(VPolytope{{Vec(Point2(0, 0)), Vec(Point2(2, 0)), Vec(Point2(0, 2))}}) == doctest::Approx(2.0));
  std::mt19937_64 rng(8);
  const auto P = random_polygon(rng, 10, 1.0);
  Mat R(2, 2);
  R << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  CHECK(area_2d(affine_image(R, P)) == doctest::Approx(area_2d(P)).epsilon(1e-12));
}

TEST_CASE("geometry: distance") {
  const auto A = oriented_rectangle(Point2(0, 0), 1, 1, 0);
  const auto B = oriented_rectangle(Point2(3, 0), 1, 1, 0);
  CHECK(distance_2d(A, B) == doctest::Approx(2.0));
  CHECK(distance_2d(A, oriented_rectangle(Point2(0.5, 0.2), 1, 1, 0.3)) == 0.0);
  CHECK(distance_2d(square(2), square(1)) == 0.0);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto P = random_polygon(rng, 6, 1.0, Point2(U(rng), U(rng)));
    const auto Q = random_polygon(rng, 6, 1.0, Point2(U(rng), U(rng)));
    const auto R = random_polygon(rng, 6, 1.0, Point2(U(rng), U(rng)));
    const double d = distance_2d(P, Q);
    CHECK(d == doctest::Approx(oracle::polygon_distance(pts(P), pts(Q))).epsilon(1e-6));
    CHECK(std::abs(d - distance_2d(Q, P)) <= 1e-12);
    CHECK(distance_2d(P, R) <= distance_2d(P, Q) + distance_2d(Q, R) + diameter(Q) + 1e-9);
  }
}

TEST_CASE("geometry: signed distance and closest point") {
  const auto S = square(1);
  CHECK(signed_distance_2d(S, Point2(3, 0)) == doctest::Approx(2.0));
  CHECK(signed_distance_2d(S, Point2(0.5, 0)) == doctest::Approx(-0.5));
  CHECK(closest_point_2d(S, Point2(3, 3)).isApprox(Point2(1, 1)));
  CHECK(closest_point_2d(S, Point2(0.2, 0.1)).isApprox(Point2(0.2, 0.1)));
}

TEST_CASE("geometry: oriented rectangle") {
  const auto R = oriented_rectangle(Point2(1, 2), 2, 1, std::numbers::pi / 2);
  CHECK(area_2d(R) == doctest::Approx(2.0));
  CHECK(contains(R, Vec(Point2(1, 2.99))));
  CHECK_FALSE(contains(R, Vec(Point2(1.99, 2))));
}
