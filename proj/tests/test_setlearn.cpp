#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "reachplan/error.hpp"
#include "reachplan/setlearn.hpp"

using namespace reachplan::setlearn;
using reachplan::Error;
using reachplan::ErrorCode;
using reachplan::geometry::Point2;

namespace {

AdmissibleSet unit_box() { return AdmissibleSet::box(Vec(Point2(1, 1))); }

Vec v2(double a, double b) { return Vec(Point2(a, b)); }

bool box_equals(const LearnedSet& s, double xlo, double xhi, double ylo, double yhi, double tol = 1e-9) {
  const auto V = to_vertices(s);
  const std::vector<Vec> expect{v2(xlo, ylo), v2(xhi, ylo), v2(xhi, yhi), v2(xlo, yhi)};
  return oracle::same_point_set(V.vertices, expect, tol);
}

Vec cover_vector(const Mat& H, const std::vector<Vec>& us) {
  Vec m = Vec::Constant(H.rows(), -std::numeric_limits<double>::infinity());
  for (const auto& u : us) m = m.cwiseMax(H * u);
  return m;
}

}  // namespace

TEST_CASE("setlearn: worked batch example") {
  const std::vector<Vec> us{v2(0.5, 0.1), v2(-0.3, 0.1), v2(0.1, -0.2)};
  const auto s = batch_learn(unit_box(), us);
  CHECK(s.objective == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(s.rho == doctest::Approx(0.4));
  CHECK(s.theta(0) == doctest::Approx(0.4));
  CHECK(s.theta(1) == doctest::Approx(0.4));
  CHECK(s.theta(2) + s.theta(3) == doctest::Approx(0.3));
  CHECK(s.y(0) == doctest::Approx(0.1));
  CHECK(box_equals(s, -0.3, 0.5, -0.2, 0.1));
  CHECK(s.objective == doctest::Approx(oracle::learning_lp_min(unit_box().H, cover_vector(unit_box().H, us))).epsilon(1e-9));
}

TEST_CASE("setlearn: single sample and full admissible set") {
  const std::vector<Vec> one{v2(0.2, -0.3)};
  const auto s = batch_learn(unit_box(), one);
  CHECK(s.objective == doctest::Approx(0.0).epsilon(1e-12));
  const auto V = to_vertices(s);
  REQUIRE(V.size() == 1);
  CHECK((V.vertices[0] - one[0]).norm() <= 1e-9);

  const std::vector<Vec> corners{v2(1, 1), v2(-1, 1), v2(-1, -1), v2(1, -1)};
  const auto full = batch_learn(unit_box(), corners);
  CHECK(full.rho == doctest::Approx(1.0));
  CHECK(full.y.norm() <= 1e-9);
  CHECK((full.theta.array() - 1.0).abs().maxCoeff() <= 1e-9);
  CHECK(!full.center_parameter().has_value());
}

TEST_CASE("setlearn: errors") {
  const std::vector<Vec> outside{v2(1.5, 0)};
  try {
    (void)batch_learn(unit_box(), outside);
    FAIL("expected SampleOutsideAdmissible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SampleOutsideAdmissible);
  }
  try {
    (void)batch_learn(unit_box(), std::vector<Vec>{});
    FAIL("expected EmptyInfoSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInfoSet);
  }
  const auto s = batch_learn(unit_box(), std::vector<Vec>{v2(0, 0)});
  CHECK_THROWS_AS(recursive_update(s, v2(0, 2)), Error);
  CHECK_THROWS_AS(moving_horizon_learn(unit_box(), InfoSet{}), Error);
}

TEST_CASE("setlearn: recursive worked example") {
  LearnedSet prev;
  prev.H = unit_box().H;
  prev.theta = Vec::Constant(4, 0.1);
  prev.y = Vec::Zero(2);
  prev.rho = 0.1;
  const auto s = recursive_update(prev, v2(0.5, 0));
  CHECK(s.objective == doctest::Approx(1.1).epsilon(1e-9));
  CHECK(s.rho == doctest::Approx(0.3));
  CHECK(box_equals(s, -0.1, 0.5, -0.1, 0.1));
  const Vec m = (prev.H * v2(0.5, 0)).cwiseMax(prev.H * prev.y + prev.theta);
  CHECK(s.objective == doctest::Approx(oracle::learning_lp_min(prev.H, m)).epsilon(1e-9));

  const auto same = recursive_update(s, v2(0.2, 0.05));
  CHECK(box_equals(same, -0.1, 0.5, -0.1, 0.1));
}

TEST_CASE("setlearn: recursive stream properties") {
  std::mt19937_64 rng(21);
  const Mat Hx = oracle::hexagon_rows(1.0);
  const auto U = AdmissibleSet::from_matrix(Hx);
  std::vector<Vec> seen = default_seeds(U);
  auto s = init_seed(U, seen);
  for (int k = 0; k < 60; ++k) {
    const Vec u = 0.6 * oracle::sample_in(Hx, 1.2, rng);
    const auto prev_vertices = to_vertices(s);
    const double prev_area = area(s);
    s = recursive_update(s, u);
    seen.push_back(u);
    const auto P = to_polytope(s);
    for (const auto& v : prev_vertices.vertices) CHECK(reachplan::geometry::contains(P, v, 1e-9));
    CHECK(area(s) >= prev_area - 1e-12);
    for (const auto& v : to_vertices(s).vertices) CHECK(U.contains(v, 1e-9));
    CHECK((s.theta.array() <= s.rho + 1e-9).all());
  }
  for (const auto& u : seen) CHECK(reachplan::geometry::contains(to_polytope(s), u, 1e-9));
  CHECK(batch_learn(U, seen).objective <= s.objective + 1e-9);
}

TEST_CASE("setlearn: moving horizon") {
  InfoSet info(3);
  std::vector<Vec> stream{v2(0.9, 0.9), v2(-0.8, 0.1), v2(0.1, 0.1), v2(0.2, 0.0), v2(0.15, 0.2)};
  for (const auto& u : stream) info.push(u);
  CHECK(info.size() == 3);
  const auto mh = moving_horizon_learn(unit_box(), info);
  const std::vector<Vec> last(stream.end() - 3, stream.end());
  const auto ref = batch_learn(unit_box(), last);
  CHECK(mh.objective == doctest::Approx(ref.objective));
  CHECK(area(mh) < area(batch_learn(unit_box(), stream)));

  InfoSet same(4);
  for (int k = 0; k < 6; ++k) same.push(v2(0.3, -0.1));
  const auto V = to_vertices(moving_horizon_learn(unit_box(), same));
  REQUIRE(V.size() == 1);
  CHECK((V.vertices[0] - v2(0.3, -0.1)).norm() <= 1e-9);
}

TEST_CASE("setlearn: polytope conversions and seeds") {
  LearnedSet full{unit_box().H, Vec::Ones(4), Vec::Zero(2), 1.0, 0.0};
  CHECK(box_equals(full, -1, 1, -1, 1));
  LearnedSet zero{unit_box().H, Vec::Zero(4), Vec::Zero(2), 0.0, 0.0};
  CHECK(to_vertices(zero).size() == 1);

  const auto seeds = default_seeds(unit_box());
  CHECK(seeds.size() == 4);
  CHECK(area(init_seed(unit_box(), seeds)) <= 0.02 * 0.02 + 1e-12);
  CHECK(to_vertices(init_seed(unit_box(), std::vector<Vec>{v2(0, 0)})).size() == 1);
  const std::vector<Vec> corners{v2(1, 1), v2(-1, 1), v2(-1, -1), v2(1, -1)};
  CHECK(box_equals(init_seed(unit_box(), corners), -1, 1, -1, 1));

  LearnedSet half{unit_box().H, Vec::Constant(4, 0.2), v2(0.1, 0.2), 0.5, 0.0};
  REQUIRE(half.center_parameter().has_value());
  CHECK(half.center_parameter()->isApprox(v2(0.2, 0.4)));
}

TEST_CASE("setlearn: hexagon batch matches oracle") {
  std::mt19937_64 rng(33);
  const Mat H = oracle::hexagon_rows(0.8);
  const auto U = AdmissibleSet::from_matrix(H);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec> us;
    for (int k = 0; k < 3 + trial * 2; ++k) us.push_back(0.5 * oracle::sample_in(H, 1.0, rng));
    const auto s = batch_learn(U, us);
    CHECK(s.objective == doctest::Approx(oracle::learning_lp_min(H, cover_vector(H, us))).epsilon(1e-9));
  }
}
