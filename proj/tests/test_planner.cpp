#include <chrono>
#include <random>

#include "doctest.h"
#include "reachplan/error.hpp"
#include "reachplan/geometry.hpp"
#include "reachplan/planner.hpp"

using namespace reachplan::planner;
using reachplan::geometry::Point2;
namespace geo = reachplan::geometry;

namespace {

PlannerConfig open_field(Reference ref) {
  PlannerConfig cfg;
  cfg.ref = ref;
  cfg.D = geo::box(Vec(Point2(-20, -20)), Vec(Point2(20, 20)));
  return cfg;
}

ObstacleOccupancy static_point(Point2 c, int N, double d_min) {
  ObstacleOccupancy o;
  o.d_min = d_min;
  for (int i = 0; i < N; ++i) o.steps.push_back(geo::hrep_from_vertices_2d_inflated(geo::point_set(Vec(c))));
  return o;
}

void check_dynamics(const PlanResult& r, const PlannerConfig& cfg) {
  for (std::size_t i = 0; i + 1 < r.states.size(); ++i) {
    const auto next = reachplan::vehicle::ego_step_rk4(r.states[i], r.inputs[i], cfg.ego);
    CHECK((next.vec() - r.states[i + 1].vec()).norm() <= 1e-6);
  }
}

}  // namespace

TEST_CASE("planner: d_min") {
  CHECK(compute_d_min(0.26, 0.25, 0.36, 0.23) == doctest::Approx(0.39395).epsilon(1e-5 / 0.39395));
  CHECK(compute_d_min(2, 2, 0, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(compute_d_min(0, 0, 0, 0) == 0.0);
  CHECK_THROWS_AS(compute_d_min(-1, 0, 0, 0), reachplan::Error);
}

TEST_CASE("planner: modes parse") {
  CHECK(mode_from_string("rmpc") == Mode::Rmpc);
  CHECK(std::string(to_string(Mode::Dmpc)) == "dmpc");
  CHECK_THROWS_AS(mode_from_string("fast"), reachplan::Error);
}

TEST_CASE("planner: stationary optimum without obstacles") {
  const auto cfg = open_field({1, 2, 0, 0});
  EgoState x0{1, 2, 0, 0, 0};
  const auto r = build_and_solve(x0, {}, cfg);
  CHECK(r.converged());
  CHECK(r.cost <= 1e-6);
  for (const auto& u : r.inputs) CHECK(std::abs(u.delta) + std::abs(u.eta) <= 1e-6);
}

TEST_CASE("planner: drives toward the reference") {
  const auto cfg = open_field({3, 0.5, 0, 0});
  const auto r = build_and_solve(EgoState{0, 0, 0, 0, 0}, {}, cfg);
  CHECK(r.converged());
  check_dynamics(r, cfg);
  CHECK(r.states.back().px > 0.2);
  CHECK(r.cost == doctest::Approx(plan_cost(r, cfg)).epsilon(1e-9));
  for (std::size_t i = 1; i < r.states.size(); ++i) {
    CHECK(r.states[i].v <= cfg.ego.v_max + 1e-6);
    CHECK(std::abs(r.states[i].a) <= cfg.ego.a_max + 1e-6);
  }
}

TEST_CASE("planner: avoids a static obstacle on the path") {
  auto cfg = open_field({4, 0, 0, 1});
  SUBCASE("structured") { cfg.hessian = reachplan::nlp::HessianMode::Structured; }
  SUBCASE("bfgs") { cfg.hessian = reachplan::nlp::HessianMode::Bfgs; }
  const double d_min = compute_d_min(0.26, 0.25, 0.36, 0.23);
  const Point2 c(1.6, 0.05);
  const EgoState x0{0, 0, 0, 1, 0};
  const auto free = build_and_solve(x0, {}, cfg);
  const auto r = build_and_solve(x0, {static_point(c, cfg.N, d_min)}, cfg);
  CHECK(r.converged());
  check_dynamics(r, cfg);
  double eps_max = 0.0;
  for (double e : r.slacks[0]) {
    CHECK(e >= -1e-9);
    CHECK(e <= d_min + 1e-9);
    eps_max = std::max(eps_max, e);
  }
  const auto obs = geo::point_set(Vec(c));
  for (std::size_t i = 1; i < r.states.size(); ++i) {
    const auto p = geo::point_set(Vec(Point2(r.states[i].px, r.states[i].py)));
    CHECK(geo::distance_2d(p, obs) >= d_min - eps_max - 2e-6);
  }
  CHECK(r.cost >= free.cost - 1e-9);
  for (std::size_t i = 0; i < r.lambdas[0].size(); ++i) {
    const Vec w = static_point(c, 1, d_min).steps[0].H.transpose() * r.lambdas[0][i];
    CHECK(std::abs(w.norm() - 1.0) <= 1e-6);
  }
}

TEST_CASE("planner: dual bound never exceeds the true distance") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(-3, 3);
  std::uniform_real_distribution<double> W(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point2> pts;
    for (int k = 0; k < 6; ++k) pts.emplace_back(U(rng) / 3, U(rng) / 3);
    const auto V = geo::hull_2d(pts);
    const auto P = geo::hrep_from_vertices_2d(V);
    const Point2 p(U(rng), U(rng));
    Vec lam = Vec::NullaryExpr(P.rows(), [&] { return W(rng); });
    lam /= (P.H.transpose() * lam).norm();
    const double bound = (P.H * p - P.b).dot(lam);
    const double sd = geo::signed_distance_2d(V, p);
    CHECK(bound <= std::max(sd, 0.0) + 1e-9);
    if (sd > 1e-6) {
      // Optimal dual: the outward normal cone at the closest point.
      const Point2 q = geo::closest_point_2d(V, p);
      const Eigen::Vector2d e = (p - q).normalized();
      double best = -1e9;
      for (Eigen::Index j = 0; j < P.rows(); ++j) {
        for (Eigen::Index k = j; k < P.rows(); ++k) {
          Eigen::Matrix2d M;
          M.col(0) = P.H.row(j).transpose();
          M.col(1) = P.H.row(k).transpose();
          Vec l = Vec::Zero(P.rows());
          if (j == k) {
            if ((M.col(0) - e).norm() > 1e-9) continue;
            l(j) = 1;
          } else {
            if (std::abs(M.determinant()) < 1e-12) continue;
            const Eigen::Vector2d t = M.partialPivLu().solve(e);
            if ((t.array() < 0).any()) continue;
            l(j) = t(0);
            l(k) = t(1);
          }
          best = std::max(best, (P.H * p - P.b).dot(l));
        }
      }
      CHECK(best == doctest::Approx(sd).epsilon(1e-9));
    }
  }
}

TEST_CASE("planner: occupancy ordering across modes and determinism") {
  PlannerConfig cfg = open_field({5, 0, 0, 0});
  ObstacleTrack t;
  t.state = Eigen::Vector4d(2.5, 0, 0.8, -0.3);
  t.admissible = reachplan::setlearn::AdmissibleSet::box(Vec(Point2(1, 1)));
  std::vector<Vec> seeds{Vec(Point2(0.1, 0.1)), Vec(Point2(-0.1, -0.1)), Vec(Point2(0.2, -0.1))};
  t.learned = reachplan::setlearn::batch_learn(t.admissible, seeds);
  t.d_min = compute_d_min(0.26, 0.25, 0.36, 0.23);

  std::vector<std::vector<reachplan::reach::ReachTube>> tubes;
  std::vector<double> clearance;
  const EgoState x0{0, 0, 0, 0.5, 0};
  for (Mode m : {Mode::Rmpc, Mode::Proposed, Mode::Dmpc}) {
    cfg.mode = m;
    Planner planner(cfg);
    const auto r = planner.plan_step(x0, {t});
    tubes.push_back(planner.last_tubes());
    double c = 1e9;
    for (int i = 1; i <= cfg.N; ++i) {
      const Point2 nominal(t.state(0) + i * 0.25 * t.state(1), t.state(2) + i * 0.25 * t.state(3));
      c = std::min(c, (Point2(r.states[static_cast<std::size_t>(i)].px, r.states[static_cast<std::size_t>(i)].py) - nominal).norm());
    }
    clearance.push_back(c);
    Planner again(cfg);
    const auto r2 = again.plan_step(x0, {t});
    CHECK(r2.cost == r.cost);
    CHECK(r2.inputs.back().eta == r.inputs.back().eta);
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.N); ++i) {
    for (const auto& v : tubes[2][0].O[i].vertices) CHECK(geo::contains(tubes[1][0].O[i], v, 1e-9));
    for (const auto& v : tubes[1][0].O[i].vertices) CHECK(geo::contains(tubes[0][0].O[i], v, 1e-9));
  }
  CHECK(tubes[2][0].O[0].size() == 1);
  CHECK(clearance[0] >= clearance[1] - 1e-6);
  CHECK(clearance[1] >= clearance[2] - 1e-6);
}
