#include "reachplan/demos.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "reachplan/error.hpp"
#include "reachplan/reach.hpp"

namespace reachplan::demos {

Point2 sample_uniform(const VPolytope& P, std::mt19937_64& rng) {
  if (P.size() == 0 || P.dim() != 2) throw Error(ErrorCode::InvalidArgument, "sample_uniform: need a planar polygon");
  if (P.size() < 3) return P.vertices.front();
  Point2 lo = P.vertices.front();
  Point2 hi = lo;
  for (const auto& v : P.vertices) {
    lo = lo.cwiseMin(Point2(v));
    hi = hi.cwiseMax(Point2(v));
  }
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const double a = U(rng);
    const double b = U(rng);
    const Point2 p(lo(0) + a * (hi(0) - lo(0)), lo(1) + b * (hi(1) - lo(1)));
    if (geometry::contains(P, Vec(p), 0.0)) return p;
  }
}

VPolytope default_hidden_set() {
  return geometry::hull_2d(std::vector<Point2>{Point2(0.7, 0.1), Point2(0.1, 0.6), Point2(-0.5, 0.2), Point2(-0.2, -0.6)});
}

std::vector<Vec> learn_demo_stream(const LearnDemoConfig& cfg) {
  if (!cfg.samples.empty()) return cfg.samples;
  if (cfg.steps < 1) throw Error(ErrorCode::EmptyInfoSet, "learn_demo: empty sample stream");
  const VPolytope aggressive = cfg.hidden.size() ? cfg.hidden : default_hidden_set();
  const VPolytope mild = geometry::scale(aggressive, cfg.mild_scale);
  std::mt19937_64 rng(cfg.seed);
  std::vector<Vec> out;
  for (int t = 1; t <= cfg.steps; ++t) out.emplace_back(sample_uniform(t <= cfg.switch_step ? mild : aggressive, rng));
  return out;
}

LearnDemoResult learn_demo(const LearnDemoConfig& cfg) {
  const auto stream = learn_demo_stream(cfg);
  if (stream.empty()) throw Error(ErrorCode::EmptyInfoSet, "learn_demo: empty sample stream");
  if (cfg.window < 1) throw Error(ErrorCode::InvalidArgument, "learn_demo: window must be positive");
  const auto seeds = setlearn::default_seeds(cfg.admissible, cfg.seed_fraction);

  LearnDemoResult res;
  std::vector<Vec> all(seeds.begin(), seeds.end());
  setlearn::LearnedSet rec = setlearn::init_seed(cfg.admissible, seeds);
  setlearn::InfoSet window(cfg.window);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const Vec& u = stream[k];
    all.push_back(u);
    window.push(u);
    const auto batch = setlearn::batch_learn(cfg.admissible, all);
    const auto t0 = std::chrono::steady_clock::now();
    rec = setlearn::recursive_update(rec, u);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto mh = setlearn::moving_horizon_learn(cfg.admissible, window);

    LearnDemoRow row;
    row.step = static_cast<int>(k) + 1;
    row.u = u;
    row.batch_area = setlearn::area(batch);
    row.batch_rho = batch.rho;
    row.batch_objective = batch.objective;
    row.recursive_area = setlearn::area(rec);
    row.recursive_rho = rec.rho;
    row.recursive_objective = rec.objective;
    row.window_area = setlearn::area(mh);
    row.window_rho = mh.rho;
    row.window_objective = mh.objective;
    row.recursive_seconds = dt;
    res.rows.push_back(std::move(row));
    if (k + 1 == stream.size()) res.final_batch = batch;
  }
  res.final_recursive = rec;
  return res;
}

namespace {

vehicle::EgoInput draw_input(const ReachDemoConfig& cfg, double v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(cfg.steer_range(0), cfg.steer_range(1));
  std::uniform_real_distribution<double> a(cfg.accel_range(0), cfg.accel_range(1));
  const double delta = d(rng);
  // Mild pull toward the initial speed keeps the speed bounded; still within the hidden box.
  const double acc = std::clamp(a(rng) + 0.5 * (cfg.x0.v - v), cfg.accel_range(0), cfg.accel_range(1));
  return {delta, acc};
}

}  // namespace

ReachDemoResult reach_demo(const ReachDemoConfig& cfg) {
  if (cfg.horizon < 1) throw Error(ErrorCode::InvalidArgument, "reach_demo: horizon must be at least 1");
  if (cfg.rollouts < 1 || cfg.warmup < 1) throw Error(ErrorCode::InvalidArgument, "reach_demo: need warm-up and rollouts");
  vehicle::EgoParams p = cfg.vehicle;
  p.kind = vehicle::EgoModelKind::Acceleration;
  const double T = p.T;
  std::mt19937_64 rng(cfg.seed);

  const VPolytope adm_vertices = geometry::vertices_2d(cfg.admissible.polytope());
  ReachDemoResult res;
  res.learned = setlearn::init_seed(cfg.admissible, setlearn::default_seeds(cfg.admissible));
  vehicle::EgoState x = cfg.x0;
  double last_delta = 0.0;
  Point2 vel = vehicle::ground_velocity(x, last_delta, p);
  for (int k = 0; k < cfg.warmup; ++k) {
    const auto u = draw_input(cfg, x.v, rng);
    x = vehicle::ego_step_rk4(x, u, p);
    const Point2 v1 = vehicle::ground_velocity(x, u.delta, p);
    Point2 acc = (v1 - vel) / T;
    if (!cfg.admissible.contains(acc, 1e-9)) acc = geometry::closest_point_2d(adm_vertices, acc);
    res.learned = setlearn::recursive_update(res.learned, acc);
    vel = v1;
    last_delta = u.delta;
  }
  res.start = x;

  const auto model = reach::LtvModel::double_integrator(T, cfg.horizon);
  const Vec s0 = Eigen::Vector4d(x.px, vel(0), x.py, vel(1));
  const auto tube = reach::forward_occupancy(model, s0, setlearn::to_vertices(res.learned), cfg.horizon, {false});
  res.occupancy = tube.O;

  int inside = 0;
  for (int r = 0; r < cfg.rollouts; ++r) {
    vehicle::EgoState y = x;
    std::vector<Point2> path{Point2(y.px, y.py)};
    for (int i = 0; i < cfg.horizon; ++i) {
      y = vehicle::ego_step_rk4(y, draw_input(cfg, y.v, rng), p);
      path.emplace_back(y.px, y.py);
    }
    if (geometry::contains(res.occupancy.back(), Vec(path.back()), 1e-9)) ++inside;
    res.trajectories.push_back(std::move(path));
  }
  res.coverage = static_cast<double>(inside) / cfg.rollouts;
  return res;
}

}  // namespace reachplan::demos
