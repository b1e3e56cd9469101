#include "reachplan/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "reachplan/error.hpp"
#include "reachplan/reach.hpp"

namespace reachplan::sim {

const char* to_string(SvControllerKind k) {
  switch (k) {
    case SvControllerKind::Tracker: return "tracker";
    case SvControllerKind::Planner: return "planner";
  }
  return "unknown";
}

namespace {

constexpr double kHeadingSpeed = 1e-3;

bool inside(const HPolytope& D, double x, double y) { return geometry::contains(D, Vec(Point2(x, y)), 1e-9); }

planner::PlannerConfig nested_config(const SvSpec& spec, const Scenario& scn) {
  planner::PlannerConfig cfg = scn.planner;
  cfg.ref = spec.ref;
  cfg.ego.length = spec.length;
  cfg.ego.width = spec.width;
  return cfg;
}

}  // namespace

void Scenario::validate() const {
  planner.validate();
  if (!(duration > 0)) throw Error(ErrorCode::Config, "scenario: duration must be positive");
  if (!(success_radius > 0)) throw Error(ErrorCode::Config, "scenario: success radius must be positive");
  if (!samplers.empty() && samplers.size() != svs.size()) {
    throw Error(ErrorCode::Config, "scenario: need one sampler per SV");
  }
  if (!inside(planner.D, ego0.px, ego0.py)) throw Error(ErrorCode::Config, "scenario: EV initial position outside D");
  for (const auto& sv : svs) {
    if (sv.admissible.dim() != 2) throw Error(ErrorCode::Config, "scenario: SV admissible set must be planar");
    if (sv.hidden.size() == 0 || sv.hidden.dim() != 2) throw Error(ErrorCode::Config, "scenario: SV hidden set must be planar");
    for (const auto& v : sv.hidden.vertices) {
      if (!sv.admissible.contains(v, 1e-9)) throw Error(ErrorCode::Config, "scenario: hidden set not inside admissible set");
    }
    if (!(sv.length >= 0 && sv.width >= 0)) throw Error(ErrorCode::Config, "scenario: SV dimensions");
    if (!inside(planner.D, sv.x, sv.y)) throw Error(ErrorCode::Config, "scenario: SV initial position outside D");
  }
}

SvState sv_initial_state(const SvSpec& spec) {
  SvState s;
  s.x << spec.x, spec.v * std::cos(spec.phi), spec.y, spec.v * std::sin(spec.phi);
  s.heading = spec.phi;
  if (spec.controller == SvControllerKind::Planner) s.body = vehicle::EgoState{spec.x, spec.y, spec.phi, spec.v, 0.0};
  return s;
}

SvAgent make_agent(const SvSpec& spec, const Scenario& scn) {
  SvAgent a;
  a.state = sv_initial_state(spec);
  if (spec.controller == SvControllerKind::Planner) a.nested.emplace(nested_config(spec, scn));
  return a;
}

vehicle::SvObservation observe(const SvState& s, long step) {
  vehicle::SvObservation o;
  o.position = Point2(s.x(0), s.x(2));
  o.velocity = Point2(s.x(1), s.x(3));
  o.heading = s.heading;
  o.step = step;
  return o;
}

Point2 sv_step(SvAgent& agent, const SvSpec& spec, double T, std::mt19937_64& rng) {
  SvState& s = agent.state;
  const Point2 v0(s.x(1), s.x(3));
  Point2 applied;
  if (agent.nested) {
    const auto& p = agent.nested->config().ego;
    const auto r = agent.nested->plan_step(*s.body, {});
    const auto next = vehicle::ego_step_rk4(*s.body, r.inputs.front(), p);
    const Point2 v1 = vehicle::ground_velocity(next, r.inputs.front().delta, p);
    s.body = next;
    s.x << next.px, v1(0), next.py, v1(1);
    s.heading = next.phi;
    applied = (v1 - v0) / T;
  } else {
    std::normal_distribution<double> noise(0.0, 1.0);
    const Point2 p(s.x(0), s.x(2));
    Point2 a = spec.kp * (Point2(spec.ref.x, spec.ref.y) - p) - spec.kd * v0;
    const double n0 = noise(rng);
    const double n1 = noise(rng);
    a += spec.noise_std * Point2(n0, n1);
    applied = geometry::closest_point_2d(spec.hidden, a);
    const auto [A, B] = vehicle::sv_matrices(T);
    s.x = A * s.x + B * applied;
    const Point2 v1(s.x(1), s.x(3));
    if (v1.norm() > kHeadingSpeed) s.heading = std::atan2(v1(1), v1(0));
  }
  return applied;
}

VPolytope footprint(double x, double y, double heading, double length, double width) {
  if (length <= 0.0 || width <= 0.0) return geometry::point_set(Vec(Point2(x, y)));
  return geometry::oriented_rectangle(Point2(x, y), length, width, heading);
}

Trace run_closed_loop(const Scenario& scn) {
  scn.validate();
  const auto& cfg = scn.planner;
  const auto& ep = cfg.ego;
  const double T = ep.T;
  const int K = static_cast<int>(std::llround(scn.duration / T));

  planner::Planner ev(cfg);
  std::mt19937_64 rng(scn.seed);
  std::vector<SvAgent> agents;
  std::vector<setlearn::LearnedSet> learned;
  std::vector<double> d_min;
  std::vector<VPolytope> admissible_vertices;
  for (const auto& sv : scn.svs) {
    agents.push_back(make_agent(sv, scn));
    const auto seeds = setlearn::default_seeds(sv.admissible, sv.seed_fraction);
    learned.push_back(setlearn::init_seed(sv.admissible, seeds));
    d_min.push_back(planner::compute_d_min(ep.length, ep.width, sv.length, sv.width));
    admissible_vertices.push_back(geometry::vertices_2d(sv.admissible.polytope()));
  }
  std::vector<vehicle::SvObservation> prev_obs;
  for (const auto& a : agents) prev_obs.push_back(observe(a.state, 0));

  Trace trace;
  trace.T = T;
  trace.seed = scn.seed;
  trace.mode = planner::to_string(cfg.mode);
  vehicle::EgoState ego = scn.ego0;

  for (int k = 0;; ++k) {
    TraceRow row;
    row.step = k;
    row.t = k * T;
    row.ego = ego;
    const VPolytope ego_fp = footprint(ego.px, ego.py, ego.phi, ep.length, ep.width);
    bool collided = false;
    for (std::size_t s = 0; s < agents.size(); ++s) {
      const auto obs = observe(agents[s].state, k);
      if (k > 0) {
        Point2 u = vehicle::estimate_sv_input(prev_obs[s], obs, T);
        if (!scn.svs[s].admissible.contains(u, 1e-9)) u = geometry::closest_point_2d(admissible_vertices[s], u);
        learned[s] = setlearn::recursive_update(learned[s], u);
      }
      prev_obs[s] = obs;
      const auto& st = agents[s].state;
      row.svs.push_back(st);
      row.rho.push_back(learned[s].rho);
      row.area.push_back(setlearn::area(learned[s]));
      const double c = geometry::distance_2d(
          ego_fp, footprint(st.x(0), st.x(2), st.heading, scn.svs[s].length, scn.svs[s].width));
      row.clearance.push_back(c);
      if (c <= 0.0) collided = true;
    }
    row.d_ref = std::hypot(ego.px - cfg.ref.x, ego.py - cfg.ref.y);
    row.in_D = inside(cfg.D, ego.px, ego.py);

    if (collided || !row.in_D || row.d_ref <= scn.success_radius || k >= K) {
      trace.rows.push_back(std::move(row));
      break;
    }

    std::vector<planner::ObstacleTrack> tracks;
    for (std::size_t s = 0; s < agents.size(); ++s) {
      planner::ObstacleTrack t;
      t.state = agents[s].state.x;
      t.admissible = scn.svs[s].admissible;
      t.learned = learned[s];
      t.d_min = d_min[s];
      tracks.push_back(std::move(t));
    }
    const auto plan = ev.plan_step(ego, tracks);
    row.planned = true;
    row.input = plan.inputs.front();
    row.stage_cost = plan.cost;
    row.status = plan.status;
    row.iterations = plan.iterations;
    row.kkt = plan.kkt;
    ++trace.solves;
    if (!plan.converged()) ++trace.non_converged;
    if (scn.record_polytopes) {
      for (const auto& tube : ev.last_tubes()) row.occupancy.push_back(tube.O);
    }
    trace.rows.push_back(std::move(row));

    ego = vehicle::ego_step_rk4(ego, plan.inputs.front(), ep);
    for (std::size_t s = 0; s < agents.size(); ++s) sv_step(agents[s], scn.svs[s], T, rng);
  }
  return trace;
}

Metrics evaluate(const Trace& trace, const Scenario& scn) {
  Metrics m;
  m.min_clearance = std::numeric_limits<double>::infinity();
  m.solves = trace.solves;
  m.non_converged = trace.non_converged;
  for (const auto& r : trace.rows) {
    if (!r.in_D) m.collision_free = false;
    for (double c : r.clearance) {
      m.min_clearance = std::min(m.min_clearance, c);
      if (c <= 0.0) m.collision_free = false;
    }
    if (!m.tau_ref && r.d_ref <= scn.success_radius) m.tau_ref = r.t;
    if (r.planned) m.cost_sum += r.stage_cost;
  }
  m.complete = m.collision_free && m.tau_ref && *m.tau_ref <= scn.duration + 1e-9;
  return m;
}

Scenario sample_run(const Scenario& base, int k) {
  Scenario s = base;
  s.seed = base.seed + static_cast<std::uint64_t>(k);
  std::mt19937_64 rng(s.seed ^ 0x9E3779B97F4A7C15ULL);
  for (std::size_t i = 0; i < s.samplers.size(); ++i) {
    const auto& sm = s.samplers[i];
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_real_distribution<double> P(0.0, 1.0);
    const double ux = U(rng);
    const double uy = U(rng);
    const double up = P(rng);
    s.svs[i].x = sm.center(0) + sm.half_extent(0) * ux;
    s.svs[i].y = sm.center(1) + sm.half_extent(1) * uy;
    s.svs[i].phi = sm.phi_min + (sm.phi_max - sm.phi_min) * up;
  }
  return s;
}

int default_threads() {
  if (const char* env = std::getenv("REACHPLAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ModeSummary summarize(planner::Mode mode, const std::vector<Metrics>& runs) {
  ModeSummary s;
  s.mode = mode;
  s.runs = static_cast<int>(runs.size());
  if (runs.empty()) return s;
  int cf = 0;
  int done = 0;
  double tau_sum = 0.0;
  double clr_sum = 0.0;
  double cost_sum = 0.0;
  s.min_min_clearance = std::numeric_limits<double>::infinity();
  s.max_cost = -std::numeric_limits<double>::infinity();
  for (const auto& m : runs) {
    cf += m.collision_free;
    clr_sum += m.min_clearance;
    s.min_min_clearance = std::min(s.min_min_clearance, m.min_clearance);
    cost_sum += m.cost_sum;
    s.max_cost = std::max(s.max_cost, m.cost_sum);
    if (m.complete) {
      ++done;
      tau_sum += *m.tau_ref;
      s.max_tau = std::max(s.max_tau.value_or(0.0), *m.tau_ref);
    }
  }
  const double n = static_cast<double>(runs.size());
  s.collision_free_rate = cf / n;
  s.complete_rate = done / n;
  s.mean_min_clearance = clr_sum / n;
  s.mean_cost = cost_sum / n;
  if (done) s.mean_tau = tau_sum / done;
  return s;
}

MonteCarloResult monte_carlo(const Scenario& base, int n, const std::vector<planner::Mode>& modes, int threads) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "monte_carlo: n must be at least 1");
  if (modes.empty()) throw Error(ErrorCode::InvalidArgument, "monte_carlo: no modes");
  const std::size_t jobs = static_cast<std::size_t>(n) * modes.size();
  MonteCarloResult out;
  out.runs.resize(jobs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        const int k = static_cast<int>(j / modes.size());
        const auto mode = modes[j % modes.size()];
        Scenario s = sample_run(base, k);
        s.planner.mode = mode;
        const Trace tr = run_closed_loop(s);
        out.runs[j] = RunRecord{k, s.seed, mode, evaluate(tr, s)};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = jobs;
        return;
      }
    }
  };
  const int workers = std::max(1, std::min<int>(threads > 0 ? threads : default_threads(), static_cast<int>(jobs)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto mode : modes) {
    std::vector<Metrics> ms;
    for (const auto& r : out.runs) {
      if (r.mode == mode) ms.push_back(r.metrics);
    }
    out.summary.push_back(summarize(mode, ms));
  }
  return out;
}

Scenario reach_avoid_scenario() {
  Scenario s;
  s.ego0 = vehicle::EgoState{0.2, 0.2, 0.0, 0.0, 0.0};
  s.planner.ref = planner::Reference{7.0, 5.5, 0.0, 0.0};
  s.planner.D = geometry::box(Vec(Point2(0.0, 0.0)), Vec(Point2(7.5, 7.5)));
  SvSpec sv;
  sv.x = 6.25;
  sv.y = 1.2;
  sv.phi = -std::numbers::pi / 4;
  sv.v = 0.0;
  sv.ref = planner::Reference{1.0, 6.75, std::numbers::pi, 0.0};
  sv.admissible = setlearn::AdmissibleSet::box(Vec(Point2(0.5, 0.5)));
  sv.hidden = geometry::vertices_2d(geometry::box(Vec(Point2(-0.2, -0.2)), Vec(Point2(0.2, 0.2))));
  sv.noise_std = 0.05;
  s.svs.push_back(sv);
  SvSampler sm;
  sm.center = Point2(6.25, 1.2);
  sm.half_extent = Point2(0.5, 0.5);
  sm.phi_min = -std::numbers::pi / 4 - 0.3;
  sm.phi_max = -std::numbers::pi / 4 + 0.3;
  s.samplers.push_back(sm);
  return s;
}

}  // namespace reachplan::sim
