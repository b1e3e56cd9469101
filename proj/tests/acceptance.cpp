// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
// Usage: acceptance [path-to-reachplan-cli] [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "reachplan/demos.hpp"
#include "reachplan/geometry.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/setlearn.hpp"
#include "reachplan/sim.hpp"

namespace fs = std::filesystem;
using namespace reachplan;
using geometry::Mat;
using geometry::Point2;
using geometry::Vec;
using geometry::VPolytope;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<oracle::P2> pts(const VPolytope& V) {
  std::vector<oracle::P2> out;
  for (const auto& v : V.vertices) out.emplace_back(v(0), v(1));
  return out;
}

std::vector<Point2> random_cloud(std::mt19937_64& rng, int n, double r, Point2 c) {
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<Point2> p;
  while (static_cast<int>(p.size()) < n) {
    Point2 q(U(rng), U(rng));
    if (q.norm() <= 1) p.push_back(c + r * q);
  }
  return p;
}

setlearn::AdmissibleSet random_admissible(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  switch (rng() % 3) {
    case 0: return setlearn::AdmissibleSet::box(Vec(Point2(0.2 + 2.0 * U(rng), 0.2 + 2.0 * U(rng))));
    case 1: return setlearn::AdmissibleSet::regular_polygon(6, 0.2 + 2.0 * U(rng), std::numbers::pi * U(rng));
    default: return setlearn::AdmissibleSet::regular_polygon(3 + static_cast<int>(rng() % 8), 0.2 + 2.0 * U(rng), U(rng));
  }
}

double bounding_radius(const setlearn::AdmissibleSet& U) {
  double r = 0.0;
  for (const auto& v : geometry::vertices_2d(U.polytope()).vertices) r = std::max(r, v.norm());
  return r;
}

Vec cover_vector(const Mat& H, const std::vector<Vec>& us) {
  Vec m = Vec::Constant(H.rows(), -std::numeric_limits<double>::infinity());
  for (const auto& u : us) m = m.cwiseMax(H * u);
  return m;
}

double max_excess(const Mat& H, const VPolytope& V) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& v : V.vertices) worst = std::max(worst, (H * v).maxCoeff() - 1.0);
  return worst;
}

// 1. Parameterized sets with θ ≤ ρ1 and y = (1-ρ)v, v ∈ U, stay inside U.
Outcome parameterized_subset() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> P(0.0, 1.0);
  double worst = -1.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto U = random_admissible(rng);
    setlearn::LearnedSet s;
    s.H = U.H;
    s.rho = P(rng);
    const Vec v = oracle::sample_in(U.H, bounding_radius(U), rng);
    s.y = (1.0 - s.rho) * v;
    // Some rows sit exactly on the bound θ_j = ρ.
    s.theta = Vec::NullaryExpr(U.H.rows(), [&] { return P(rng) < 0.3 ? s.rho : s.rho * P(rng); });
    worst = std::max(worst, max_excess(U.H, setlearn::to_vertices(s)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0,
          "max(Hu)-1 = " + fmt("%.3g", worst) + ", " + fmt("%.2f s", secs)};
}

// 2. Batch learning against the vertex-enumeration oracle.
Outcome batch_vs_oracle() {
  std::mt19937_64 rng(202);
  double obj_err = 0.0;
  double outside = -1.0;
  double missed = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto U = trial % 2 ? setlearn::AdmissibleSet::regular_polygon(6, 1.0)
                             : setlearn::AdmissibleSet::box(Vec(Point2(1.0, 0.7)));
    const int n = 3 + static_cast<int>(rng() % 28);
    // Samples from a random sub-polygon so that the learned set is non-trivial.
    const Point2 c = oracle::sample_in(U.H, 1.0, rng) * 0.5;
    std::vector<Vec> us;
    while (static_cast<int>(us.size()) < n) {
      const Vec u = Vec(c) + 0.4 * oracle::sample_in(U.H, 1.0, rng);
      if (U.contains(u, 0.0)) us.push_back(u);
    }
    const auto s = setlearn::batch_learn(U, us);
    const auto Hs = setlearn::to_polytope(s);
    for (const auto& u : us) missed = std::max(missed, (Hs.H * u - Hs.b).maxCoeff());
    outside = std::max(outside, max_excess(U.H, setlearn::to_vertices(s)));
    obj_err = std::max(obj_err, std::abs(s.objective - oracle::learning_lp_min(U.H, cover_vector(U.H, us))));
  }
  return {obj_err <= 1e-7 && missed <= 1e-9 && outside <= 1e-9,
          "objective error " + fmt("%.3g", obj_err) + ", sample violation " + fmt("%.3g", missed) +
              ", U excess " + fmt("%.3g", outside)};
}

double median_update_seconds(const setlearn::LearnedSet& s, const std::vector<Vec>& probes) {
  std::vector<double> t;
  for (int rep = 0; rep < 5; ++rep) {
    for (const auto& u : probes) {
      const auto t0 = Clock::now();
      const auto r = setlearn::recursive_update(s, u);
      t.push_back(seconds_since(t0));
      if (r.rho < -1.0) std::abort();
    }
  }
  std::nth_element(t.begin(), t.begin() + static_cast<long>(t.size() / 2), t.end());
  return t[t.size() / 2];
}

// 3. Recursive learning over a 500-sample stream.
Outcome recursion_soundness() {
  std::mt19937_64 rng(303);
  const auto U = setlearn::AdmissibleSet::regular_polygon(6, 1.0);
  const auto hidden = demos::default_hidden_set();
  std::vector<Vec> stream;
  for (int k = 0; k < 500; ++k) {
    // Behaviour widens in stages so that the set keeps growing.
    const double scale = 0.25 + 0.75 * std::min(1.0, k / 300.0);
    stream.emplace_back(scale * demos::sample_uniform(hidden, rng));
  }
  const auto seeds = setlearn::default_seeds(U);
  auto s = setlearn::init_seed(U, seeds);
  std::vector<Vec> past(seeds.begin(), seeds.end());
  double sample_viol = 0.0;
  double vertex_viol = 0.0;
  double gap = 0.0;
  setlearn::LearnedSet at50;
  setlearn::LearnedSet at500;
  for (int k = 0; k < 500; ++k) {
    const auto prev_vertices = setlearn::to_vertices(s);
    if (k == 49) at50 = s;
    if (k == 499) at500 = s;
    s = setlearn::recursive_update(s, stream[static_cast<std::size_t>(k)]);
    past.push_back(stream[static_cast<std::size_t>(k)]);
    const auto P = setlearn::to_polytope(s);
    for (const auto& v : prev_vertices.vertices) vertex_viol = std::max(vertex_viol, (P.H * v - P.b).maxCoeff());
    for (const auto& u : past) sample_viol = std::max(sample_viol, (P.H * u - P.b).maxCoeff());
    if ((k + 1) % 50 == 0) {
      const auto b = setlearn::batch_learn(U, past);
      gap = std::max(gap, b.objective - s.objective);
    }
  }
  std::vector<Vec> probes;
  for (int i = 0; i < 40; ++i) probes.emplace_back(demos::sample_uniform(hidden, rng));
  const double t50 = median_update_seconds(at50, probes);
  const double t500 = median_update_seconds(at500, probes);
  const bool ok = sample_viol <= 1e-9 && vertex_viol <= 1e-9 && gap <= 1e-9 && t500 <= 2.0 * t50;
  return {ok, "sample violation " + fmt("%.3g", sample_viol) + ", vertex violation " + fmt("%.3g", vertex_viol) +
                  ", batch-recursive " + fmt("%.3g", gap) + ", step500/step50 time " + fmt("%.2f", t500 / t50)};
}

// 4. Area growth after the mild-to-aggressive switch.
Outcome responsiveness() {
  demos::LearnDemoConfig cfg;
  const auto r = demos::learn_demo(cfg);
  const std::size_t first = static_cast<std::size_t>(cfg.switch_step);  // 0-based index of step switch_step+1
  const double before = r.rows[first - 1].recursive_area;
  double best = 0.0;
  int at = -1;
  for (std::size_t k = first; k < std::min(r.rows.size(), first + 3); ++k) {
    if (r.rows[k].recursive_area > best) {
      best = r.rows[k].recursive_area;
      if (at < 0 && best >= 1.5 * before) at = static_cast<int>(k - first + 1);
    }
  }
  const double ratio = best / before;
  return {ratio >= 1.5, "area " + fmt("%.4g", before) + " -> " + fmt("%.4g", best) + " (x" + fmt("%.2f", ratio) +
                            "), threshold reached after " + std::to_string(at) + " step(s)"};
}

// 5. Occupancy coverage of nonlinear rollouts.
Outcome coverage() {
  demos::ReachDemoConfig cfg;
  cfg.rollouts = 200;
  cfg.horizon = 10;
  cfg.warmup = 100;
  cfg.vehicle.T = 0.25;
  const auto r = demos::reach_demo(cfg);
  return {r.coverage >= 0.95, "coverage " + fmt("%.3f", r.coverage)};
}

// 6. Safety distance for the default vehicle dimensions.
Outcome safety_distance() {
  const vehicle::EgoParams ego;
  const sim::SvSpec sv;
  const double d = planner::compute_d_min(ego.length, ego.width, sv.length, sv.width);
  return {std::abs(d - 0.39395) <= 1e-5, "d_min = " + fmt("%.6f", d)};
}

// 7. Single reach-avoid case across the three modes.
Outcome single_case() {
  double clr[3];
  sim::Metrics prop;
  const planner::Mode modes[3] = {planner::Mode::Proposed, planner::Mode::Rmpc, planner::Mode::Dmpc};
  for (int i = 0; i < 3; ++i) {
    auto s = sim::reach_avoid_scenario();
    s.planner.mode = modes[i];
    const auto m = sim::evaluate(sim::run_closed_loop(s), s);
    clr[i] = m.min_clearance;
    if (i == 0) prop = m;
  }
  const bool ok = prop.collision_free && clr[0] >= 0.05 && prop.tau_ref && *prop.tau_ref <= 13.75 &&
                  clr[1] >= clr[0] && clr[2] <= clr[0];
  return {ok, "clearance proposed/rmpc/dmpc " + fmt("%.3f", clr[0]) + "/" + fmt("%.3f", clr[1]) + "/" +
                  fmt("%.3f", clr[2]) + ", tau_ref " + (prop.tau_ref ? fmt("%.2f", *prop.tau_ref) : "none")};
}

// 8. Monte-Carlo ordering of the three modes.
Outcome monte_carlo_ordering() {
  const auto t0 = Clock::now();
  const auto r = sim::monte_carlo(sim::reach_avoid_scenario(), 30,
                                  {planner::Mode::Proposed, planner::Mode::Rmpc, planner::Mode::Dmpc});
  const auto& p = r.summary[0];
  const auto& rm = r.summary[1];
  const auto& d = r.summary[2];
  const double one = 1.0 / 30.0 + 1e-12;
  const bool ok = p.collision_free_rate >= 1.0 - one && p.collision_free_rate + one >= rm.collision_free_rate &&
                  rm.collision_free_rate + one >= d.collision_free_rate && p.complete_rate >= 1.0 - one &&
                  p.complete_rate + one >= rm.complete_rate && rm.mean_cost >= p.mean_cost;
  std::ostringstream os;
  os << "collision-free " << fmt("%.3f", p.collision_free_rate) << "/" << fmt("%.3f", rm.collision_free_rate) << "/"
     << fmt("%.3f", d.collision_free_rate) << ", complete " << fmt("%.3f", p.complete_rate) << "/"
     << fmt("%.3f", rm.complete_rate) << "/" << fmt("%.3f", d.complete_rate) << ", mean cost "
     << fmt("%.1f", p.mean_cost) << "/" << fmt("%.1f", rm.mean_cost) << "/" << fmt("%.1f", d.mean_cost) << ", "
     << fmt("%.0f s", seconds_since(t0));
  return {ok, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// 9. Byte-identical CSVs from repeated CLI invocations.
Outcome cli_determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty()) return {false, "CLI path not given"};
  struct Cmd {
    std::string name, args;
    std::vector<std::string> files;
  };
  const std::vector<Cmd> cmds{
      {"learn", "learn-demo --seed 5", {"learn.csv"}},
      {"reach", "reach-demo --seed 5", {"trajectories.csv", "occupancy.csv"}},
      {"run", "run --mode proposed --seed 5", {"trace.csv"}},
      {"mc", "monte-carlo --n 1 --modes proposed,dmpc --seed 5", {"summary.csv", "runs.csv"}}};
  int compared = 0;
  for (const auto& c : cmds) {
    std::string first[8];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = work / (c.name + std::to_string(rep));
      fs::remove_all(out);
      const std::string line = "\"" + cli + "\" " + c.args + " --out \"" + out.string() + "\" > /dev/null 2>&1";
      const int rc = std::system(line.c_str());
      if (rc != 0) return {false, c.name + ": exit status " + std::to_string(rc)};
      for (std::size_t f = 0; f < c.files.size(); ++f) {
        const std::string body = slurp(out / c.files[f]);
        if (body.empty()) return {false, c.name + ": missing " + c.files[f]};
        if (rep == 0) {
          first[f] = body;
        } else if (body != first[f]) {
          return {false, c.name + ": " + c.files[f] + " differs"};
        } else {
          ++compared;
        }
      }
    }
  }
  return {true, std::to_string(compared) + " CSV files identical across runs"};
}

// 10. Geometry operations against brute-force oracles.
Outcome geometry_oracles() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> U(-3, 3);
  std::normal_distribution<double> N;
  int bad_hull = 0, bad_sum = 0, bad_proj = 0, bad_dist = 0;
  double dist_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto cloud = random_cloud(rng, 5 + static_cast<int>(rng() % 60), 1.0, Point2(U(rng), U(rng)));
    std::vector<oracle::P2> op(cloud.begin(), cloud.end());
    if (!oracle::same_point_set(geometry::hull_2d(cloud).vertices, oracle::to_vecs(oracle::brute_hull(op)), 1e-6))
      ++bad_hull;

    const auto P = geometry::hull_2d(random_cloud(rng, 3 + static_cast<int>(rng() % 10), 1.0, Point2(U(rng), U(rng))));
    const auto Q = geometry::hull_2d(random_cloud(rng, 3 + static_cast<int>(rng() % 10), 1.0, Point2(U(rng), U(rng))));
    std::vector<oracle::P2> sums;
    for (const auto& p : P.vertices)
      for (const auto& q : Q.vertices) sums.emplace_back(p + q);
    if (!oracle::same_point_set(geometry::minkowski_sum(P, Q).vertices, oracle::to_vecs(oracle::brute_hull(sums)), 1e-6))
      ++bad_sum;

    std::vector<Vec> high;
    std::vector<oracle::P2> shadow;
    const int dim = 3 + static_cast<int>(rng() % 3);
    const int a = static_cast<int>(rng() % dim);
    const int b = (a + 1 + static_cast<int>(rng() % (dim - 1))) % dim;
    for (int k = 0; k < 25; ++k) {
      Vec x = Vec::NullaryExpr(dim, [&] { return N(rng); });
      high.push_back(x);
      shadow.emplace_back(x(a), x(b));
    }
    if (!oracle::same_point_set(geometry::project(VPolytope{high}, {a, b}).vertices,
                                oracle::to_vecs(oracle::brute_hull(shadow)), 1e-6))
      ++bad_proj;

    const double d = geometry::distance_2d(P, Q);
    const double e = std::abs(d - oracle::polygon_distance(pts(P), pts(Q)));
    dist_err = std::max(dist_err, e);
    if (e > 1e-6) ++bad_dist;
  }
  const bool ok = bad_hull + bad_sum + bad_proj + bad_dist == 0;
  return {ok, "mismatches hull/sum/projection/distance " + std::to_string(bad_hull) + "/" + std::to_string(bad_sum) +
                  "/" + std::to_string(bad_proj) + "/" + std::to_string(bad_dist) + ", max distance error " +
                  fmt("%.3g", dist_err)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "reachplan_acceptance";
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"parameterized sets stay inside the admissible set", parameterized_subset},
      {"batch learning matches the LP oracle", batch_vs_oracle},
      {"recursive learning soundness and step cost", recursion_soundness},
      {"responsiveness to an aggressive switch", responsiveness},
      {"occupancy coverage of nonlinear rollouts", coverage},
      {"safety distance", safety_distance},
      {"single reach-avoid case", single_case},
      {"Monte-Carlo ordering (n=30)", monte_carlo_ordering},
      {"CLI determinism", [&] { return cli_determinism(cli, work); }},
      {"geometry oracles", geometry_oracles},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
