#include "reachplan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include "reachplan/error.hpp"

namespace reachplan::io {

using geometry::HPolytope;
using geometry::Mat;
using geometry::Point2;
using geometry::Vec;
using geometry::VPolytope;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "config '" + path + "': " + e.what());
  }
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Config, where + ": " + what);
}

void check_object(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) fail(where, "unknown key '" + k + "'");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double get(const json& j, const char* key, double def, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : def;
}

int get_int(const json& j, const char* key, int def, const std::string& where) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& where, std::size_t n = 0) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, where));
  if (n && out.size() != n) fail(where, "expected " + std::to_string(n) + " numbers");
  return out;
}

Point2 pair(const json& j, const std::string& where) {
  const auto v = numbers(j, where, 2);
  return {v[0], v[1]};
}

Mat matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const auto cols = numbers(j.front(), where).size();
  Mat M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = numbers(j[r], where, cols);
    for (std::size_t c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return M;
}

std::vector<Point2> points(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of points");
  std::vector<Point2> out;
  for (const auto& p : j) out.push_back(pair(p, where));
  return out;
}

setlearn::AdmissibleSet admissible_from(const json& j, const std::string& where) {
  check_object(j, where, {"box", "polygon", "H"});
  if (j.size() != 1) fail(where, "give exactly one of box, polygon, H");
  try {
    if (j.contains("box")) return setlearn::AdmissibleSet::box(Vec(pair(j["box"], where + ".box")));
    if (j.contains("polygon")) {
      const auto& p = j["polygon"];
      check_object(p, where + ".polygon", {"sides", "inradius", "rotation"});
      return setlearn::AdmissibleSet::regular_polygon(get_int(p, "sides", 6, where), get(p, "inradius", 1.0, where),
                                                      get(p, "rotation", 0.0, where));
    }
    return setlearn::AdmissibleSet::from_matrix(matrix(j["H"], where + ".H"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(where, e.what());
  }
}

VPolytope vset_from(const json& j, const std::string& where) {
  check_object(j, where, {"box", "vertices", "point"});
  if (j.size() != 1) fail(where, "give exactly one of box, vertices, point");
  if (j.contains("box")) {
    const Point2 h = pair(j["box"], where + ".box");
    if ((h.array() < 0).any()) fail(where, "box half extents must be non-negative");
    return geometry::hull_2d(std::vector<Point2>{Point2(h(0), h(1)), Point2(-h(0), h(1)), Point2(-h(0), -h(1)), Point2(h(0), -h(1))});
  }
  if (j.contains("point")) return geometry::point_set(Vec(pair(j["point"], where + ".point")));
  return geometry::hull_2d(points(j["vertices"], where + ".vertices"));
}

HPolytope region_from(const json& j, const std::string& where) {
  check_object(j, where, {"box", "vertices", "H", "b"});
  if (j.contains("box")) {
    const auto& b = j["box"];
    check_object(b, where + ".box", {"lo", "hi"});
    if (!b.contains("lo") || !b.contains("hi")) fail(where + ".box", "needs lo and hi");
    const Point2 lo = pair(b["lo"], where + ".box.lo");
    const Point2 hi = pair(b["hi"], where + ".box.hi");
    if ((hi.array() <= lo.array()).any()) fail(where, "box must have hi > lo");
    return geometry::box(Vec(lo), Vec(hi));
  }
  if (j.contains("vertices")) {
    const auto V = geometry::hull_2d(points(j["vertices"], where + ".vertices"));
    if (V.size() < 3) fail(where, "region needs at least three affinely independent vertices");
    return geometry::hrep_from_vertices_2d(V);
  }
  if (!j.contains("H") || !j.contains("b")) fail(where, "give box, vertices or H and b");
  HPolytope P;
  P.H = matrix(j["H"], where + ".H");
  const auto b = numbers(j["b"], where + ".b", static_cast<std::size_t>(P.H.rows()));
  P.b = Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(b.size()));
  if (P.H.cols() != 2) fail(where, "region must be planar");
  if (geometry::vertices_2d(P).size() < 3) fail(where, "region must be bounded and full-dimensional");
  return P;
}

planner::Reference reference_from(const json& j, const std::string& where) {
  const auto v = numbers(j, where, 4);
  return {v[0], v[1], v[2], v[3]};
}

json ref_json(const planner::Reference& r) { return json::array({r.x, r.y, r.phi, r.v}); }

json matrix_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

void parse_ego(const json& j, sim::Scenario& s) {
  const std::string w = "ego";
  check_object(j, w, {"init", "ref", "l_f", "l_r", "T", "length", "width", "v_bounds", "a_bounds", "delta_bounds", "model"});
  auto& p = s.planner.ego;
  if (j.contains("init")) {
    const auto v = numbers(j["init"], w + ".init");
    if (v.size() != 4 && v.size() != 5) fail(w + ".init", "expected [x, y, phi, v] or [x, y, phi, v, a]");
    s.ego0 = vehicle::EgoState{v[0], v[1], v[2], v[3], v.size() == 5 ? v[4] : 0.0};
  }
  if (j.contains("ref")) s.planner.ref = reference_from(j["ref"], w + ".ref");
  p.l_f = get(j, "l_f", p.l_f, w);
  p.l_r = get(j, "l_r", p.l_r, w);
  p.T = get(j, "T", p.T, w);
  p.length = get(j, "length", p.length, w);
  p.width = get(j, "width", p.width, w);
  if (j.contains("v_bounds")) {
    const Point2 b = pair(j["v_bounds"], w + ".v_bounds");
    p.v_min = b(0);
    p.v_max = b(1);
  }
  if (j.contains("a_bounds")) {
    const Point2 b = pair(j["a_bounds"], w + ".a_bounds");
    p.a_min = b(0);
    p.a_max = b(1);
  }
  if (j.contains("delta_bounds")) {
    const Point2 b = pair(j["delta_bounds"], w + ".delta_bounds");
    p.delta_min = b(0);
    p.delta_max = b(1);
  }
  if (j.contains("model")) {
    const auto m = j["model"].is_string() ? j["model"].get<std::string>() : "";
    if (m == "jerk") {
      p.kind = vehicle::EgoModelKind::Jerk;
    } else if (m == "acceleration") {
      p.kind = vehicle::EgoModelKind::Acceleration;
    } else {
      fail(w + ".model", "expected \"jerk\" or \"acceleration\"");
    }
  }
}

void parse_planner(const json& j, sim::Scenario& s) {
  const std::string w = "planner";
  check_object(j, w, {"N", "Q1", "Q2", "Q3", "Q4", "mode", "kkt_tol", "max_iter", "hessian"});
  auto& c = s.planner;
  c.N = get_int(j, "N", c.N, w);
  c.Q1 = get(j, "Q1", c.Q1, w);
  c.Q2 = get(j, "Q2", c.Q2, w);
  if (j.contains("Q3")) {
    const auto q = numbers(j["Q3"], w + ".Q3", 4);
    c.Q3 = Eigen::Vector4d(q[0], q[1], q[2], q[3]);
  }
  c.Q4 = get(j, "Q4", c.Q4, w);
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) fail(w + ".mode", "expected a string");
    c.mode = planner::mode_from_string(j["mode"].get<std::string>());
  }
  c.kkt_tol = get(j, "kkt_tol", c.kkt_tol, w);
  c.max_iter = get_int(j, "max_iter", c.max_iter, w);
  if (j.contains("hessian")) {
    const auto h = j["hessian"].is_string() ? j["hessian"].get<std::string>() : "";
    if (h == "structured") {
      c.hessian = nlp::HessianMode::Structured;
    } else if (h == "bfgs") {
      c.hessian = nlp::HessianMode::Bfgs;
    } else {
      fail(w + ".hessian", "expected \"structured\" or \"bfgs\"");
    }
  }
}

void parse_sv(const json& j, const std::string& w, sim::SvSpec& sv, sim::SvSampler& sm) {
  check_object(j, w, {"init", "ref", "length", "width", "hidden", "admissible", "controller", "kp", "kd", "noise_std",
                      "seed_fraction", "sampler"});
  if (j.contains("init")) {
    const auto v = numbers(j["init"], w + ".init", 4);
    sv.x = v[0];
    sv.y = v[1];
    sv.phi = v[2];
    sv.v = v[3];
  }
  if (j.contains("ref")) sv.ref = reference_from(j["ref"], w + ".ref");
  sv.length = get(j, "length", sv.length, w);
  sv.width = get(j, "width", sv.width, w);
  if (j.contains("hidden")) sv.hidden = vset_from(j["hidden"], w + ".hidden");
  if (j.contains("admissible")) sv.admissible = admissible_from(j["admissible"], w + ".admissible");
  if (j.contains("controller")) {
    const auto c = j["controller"].is_string() ? j["controller"].get<std::string>() : "";
    if (c == "tracker") {
      sv.controller = sim::SvControllerKind::Tracker;
    } else if (c == "planner") {
      sv.controller = sim::SvControllerKind::Planner;
    } else {
      fail(w + ".controller", "expected \"tracker\" or \"planner\"");
    }
  }
  sv.kp = get(j, "kp", sv.kp, w);
  sv.kd = get(j, "kd", sv.kd, w);
  sv.noise_std = get(j, "noise_std", sv.noise_std, w);
  sv.seed_fraction = get(j, "seed_fraction", sv.seed_fraction, w);
  sm.center = Point2(sv.x, sv.y);
  sm.half_extent = Point2::Zero();
  sm.phi_min = sm.phi_max = sv.phi;
  if (j.contains("sampler")) {
    const auto& s = j["sampler"];
    const std::string ws = w + ".sampler";
    check_object(s, ws, {"center", "half_extent", "phi"});
    if (s.contains("center")) sm.center = pair(s["center"], ws + ".center");
    if (s.contains("half_extent")) sm.half_extent = pair(s["half_extent"], ws + ".half_extent");
    if (s.contains("phi")) {
      const Point2 ph = pair(s["phi"], ws + ".phi");
      sm.phi_min = ph(0);
      sm.phi_max = ph(1);
    }
    if ((sm.half_extent.array() < 0).any() || sm.phi_max < sm.phi_min) fail(ws, "empty sampling range");
  }
}

}  // namespace

sim::Scenario scenario_from_json(const json& j) {
  check_object(j, "config", {"seed", "duration", "success_radius", "emit_polytopes", "ego", "planner", "D", "svs", "name"});
  sim::Scenario s = sim::reach_avoid_scenario();
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
      fail("config.seed", "expected a non-negative integer");
    }
    s.seed = j["seed"].get<std::uint64_t>();
  }
  s.duration = get(j, "duration", s.duration, "config");
  s.success_radius = get(j, "success_radius", s.success_radius, "config");
  if (j.contains("emit_polytopes")) {
    if (!j["emit_polytopes"].is_boolean()) fail("config.emit_polytopes", "expected a boolean");
    s.record_polytopes = j["emit_polytopes"].get<bool>();
  }
  if (j.contains("ego")) parse_ego(j["ego"], s);
  if (j.contains("planner")) parse_planner(j["planner"], s);
  if (j.contains("D")) s.planner.D = region_from(j["D"], "D");
  if (j.contains("svs")) {
    if (!j["svs"].is_array()) fail("svs", "expected an array");
    const sim::SvSpec base = sim::reach_avoid_scenario().svs.front();
    s.svs.clear();
    s.samplers.clear();
    for (std::size_t i = 0; i < j["svs"].size(); ++i) {
      sim::SvSpec sv = base;
      sim::SvSampler sm;
      parse_sv(j["svs"][i], "svs[" + std::to_string(i) + "]", sv, sm);
      s.svs.push_back(sv);
      s.samplers.push_back(sm);
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail("config", e.what());
  }
  return s;
}

json scenario_to_json(const sim::Scenario& s) {
  const auto& c = s.planner;
  const auto& p = c.ego;
  json j;
  j["seed"] = s.seed;
  j["duration"] = s.duration;
  j["success_radius"] = s.success_radius;
  j["emit_polytopes"] = s.record_polytopes;
  j["ego"] = {{"init", json::array({s.ego0.px, s.ego0.py, s.ego0.phi, s.ego0.v, s.ego0.a})},
              {"ref", ref_json(c.ref)},
              {"l_f", p.l_f},
              {"l_r", p.l_r},
              {"T", p.T},
              {"length", p.length},
              {"width", p.width},
              {"v_bounds", json::array({p.v_min, p.v_max})},
              {"a_bounds", json::array({p.a_min, p.a_max})},
              {"delta_bounds", json::array({p.delta_min, p.delta_max})},
              {"model", p.kind == vehicle::EgoModelKind::Jerk ? "jerk" : "acceleration"}};
  j["planner"] = {{"N", c.N},
                  {"Q1", c.Q1},
                  {"Q2", c.Q2},
                  {"Q3", json::array({c.Q3(0), c.Q3(1), c.Q3(2), c.Q3(3)})},
                  {"Q4", c.Q4},
                  {"mode", planner::to_string(c.mode)},
                  {"kkt_tol", c.kkt_tol},
                  {"max_iter", c.max_iter},
                  {"hessian", c.hessian == nlp::HessianMode::Structured ? "structured" : "bfgs"}};
  j["D"] = {{"H", matrix_json(c.D.H)}, {"b", vec_json(c.D.b)}};
  j["svs"] = json::array();
  for (std::size_t i = 0; i < s.svs.size(); ++i) {
    const auto& sv = s.svs[i];
    json o = {{"init", json::array({sv.x, sv.y, sv.phi, sv.v})},
              {"ref", ref_json(sv.ref)},
              {"length", sv.length},
              {"width", sv.width},
              {"hidden", {{"vertices", to_json(sv.hidden)}}},
              {"admissible", {{"H", matrix_json(sv.admissible.H)}}},
              {"controller", sim::to_string(sv.controller)},
              {"kp", sv.kp},
              {"kd", sv.kd},
              {"noise_std", sv.noise_std},
              {"seed_fraction", sv.seed_fraction}};
    if (i < s.samplers.size()) {
      const auto& sm = s.samplers[i];
      o["sampler"] = {{"center", json::array({sm.center(0), sm.center(1)})},
                      {"half_extent", json::array({sm.half_extent(0), sm.half_extent(1)})},
                      {"phi", json::array({sm.phi_min, sm.phi_max})}};
    }
    j["svs"].push_back(o);
  }
  return j;
}

demos::LearnDemoConfig learn_demo_from_json(const json& j) {
  const std::string w = "config";
  check_object(j, w, {"admissible", "hidden", "mild_scale", "switch_step", "steps", "window", "seed_fraction", "seed",
                      "samples", "name"});
  demos::LearnDemoConfig c;
  if (j.contains("admissible")) c.admissible = admissible_from(j["admissible"], "admissible");
  if (j.contains("hidden")) c.hidden = vset_from(j["hidden"], "hidden");
  c.mild_scale = get(j, "mild_scale", c.mild_scale, w);
  c.switch_step = get_int(j, "switch_step", c.switch_step, w);
  c.steps = get_int(j, "steps", c.steps, w);
  const int window = get_int(j, "window", static_cast<int>(c.window), w);
  if (window < 1) fail("config.window", "must be at least 1");
  c.window = static_cast<std::size_t>(window);
  c.seed_fraction = get(j, "seed_fraction", c.seed_fraction, w);
  c.seed = static_cast<std::uint64_t>(get_int(j, "seed", 0, w));
  if (j.contains("samples")) {
    if (!j["samples"].is_array() || j["samples"].empty()) fail("config.samples", "empty sample stream");
    for (const auto& p : points(j["samples"], "config.samples")) {
      if (!c.admissible.contains(Vec(p), 1e-9)) fail("config.samples", "sample outside the admissible set");
      c.samples.emplace_back(p);
    }
  }
  if (c.samples.empty() && c.steps < 1) fail("config.steps", "empty sample stream");
  if (c.hidden.size()) {
    for (const auto& v : c.hidden.vertices) {
      if (!c.admissible.contains(v, 1e-9)) fail("config.hidden", "hidden set not inside the admissible set");
    }
  }
  return c;
}

demos::ReachDemoConfig reach_demo_from_json(const json& j) {
  const std::string w = "config";
  check_object(j, w, {"vehicle", "x0", "steer_range", "accel_range", "admissible", "warmup", "rollouts", "horizon", "seed", "name"});
  demos::ReachDemoConfig c;
  if (j.contains("vehicle")) {
    const auto& v = j["vehicle"];
    check_object(v, "vehicle", {"l_f", "l_r", "T"});
    c.vehicle.l_f = get(v, "l_f", c.vehicle.l_f, "vehicle");
    c.vehicle.l_r = get(v, "l_r", c.vehicle.l_r, "vehicle");
    c.vehicle.T = get(v, "T", c.vehicle.T, "vehicle");
    if (!(c.vehicle.T > 0)) fail("vehicle.T", "must be positive");
  }
  if (j.contains("x0")) {
    const auto v = numbers(j["x0"], "config.x0", 4);
    c.x0 = vehicle::EgoState{v[0], v[1], v[2], v[3], 0.0};
  }
  if (j.contains("steer_range")) c.steer_range = pair(j["steer_range"], "config.steer_range");
  if (j.contains("accel_range")) c.accel_range = pair(j["accel_range"], "config.accel_range");
  if (c.steer_range(0) > c.steer_range(1) || c.accel_range(0) > c.accel_range(1)) fail(w, "empty input range");
  if (j.contains("admissible")) c.admissible = admissible_from(j["admissible"], "admissible");
  c.warmup = get_int(j, "warmup", c.warmup, w);
  c.rollouts = get_int(j, "rollouts", c.rollouts, w);
  c.horizon = get_int(j, "horizon", c.horizon, w);
  c.seed = static_cast<std::uint64_t>(get_int(j, "seed", 0, w));
  if (c.horizon < 1) fail("config.horizon", "must be at least 1");
  if (c.warmup < 1 || c.rollouts < 1) fail(w, "warmup and rollouts must be at least 1");
  return c;
}

json to_json(const VPolytope& V) {
  json a = json::array();
  for (const auto& v : V.vertices) a.push_back(vec_json(v));
  return a;
}

json to_json(const HPolytope& P) { return {{"H", matrix_json(P.H)}, {"b", vec_json(P.b)}}; }

json to_json(const setlearn::LearnedSet& s) {
  return {{"H", matrix_json(s.H)},
          {"theta", vec_json(s.theta)},
          {"y", vec_json(s.y)},
          {"rho", s.rho},
          {"objective", s.objective},
          {"vertices", to_json(setlearn::to_vertices(s))}};
}

json to_json(const sim::Metrics& m) {
  json j = {{"collision_free", m.collision_free},
            {"complete", m.complete},
            {"min_clearance", std::isfinite(m.min_clearance) ? json(m.min_clearance) : json(nullptr)},
            {"tau_ref", m.tau_ref ? json(*m.tau_ref) : json(nullptr)},
            {"cost_sum", m.cost_sum},
            {"solves", m.solves},
            {"non_converged", m.non_converged}};
  return j;
}

json to_json(const sim::ModeSummary& s) {
  return {{"mode", planner::to_string(s.mode)},
          {"runs", s.runs},
          {"collision_free_rate", s.collision_free_rate},
          {"complete_rate", s.complete_rate},
          {"mean_min_clearance", s.mean_min_clearance},
          {"min_min_clearance", s.min_min_clearance},
          {"mean_tau", s.mean_tau ? json(*s.mean_tau) : json(nullptr)},
          {"max_tau", s.max_tau ? json(*s.max_tau) : json(nullptr)},
          {"mean_cost", s.mean_cost},
          {"max_cost", s.max_cost}};
}

void write_trace_csv(std::ostream& os, const sim::Trace& tr) {
  const std::size_t ns = tr.rows.empty() ? 0 : tr.rows.front().svs.size();
  os << "step,t,x,y,phi,v,a,delta,eta";
  for (std::size_t s = 0; s < ns; ++s) {
    os << ",sv" << s << "_x,sv" << s << "_y,sv" << s << "_vx,sv" << s << "_vy,sv" << s << "_heading,sv" << s
       << "_rho,sv" << s << "_area,sv" << s << "_clearance";
  }
  os << ",d_ref,in_D,stage_cost,status,iterations,kkt\n";
  for (const auto& r : tr.rows) {
    os << r.step << ',' << num(r.t) << ',' << num(r.ego.px) << ',' << num(r.ego.py) << ',' << num(r.ego.phi) << ','
       << num(r.ego.v) << ',' << num(r.ego.a) << ',' << num(r.input.delta) << ',' << num(r.input.eta);
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& x = r.svs[s].x;
      os << ',' << num(x(0)) << ',' << num(x(2)) << ',' << num(x(1)) << ',' << num(x(3)) << ','
         << num(r.svs[s].heading) << ',' << num(r.rho[s]) << ',' << num(r.area[s]) << ',' << num(r.clearance[s]);
    }
    os << ',' << num(r.d_ref) << ',' << (r.in_D ? 1 : 0) << ',' << num(r.stage_cost) << ','
       << (r.planned ? planner::to_string(r.status) : "terminal") << ',' << r.iterations << ',' << num(r.kkt) << '\n';
  }
}

json trace_to_json(const sim::Trace& tr) {
  json j;
  j["T"] = tr.T;
  j["seed"] = tr.seed;
  j["mode"] = tr.mode;
  j["solves"] = tr.solves;
  j["non_converged"] = tr.non_converged;
  j["rows"] = json::array();
  for (const auto& r : tr.rows) {
    json o = {{"step", r.step},
              {"t", r.t},
              {"ego", json::array({r.ego.px, r.ego.py, r.ego.phi, r.ego.v, r.ego.a})},
              {"input", json::array({r.input.delta, r.input.eta})},
              {"d_ref", r.d_ref},
              {"in_D", r.in_D},
              {"stage_cost", r.stage_cost},
              {"status", r.planned ? planner::to_string(r.status) : "terminal"},
              {"iterations", r.iterations},
              {"kkt", r.kkt}};
    o["svs"] = json::array();
    for (std::size_t s = 0; s < r.svs.size(); ++s) {
      const auto& x = r.svs[s].x;
      json sv = {{"state", json::array({x(0), x(1), x(2), x(3)})},
                 {"heading", r.svs[s].heading},
                 {"rho", r.rho[s]},
                 {"area", r.area[s]},
                 {"clearance", r.clearance[s]}};
      if (s < r.occupancy.size()) {
        sv["occupancy"] = json::array();
        for (const auto& O : r.occupancy[s]) sv["occupancy"].push_back(to_json(O));
      }
      o["svs"].push_back(sv);
    }
    j["rows"].push_back(o);
  }
  return j;
}

void write_learn_csv(std::ostream& os, const demos::LearnDemoResult& r) {
  os << "t,u1,u2,u_norm,batch_area,batch_rho,batch_objective,recursive_area,recursive_rho,recursive_objective,"
        "window_area,window_rho,window_objective\n";
  for (const auto& row : r.rows) {
    os << row.step << ',' << num(row.u(0)) << ',' << num(row.u(1)) << ',' << num(row.u.norm()) << ','
       << num(row.batch_area) << ',' << num(row.batch_rho) << ',' << num(row.batch_objective) << ','
       << num(row.recursive_area) << ',' << num(row.recursive_rho) << ',' << num(row.recursive_objective) << ','
       << num(row.window_area) << ',' << num(row.window_rho) << ',' << num(row.window_objective) << '\n';
  }
}

void write_reach_trajectories_csv(std::ostream& os, const demos::ReachDemoResult& r) {
  os << "rollout,step,x,y\n";
  for (std::size_t k = 0; k < r.trajectories.size(); ++k) {
    for (std::size_t i = 0; i < r.trajectories[k].size(); ++i) {
      const auto& p = r.trajectories[k][i];
      os << k << ',' << i << ',' << num(p(0)) << ',' << num(p(1)) << '\n';
    }
  }
}

void write_reach_occupancy_csv(std::ostream& os, const demos::ReachDemoResult& r) {
  os << "step,vertex,x,y\n";
  for (std::size_t i = 0; i < r.occupancy.size(); ++i) {
    for (std::size_t v = 0; v < r.occupancy[i].size(); ++v) {
      const auto& p = r.occupancy[i].vertices[v];
      os << i + 1 << ',' << v << ',' << num(p(0)) << ',' << num(p(1)) << '\n';
    }
  }
}

void write_mc_runs_csv(std::ostream& os, const sim::MonteCarloResult& r) {
  os << "run,seed,mode,collision_free,complete,min_clearance,tau_ref,cost_sum,solves,non_converged\n";
  for (const auto& x : r.runs) {
    const auto& m = x.metrics;
    os << x.index << ',' << x.seed << ',' << planner::to_string(x.mode) << ',' << (m.collision_free ? 1 : 0) << ','
       << (m.complete ? 1 : 0) << ',' << num(m.min_clearance) << ',' << (m.tau_ref ? num(*m.tau_ref) : "") << ','
       << num(m.cost_sum) << ',' << m.solves << ',' << m.non_converged << '\n';
  }
}

void write_mc_summary_csv(std::ostream& os, const sim::MonteCarloResult& r) {
  os << "mode,runs,collision_free_rate,complete_rate,mean_min_clearance,min_min_clearance,mean_tau,max_tau,mean_cost,"
        "max_cost\n";
  for (const auto& s : r.summary) {
    os << planner::to_string(s.mode) << ',' << s.runs << ',' << num(s.collision_free_rate) << ','
       << num(s.complete_rate) << ',' << num(s.mean_min_clearance) << ',' << num(s.min_min_clearance) << ','
       << (s.mean_tau ? num(*s.mean_tau) : "") << ',' << (s.max_tau ? num(*s.max_tau) : "") << ','
       << num(s.mean_cost) << ',' << num(s.max_cost) << '\n';
  }
}

}  // namespace reachplan::io
