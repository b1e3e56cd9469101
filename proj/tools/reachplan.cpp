// Command-line front end: learn-demo, reach-demo, run, monte-carlo.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reachplan/error.hpp"
#include "reachplan/io.hpp"
#include "reachplan/version.hpp"

namespace fs = std::filesystem;
using namespace reachplan;
using io::json;

namespace {

enum Exit { kOk = 0, kCollision = 1, kUsage = 2, kSolver = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

class Manifest {
 public:
  Manifest(const Common& c, const std::string& command, const json& resolved, std::uint64_t seed,
           std::vector<std::string> modes)
      : path_(fs::path(c.out) / "manifest.json"), start_(std::chrono::steady_clock::now()) {
    j_["tool"] = "reachplan";
    j_["version"] = kVersion;
    j_["command"] = command;
    j_["config_path"] = c.config;
    j_["config_hash"] = io::hex64(io::fnv1a64(resolved.dump()));
    j_["config"] = resolved;
    j_["seed"] = seed;
    j_["modes"] = modes;
    j_["out"] = c.out;
    j_["status"] = "running";
    write();
  }

  void finish(int code) {
    j_["status"] = "finished";
    j_["exit_code"] = code;
    j_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write();
  }

 private:
  void write() const {
    std::ofstream f(path_);
    f << j_.dump(2) << '\n';
  }
  fs::path path_;
  std::chrono::steady_clock::time_point start_;
  json j_;
};

json load_or_empty(const std::string& path) { return path.empty() ? json::object() : io::read_json_file(path); }

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Config, "cannot create output directory '" + dir + "': " + ec.message());
}

template <class F>
void write_file(const fs::path& p, F&& body) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::Config, "cannot write '" + p.string() + "'");
  body(f);
}

int cmd_learn_demo(const Common& c) {
  auto cfg = io::learn_demo_from_json(load_or_empty(c.config));
  if (c.seed) cfg.seed = *c.seed;
  prepare_out(c.out);
  json resolved = load_or_empty(c.config);
  resolved["seed"] = cfg.seed;
  Manifest m(c, "learn-demo", resolved, cfg.seed, {});
  const auto r = demos::learn_demo(cfg);
  write_file(fs::path(c.out) / "learn.csv", [&](std::ostream& os) { io::write_learn_csv(os, r); });
  write_file(fs::path(c.out) / "final_sets.json", [&](std::ostream& os) {
    os << json{{"batch", io::to_json(r.final_batch)}, {"recursive", io::to_json(r.final_recursive)}}.dump(2) << '\n';
  });
  const auto& last = r.rows.back();
  std::cout << "steps: " << r.rows.size() << "\n"
            << "final area (batch / recursive / window): " << io::num(last.batch_area) << " / "
            << io::num(last.recursive_area) << " / " << io::num(last.window_area) << "\n";
  m.finish(kOk);
  return kOk;
}

int cmd_reach_demo(const Common& c) {
  auto cfg = io::reach_demo_from_json(load_or_empty(c.config));
  if (c.seed) cfg.seed = *c.seed;
  prepare_out(c.out);
  json resolved = load_or_empty(c.config);
  resolved["seed"] = cfg.seed;
  Manifest m(c, "reach-demo", resolved, cfg.seed, {});
  const auto r = demos::reach_demo(cfg);
  write_file(fs::path(c.out) / "trajectories.csv", [&](std::ostream& os) { io::write_reach_trajectories_csv(os, r); });
  write_file(fs::path(c.out) / "occupancy.csv", [&](std::ostream& os) { io::write_reach_occupancy_csv(os, r); });
  write_file(fs::path(c.out) / "learned_set.json", [&](std::ostream& os) { os << io::to_json(r.learned).dump(2) << '\n'; });
  std::cout << "coverage: " << io::num(r.coverage) << "\n";
  m.finish(kOk);
  return kOk;
}

sim::Scenario load_scenario(const Common& c) {
  auto s = io::scenario_from_json(load_or_empty(c.config));
  if (c.seed) s.seed = *c.seed;
  return s;
}

int cmd_run(const Common& c, const std::optional<std::string>& mode, const std::optional<bool>& emit) {
  auto s = load_scenario(c);
  if (mode) s.planner.mode = planner::mode_from_string(*mode);
  if (emit) s.record_polytopes = *emit;
  prepare_out(c.out);
  Manifest m(c, "run", io::scenario_to_json(s), s.seed, {planner::to_string(s.planner.mode)});
  const auto tr = sim::run_closed_loop(s);
  const auto met = sim::evaluate(tr, s);
  write_file(fs::path(c.out) / "trace.csv", [&](std::ostream& os) { io::write_trace_csv(os, tr); });
  write_file(fs::path(c.out) / "trace.json", [&](std::ostream& os) { os << io::trace_to_json(tr).dump() << '\n'; });
  write_file(fs::path(c.out) / "metrics.json", [&](std::ostream& os) { os << io::to_json(met).dump(2) << '\n'; });
  std::cout << "mode: " << planner::to_string(s.planner.mode) << "\n"
            << "collision_free: " << (met.collision_free ? "true" : "false") << "\n"
            << "complete: " << (met.complete ? "true" : "false") << "\n"
            << "min_clearance: " << io::num(met.min_clearance) << "\n"
            << "tau_ref: " << (met.tau_ref ? io::num(*met.tau_ref) : "none") << "\n"
            << "cost_sum: " << io::num(met.cost_sum) << "\n"
            << "non_converged: " << met.non_converged << "/" << met.solves << "\n";
  int code = kOk;
  if (2 * met.non_converged > met.solves) {
    std::cerr << "error: solver failed to converge on more than half of the steps\n";
    code = kSolver;
  } else if (!met.collision_free) {
    code = kCollision;
  }
  m.finish(code);
  return code;
}

std::vector<planner::Mode> parse_modes(const std::string& list) {
  std::vector<planner::Mode> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(planner::mode_from_string(item));
  }
  if (out.empty()) throw Error(ErrorCode::Config, "no modes given");
  return out;
}

int cmd_monte_carlo(const Common& c, int n, const std::string& modes_arg) {
  const auto modes = parse_modes(modes_arg);
  if (n < 1) throw Error(ErrorCode::Config, "--n must be at least 1");
  auto s = load_scenario(c);
  prepare_out(c.out);
  std::vector<std::string> names;
  for (auto md : modes) names.emplace_back(planner::to_string(md));
  json resolved = io::scenario_to_json(s);
  resolved["n"] = n;
  Manifest m(c, "monte-carlo", resolved, s.seed, names);
  const auto r = sim::monte_carlo(s, n, modes);
  write_file(fs::path(c.out) / "summary.csv", [&](std::ostream& os) { io::write_mc_summary_csv(os, r); });
  write_file(fs::path(c.out) / "runs.csv", [&](std::ostream& os) { io::write_mc_runs_csv(os, r); });
  io::write_mc_summary_csv(std::cout, r);
  long solves = 0;
  long failed = 0;
  for (const auto& run : r.runs) {
    solves += run.metrics.solves;
    failed += run.metrics.non_converged;
  }
  const int code = 2 * failed > solves ? kSolver : kOk;
  if (code == kSolver) std::cerr << "error: solver failed to converge on more than half of the steps\n";
  m.finish(code);
  return code;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Scenario or demo JSON file (defaults apply when omitted)");
  sub->add_option("--seed", c.seed, "Override the configured 64-bit seed");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachability-based motion planning toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common learn_c, reach_c, run_c, mc_c;
  auto* learn = app.add_subcommand("learn-demo", "Batch / recursive / moving-horizon set learning on one stream");
  add_common(learn, learn_c);
  auto* reach = app.add_subcommand("reach-demo", "Occupancy prediction against nonlinear rollouts");
  add_common(reach, reach_c);

  auto* run = app.add_subcommand("run", "Single closed-loop scenario");
  add_common(run, run_c);
  std::optional<std::string> run_mode;
  std::optional<bool> emit;
  run->add_option("--mode", run_mode, "proposed, rmpc or dmpc");
  run->add_option("--emit-polytopes", emit, "Store occupancy polytopes in trace.json (true/false)");

  auto* mc = app.add_subcommand("monte-carlo", "Monte-Carlo comparison of planner modes");
  add_common(mc, mc_c);
  int n = 30;
  std::string modes = "proposed,rmpc,dmpc";
  mc->add_option("--n", n, "Runs per mode")->capture_default_str();
  mc->add_option("--modes", modes, "Comma-separated modes")->capture_default_str();
  std::optional<std::string> mc_mode;
  mc->add_option("--mode", mc_mode, "Single mode (same as --modes MODE)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*learn) return cmd_learn_demo(learn_c);
    if (*reach) return cmd_reach_demo(reach_c);
    if (*run) return cmd_run(run_c, run_mode, emit);
    if (*mc) return cmd_monte_carlo(mc_c, n, mc_mode ? *mc_mode : modes);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kUsage;
}
