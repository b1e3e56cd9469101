#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "reachplan/geometry.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/setlearn.hpp"
#include "reachplan/vehicle.hpp"

namespace reachplan::sim {

using geometry::HPolytope;
using geometry::Point2;
using geometry::Vec;
using geometry::VPolytope;

enum class SvControllerKind { Tracker, Planner };
const char* to_string(SvControllerKind k);

struct SvSpec {
  // Initial pose and speed (x, y, heading, speed); the velocity points along the heading.
  double x = 0.0, y = 0.0, phi = 0.0, v = 0.0;
  planner::Reference ref;
  double length = 0.36;
  double width = 0.23;
  VPolytope hidden;  // intended control set, ground-frame accelerations
  SvControllerKind controller = SvControllerKind::Tracker;
  // Tracker: a = kp (p_ref - p) - kd v + noise, then projected onto `hidden`.
  double kp = 0.2;
  double kd = 0.6;
  double noise_std = 0.0;
  // Learner handed to the EV for this SV.
  setlearn::AdmissibleSet admissible;
  double seed_fraction = 0.01;
};

/// Uniform sampling of SV initial poses for Monte-Carlo campaigns.
struct SvSampler {
  Point2 center = Point2::Zero();
  Point2 half_extent = Point2::Zero();
  double phi_min = 0.0;
  double phi_max = 0.0;
};

struct Scenario {
  vehicle::EgoState ego0;
  planner::PlannerConfig planner;  // EV reference, D, mode and EV dimensions
  std::vector<SvSpec> svs;
  std::vector<SvSampler> samplers;  // one per SV; empty = keep configured poses
  double duration = 13.75;
  double success_radius = 0.2;
  std::uint64_t seed = 0;
  bool record_polytopes = false;

  void validate() const;
};

/// SV motion state: double integrator (px, vx, py, vy) plus a display heading.
/// The planner controller keeps a single-track state instead.
struct SvState {
  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  double heading = 0.0;
  std::optional<vehicle::EgoState> body;
};

struct SvAgent {
  SvState state;
  std::optional<planner::Planner> nested;
};

SvState sv_initial_state(const SvSpec& spec);
SvAgent make_agent(const SvSpec& spec, const Scenario& scn);
vehicle::SvObservation observe(const SvState& s, long step);

/// One SV step; returns the applied ground-frame acceleration.
Point2 sv_step(SvAgent& agent, const SvSpec& spec, double T, std::mt19937_64& rng);

/// Footprint rectangle of a vehicle centred at (x, y) with the given heading.
VPolytope footprint(double x, double y, double heading, double length, double width);

struct TraceRow {
  int step = 0;
  double t = 0.0;
  vehicle::EgoState ego;
  vehicle::EgoInput input;
  std::vector<SvState> svs;
  std::vector<double> rho;
  std::vector<double> area;
  std::vector<double> clearance;  // footprint distance per SV
  double d_ref = 0.0;
  bool in_D = true;
  double stage_cost = 0.0;
  bool planned = false;  // false on the terminal row
  planner::SolveStatus status = planner::SolveStatus::Converged;
  int iterations = 0;
  double kkt = 0.0;
  std::vector<std::vector<VPolytope>> occupancy;  // [sv][step], when recorded
};

struct Trace {
  std::vector<TraceRow> rows;
  double T = 0.25;
  std::uint64_t seed = 0;
  std::string mode;
  int non_converged = 0;
  int solves = 0;
};

struct Metrics {
  bool collision_free = true;
  bool complete = false;
  double min_clearance = 0.0;
  std::optional<double> tau_ref;
  double cost_sum = 0.0;
  int non_converged = 0;
  int solves = 0;
};

/// Closed loop: observe, estimate and learn the SV input, plan, apply the
/// first input, step the SVs. Stops at the time limit, on collision or once
/// the EV is within the success radius of its reference.
Trace run_closed_loop(const Scenario& scn);

Metrics evaluate(const Trace& trace, const Scenario& scn);

/// Scenario of Monte-Carlo run k: seed = base seed + k and SV poses drawn
/// from the samplers with that seed.
Scenario sample_run(const Scenario& base, int k);

struct RunRecord {
  int index = 0;
  std::uint64_t seed = 0;
  planner::Mode mode = planner::Mode::Proposed;
  Metrics metrics;
};

struct ModeSummary {
  planner::Mode mode = planner::Mode::Proposed;
  int runs = 0;
  double collision_free_rate = 0.0;
  double complete_rate = 0.0;
  double mean_min_clearance = 0.0;
  double min_min_clearance = 0.0;
  std::optional<double> mean_tau;
  std::optional<double> max_tau;
  double mean_cost = 0.0;
  double max_cost = 0.0;
};

struct MonteCarloResult {
  std::vector<RunRecord> runs;  // sorted by (index, mode order)
  std::vector<ModeSummary> summary;
};

/// Runs n samples per mode on `threads` workers (0 = REACHPLAN_THREADS or
/// the hardware concurrency). Results do not depend on the worker count.
MonteCarloResult monte_carlo(const Scenario& base, int n, const std::vector<planner::Mode>& modes, int threads = 0);

ModeSummary summarize(planner::Mode mode, const std::vector<Metrics>& runs);

int default_threads();

/// Reach-avoid crossing scenario with the default EV/SV constants.
Scenario reach_avoid_scenario();

}  // namespace reachplan::sim
