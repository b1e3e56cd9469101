#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "reachplan/geometry.hpp"
#include "reachplan/setlearn.hpp"
#include "reachplan/vehicle.hpp"

namespace reachplan::demos {

using geometry::Point2;
using geometry::Vec;
using geometry::VPolytope;

/// Uniform sample from a convex polygon (rejection from its bounding box).
Point2 sample_uniform(const VPolytope& P, std::mt19937_64& rng);

struct LearnDemoConfig {
  setlearn::AdmissibleSet admissible = setlearn::AdmissibleSet::regular_polygon(6, 1.0);
  VPolytope hidden;           // aggressive behaviour; empty = default quadrilateral
  double mild_scale = 0.25;   // mild samples come from mild_scale * hidden
  int switch_step = 50;       // last mild step (1-based)
  int steps = 100;
  std::size_t window = 10;    // moving-horizon window length
  double seed_fraction = 0.01;
  std::uint64_t seed = 0;
  std::vector<Vec> samples;   // explicit stream; overrides the generated one when non-empty
};

struct LearnDemoRow {
  int step = 0;
  Vec u;
  double batch_area = 0.0, batch_rho = 0.0, batch_objective = 0.0;
  double recursive_area = 0.0, recursive_rho = 0.0, recursive_objective = 0.0;
  double window_area = 0.0, window_rho = 0.0, window_objective = 0.0;
  double recursive_seconds = 0.0;  // not written to hashed outputs
};

struct LearnDemoResult {
  std::vector<LearnDemoRow> rows;
  setlearn::LearnedSet final_batch;
  setlearn::LearnedSet final_recursive;
};

VPolytope default_hidden_set();
std::vector<Vec> learn_demo_stream(const LearnDemoConfig& cfg);
/// Batch, recursive and moving-horizon learners on the same stream.
LearnDemoResult learn_demo(const LearnDemoConfig& cfg);

struct ReachDemoConfig {
  vehicle::EgoParams vehicle;  // single-track model of the observed system
  vehicle::EgoState x0{0.0, 0.0, 0.0, 1.0, 0.0};
  // Hidden input set in (steering, acceleration); the 4-state model is used.
  Point2 steer_range = Point2(-0.15, 0.15);
  Point2 accel_range = Point2(-0.3, 0.3);
  setlearn::AdmissibleSet admissible = setlearn::AdmissibleSet::box(Vec(Point2(2.0, 2.0)));
  int warmup = 100;
  int rollouts = 200;
  int horizon = 10;
  std::uint64_t seed = 0;
};

struct ReachDemoResult {
  setlearn::LearnedSet learned;
  vehicle::EgoState start;                      // state after the warm-up
  std::vector<VPolytope> occupancy;             // steps 1..N
  std::vector<std::vector<Point2>> trajectories;  // [rollout][step 0..N]
  double coverage = 0.0;                        // end positions inside occupancy[N-1]
};

ReachDemoResult reach_demo(const ReachDemoConfig& cfg);

}  // namespace reachplan::demos
