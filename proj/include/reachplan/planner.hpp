#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reachplan/geometry.hpp"
#include "reachplan/reach.hpp"
#include "reachplan/setlearn.hpp"
#include "reachplan/sqp.hpp"
#include "reachplan/vehicle.hpp"

namespace reachplan::planner {

using geometry::HPolytope;
using geometry::Mat;
using geometry::Vec;
using geometry::VPolytope;
using vehicle::EgoInput;
using vehicle::EgoParams;
using vehicle::EgoState;

/// Which control set feeds the obstacle reachability: the learned set, the
/// full admissible set (robust baseline) or zero input (deterministic baseline).
enum class Mode { Proposed, Rmpc, Dmpc };

const char* to_string(Mode m);
/// Accepts "proposed", "rmpc", "dmpc"; throws Error(Config) otherwise.
Mode mode_from_string(const std::string& s);

struct Reference {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double v = 0.0;
};

struct PlannerConfig {
  int N = reach::kDefaultHorizon;
  double Q1 = 1.0;
  double Q2 = 1.0;
  Eigen::Vector4d Q3 = Eigen::Vector4d(1.0, 5.0, 5.0, 2.0);  // (v, x, y, phi)
  double Q4 = 300.0;
  Reference ref;
  HPolytope D;
  EgoParams ego;
  Mode mode = Mode::Proposed;
  double kkt_tol = 1e-6;
  int max_iter = 100;
  nlp::HessianMode hessian = nlp::HessianMode::Structured;

  void validate() const;
};

/// Per-step position-space occupancy {p : H_i p ≤ h_i}, i = 1..N.
struct ObstacleOccupancy {
  std::vector<HPolytope> steps;
  double d_min = 0.0;
};

enum class SolveStatus { Converged, MaxIterations, Failed };
const char* to_string(SolveStatus s);

struct PlanResult {
  std::vector<EgoState> states;   // N + 1, states[0] = x0
  std::vector<EgoInput> inputs;   // N
  std::vector<std::vector<Vec>> lambdas;      // [obstacle][step]
  std::vector<std::vector<double>> slacks;    // [obstacle][step]
  double cost = 0.0;
  SolveStatus status = SolveStatus::Failed;
  int iterations = 0;
  double kkt = 0.0;
  double violation = 0.0;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Sum of the circumscribed-circle radii of two rectangles.
double compute_d_min(double ego_length, double ego_width, double obs_length, double obs_width);

/// Optional initial guess; missing parts are filled by the default rules.
struct WarmStart {
  std::vector<EgoInput> inputs;
};

/// Solves the finite-horizon problem once. Inputs are the decision variables;
/// states follow by RK4 rollout so dynamics hold exactly.
PlanResult build_and_solve(const EgoState& x0, const std::vector<ObstacleOccupancy>& occ, const PlannerConfig& cfg,
                           const WarmStart* warm = nullptr);

/// Objective of the planning problem at a given input sequence and slacks.
double plan_cost(const PlanResult& r, const PlannerConfig& cfg);

/// Obstacle as seen by the ego at the current step.
struct ObstacleTrack {
  Eigen::Vector4d state = Eigen::Vector4d::Zero();  // (px, vx, py, vy)
  setlearn::AdmissibleSet admissible;
  std::optional<setlearn::LearnedSet> learned;
  double d_min = 0.0;
};

/// Control set used for prediction under the given mode.
VPolytope prediction_set(const ObstacleTrack& track, Mode mode);

/// Receding-horizon wrapper that keeps the previous solution for warm starts.
class Planner {
 public:
  explicit Planner(PlannerConfig cfg);

  PlanResult plan_step(const EgoState& x0, const std::vector<ObstacleTrack>& tracks);

  const PlannerConfig& config() const { return cfg_; }
  /// Occupancy tubes used by the last call, one per track.
  const std::vector<reach::ReachTube>& last_tubes() const { return tubes_; }
  void reset() { prev_.reset(); }

 private:
  PlannerConfig cfg_;
  std::optional<PlanResult> prev_;
  std::vector<reach::ReachTube> tubes_;
};

}  // namespace reachplan::planner
