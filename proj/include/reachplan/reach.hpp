#pragma once

#include <vector>

#include "reachplan/geometry.hpp"

namespace reachplan::reach {

using geometry::HPolytope;
using geometry::Mat;
using geometry::Vec;
using geometry::VPolytope;

inline constexpr int kDefaultHorizon = 10;

/// x_{k+1} = A_k x_k + B_k u_k
struct LtvModel {
  std::vector<Mat> A_seq;
  std::vector<Mat> B_seq;
  std::vector<int> position_dims;

  Eigen::Index state_dim() const { return A_seq.empty() ? 0 : A_seq.front().rows(); }
  Eigen::Index input_dim() const { return B_seq.empty() ? 0 : B_seq.front().cols(); }

  /// Time-invariant double integrator (px, vx, py, vy) repeated `horizon` times.
  static LtvModel double_integrator(double T, int horizon);
};

/// R[0] = {x0}; R[i+1] = A_i R[i] ⊕ B_i U; O[i] = positions of R[i+1].
struct ReachTube {
  std::vector<VPolytope> R;
  std::vector<VPolytope> O;
};

struct ReachOptions {
  /// When false only the occupancies are produced and R stays empty.
  bool state_sets = true;
};

ReachTube forward_occupancy(const LtvModel& m, const Vec& x0, const VPolytope& U, int N, ReachOptions opts = {});

/// Halfspace form of every occupancy, growing degenerate ones by the
/// geometry inflation box.
std::vector<HPolytope> occupancy_hrep(const ReachTube& tube);

}  // namespace reachplan::reach
