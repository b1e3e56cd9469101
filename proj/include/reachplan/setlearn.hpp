#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "reachplan/geometry.hpp"

namespace reachplan::setlearn {

using geometry::HPolytope;
using geometry::Mat;
using geometry::Vec;
using geometry::VPolytope;

/// Admissible control set {u : H u ≤ 1}.
struct AdmissibleSet {
  Mat H;

  Eigen::Index num_rows() const { return H.rows(); }
  Eigen::Index dim() const { return H.cols(); }

  bool contains(const Vec& u, double tol = 1e-7) const;
  HPolytope polytope() const;

  /// Axis box |u_k| ≤ half_extent_k, rows ordered (+e0, -e0, +e1, -e1, ...).
  static AdmissibleSet box(const Vec& half_extent);
  /// Regular polygon with the given inradius; first facet normal at `rotation`.
  static AdmissibleSet regular_polygon(int sides, double inradius, double rotation = 0.0);
  /// Throws InvalidArgument for non-finite rows, a missing origin or an
  /// unbounded 2-D set.
  static AdmissibleSet from_matrix(Mat H);
};

/// Observed obstacle inputs, oldest first. With a capacity the oldest sample
/// is evicted once the window is full.
class InfoSet {
 public:
  InfoSet() = default;
  explicit InfoSet(std::size_t capacity) : capacity_(capacity) {}

  void push(const Vec& u);
  const std::deque<Vec>& samples() const { return samples_; }
  std::optional<std::size_t> capacity() const { return capacity_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

 private:
  std::deque<Vec> samples_;
  std::optional<std::size_t> capacity_;
};

/// Learned intended control set {u : H u ≤ theta + H y}.
struct LearnedSet {
  Mat H;
  Vec theta;
  Vec y;
  double rho = 0.0;
  double objective = 0.0;

  /// Recovers v = y / (1 - rho); undefined at rho = 1.
  std::optional<Vec> center_parameter() const;
};

LearnedSet batch_learn(const AdmissibleSet& U, std::span<const Vec> samples);
LearnedSet batch_learn(const AdmissibleSet& U, const InfoSet& info);

/// Smallest parameterized set containing `prev` and `u_new`; fixed LP size.
LearnedSet recursive_update(const LearnedSet& prev, const Vec& u_new);

/// Batch learning over the current window of a capacity-limited InfoSet.
LearnedSet moving_horizon_learn(const AdmissibleSet& U, const InfoSet& info);

HPolytope to_polytope(const LearnedSet& s);
/// Vertex form of a two-dimensional learned set.
VPolytope to_vertices(const LearnedSet& s);
double area(const LearnedSet& s);

LearnedSet init_seed(const AdmissibleSet& U, std::span<const Vec> seeds);

/// Four axis samples ±fraction·(per-axis extent of U) for 2-D sets; 2·dim
/// samples in general.
std::vector<Vec> default_seeds(const AdmissibleSet& U, double fraction = 0.01);

}  // namespace reachplan::setlearn
