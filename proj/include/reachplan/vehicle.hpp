#pragma once

#include <utility>

#include <Eigen/Dense>

namespace reachplan::vehicle {

using StateVec = Eigen::Matrix<double, 5, 1>;
using InputVec = Eigen::Vector2d;
using StateJac = Eigen::Matrix<double, 5, 5>;
using InputJac = Eigen::Matrix<double, 5, 2>;

/// Single-track kinematic state in the ground frame (SI units).
struct EgoState {
  double px = 0.0;
  double py = 0.0;
  double phi = 0.0;
  double v = 0.0;
  double a = 0.0;

  StateVec vec() const { return StateVec(px, py, phi, v, a); }
  static EgoState from_vec(const StateVec& x) { return {x(0), x(1), x(2), x(3), x(4)}; }
};

/// Front tire angle and jerk. In the four-state variant `eta` is the
/// longitudinal acceleration command instead.
struct EgoInput {
  double delta = 0.0;
  double eta = 0.0;

  InputVec vec() const { return InputVec(delta, eta); }
  static EgoInput from_vec(const InputVec& u) { return {u(0), u(1)}; }
};

enum class EgoModelKind {
  Jerk,          // states (p, phi, v, a), inputs (delta, jerk)
  Acceleration,  // states (p, phi, v), inputs (delta, a); `a` mirrors the input
};

struct EgoParams {
  double l_f = 0.08;
  double l_r = 0.08;
  double T = 0.25;
  double v_min = -1.5;
  double v_max = 1.5;
  double a_min = -0.5;
  double a_max = 0.5;
  double delta_min = -0.3;
  double delta_max = 0.3;
  double length = 0.26;
  double width = 0.25;
  EgoModelKind kind = EgoModelKind::Jerk;

  void validate() const;
};

/// Slip angle of the center of geometry.
double slip_angle(double delta, const EgoParams& p);

StateVec ego_derivative(const StateVec& x, const InputVec& u, const EgoParams& p, StateJac* dfdx = nullptr,
                        InputJac* dfdu = nullptr);
EgoState ego_derivative(const EgoState& x, const EgoInput& u, const EgoParams& p);

/// Classical RK4 with the input held over one sampling interval. The optional
/// outputs receive the exact Jacobians of the discrete map.
StateVec ego_step_rk4(const StateVec& x, const InputVec& u, const EgoParams& p, StateJac* A = nullptr,
                      InputJac* B = nullptr);
EgoState ego_step_rk4(const EgoState& x, const EgoInput& u, const EgoParams& p);

/// Ground-frame velocity of the center of geometry.
Eigen::Vector2d ground_velocity(const EgoState& x, double delta, const EgoParams& p);

/// Double integrator per axis, state (px, vx, py, vy), input (ax, ay).
std::pair<Eigen::Matrix4d, Eigen::Matrix<double, 4, 2>> sv_matrices(double T);

struct SvObservation {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double heading = 0.0;
  long step = 0;
};

/// Ground-frame acceleration from two consecutive velocity observations.
/// Throws NonConsecutiveObservation when the steps are not adjacent.
Eigen::Vector2d estimate_sv_input(const SvObservation& prev, const SvObservation& curr, double T);

}  // namespace reachplan::vehicle
