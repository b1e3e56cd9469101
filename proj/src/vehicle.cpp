#include "reachplan/vehicle.hpp"

#include <cmath>

#include "reachplan/error.hpp"

namespace reachplan::vehicle {

void EgoParams::validate() const {
  if (!(l_f > 0.0 && l_r > 0.0)) throw Error(ErrorCode::InvalidArgument, "EgoParams: axle distances must be positive");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "EgoParams: T must be positive");
  if (!(v_min < v_max && a_min < a_max && delta_min < delta_max)) {
    throw Error(ErrorCode::InvalidArgument, "EgoParams: lower bounds must be below upper bounds");
  }
  if (!(length >= 0.0 && width >= 0.0)) throw Error(ErrorCode::InvalidArgument, "EgoParams: negative footprint");
}

double slip_angle(double delta, const EgoParams& p) {
  return std::atan(p.l_r / (p.l_f + p.l_r) * std::tan(delta));
}

StateVec ego_derivative(const StateVec& x, const InputVec& u, const EgoParams& p, StateJac* dfdx, InputJac* dfdu) {
  const double phi = x(2);
  const double v = x(3);
  const double k = p.l_r / (p.l_f + p.l_r);
  const double tan_d = std::tan(u(0));
  const double beta = std::atan(k * tan_d);
  const double c = std::cos(phi + beta);
  const double s = std::sin(phi + beta);
  const double sb = std::sin(beta);
  const bool jerk = p.kind == EgoModelKind::Jerk;

  StateVec f;
  f << v * c, v * s, v / p.l_r * sb, jerk ? x(4) : u(1), jerk ? u(1) : 0.0;

  if (dfdx) {
    dfdx->setZero();
    (*dfdx)(0, 2) = -v * s;
    (*dfdx)(0, 3) = c;
    (*dfdx)(1, 2) = v * c;
    (*dfdx)(1, 3) = s;
    (*dfdx)(2, 3) = sb / p.l_r;
    if (jerk) (*dfdx)(3, 4) = 1.0;
  }
  if (dfdu) {
    dfdu->setZero();
    const double sec2 = 1.0 + tan_d * tan_d;
    const double dbeta = k * sec2 / (1.0 + k * k * tan_d * tan_d);
    (*dfdu)(0, 0) = -v * s * dbeta;
    (*dfdu)(1, 0) = v * c * dbeta;
    (*dfdu)(2, 0) = v / p.l_r * std::cos(beta) * dbeta;
    if (jerk) {
      (*dfdu)(4, 1) = 1.0;
    } else {
      (*dfdu)(3, 1) = 1.0;
    }
  }
  return f;
}

EgoState ego_derivative(const EgoState& x, const EgoInput& u, const EgoParams& p) {
  return EgoState::from_vec(ego_derivative(x.vec(), u.vec(), p));
}

StateVec ego_step_rk4(const StateVec& x, const InputVec& u, const EgoParams& p, StateJac* A, InputJac* B) {
  const double h = p.T;
  const bool want = A || B;
  StateJac F1, F2, F3, F4;
  InputJac G1, G2, G3, G4;
  const StateVec k1 = ego_derivative(x, u, p, want ? &F1 : nullptr, want ? &G1 : nullptr);
  const StateVec x2 = x + 0.5 * h * k1;
  const StateVec k2 = ego_derivative(x2, u, p, want ? &F2 : nullptr, want ? &G2 : nullptr);
  const StateVec x3 = x + 0.5 * h * k2;
  const StateVec k3 = ego_derivative(x3, u, p, want ? &F3 : nullptr, want ? &G3 : nullptr);
  const StateVec x4 = x + h * k3;
  const StateVec k4 = ego_derivative(x4, u, p, want ? &F4 : nullptr, want ? &G4 : nullptr);
  StateVec next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  if (want) {
    const StateJac I = StateJac::Identity();
    // dk_i = F_i (dx + c dk_{i-1}) + G_i du
    const StateJac K1x = F1;
    const InputJac K1u = G1;
    const StateJac K2x = F2 * (I + 0.5 * h * K1x);
    const InputJac K2u = F2 * (0.5 * h * K1u) + G2;
    const StateJac K3x = F3 * (I + 0.5 * h * K2x);
    const InputJac K3u = F3 * (0.5 * h * K2u) + G3;
    const StateJac K4x = F4 * (I + h * K3x);
    const InputJac K4u = F4 * (h * K3u) + G4;
    if (A) *A = I + h / 6.0 * (K1x + 2.0 * K2x + 2.0 * K3x + K4x);
    if (B) *B = h / 6.0 * (K1u + 2.0 * K2u + 2.0 * K3u + K4u);
  }
  if (p.kind == EgoModelKind::Acceleration) {
    // The acceleration slot records the command that was applied.
    next(4) = u(1);
    if (A) A->row(4).setZero();
    if (B) {
      B->row(4).setZero();
      (*B)(4, 1) = 1.0;
    }
  }
  return next;
}

EgoState ego_step_rk4(const EgoState& x, const EgoInput& u, const EgoParams& p) {
  return EgoState::from_vec(ego_step_rk4(x.vec(), u.vec(), p));
}

Eigen::Vector2d ground_velocity(const EgoState& x, double delta, const EgoParams& p) {
  const double beta = slip_angle(delta, p);
  return {x.v * std::cos(x.phi + beta), x.v * std::sin(x.phi + beta)};
}

std::pair<Eigen::Matrix4d, Eigen::Matrix<double, 4, 2>> sv_matrices(double T) {
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "sv_matrices: T must be positive");
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  A(0, 1) = T;
  A(2, 3) = T;
  Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
  B(0, 0) = T * T / 2.0;
  B(1, 0) = T;
  B(2, 1) = T * T / 2.0;
  B(3, 1) = T;
  return {A, B};
}

Eigen::Vector2d estimate_sv_input(const SvObservation& prev, const SvObservation& curr, double T) {
  if (curr.step != prev.step + 1) {
    throw Error(ErrorCode::NonConsecutiveObservation, "estimate_sv_input: observations must be adjacent steps");
  }
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "estimate_sv_input: T must be positive");
  return (curr.velocity - prev.velocity) / T;
}

}  // namespace reachplan::vehicle
