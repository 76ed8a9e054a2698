#pragma once

// Free rigid body driven directly by a force/torque wrench, in vector form
// and in unit dual quaternion form.
//
// Conventions: p and ṗ are expressed in the same frame as ω, attitude
// kinematics are q̇ = ½ ω∘q, and the dual twist is ω̂ = ω + ε(ṗ + p×ω).

#include "dqf/dual_quaternion.hpp"

namespace dqf {

class BodyParams {
 public:
  /// Throws kInvalidParams unless mass > 0 and inertia is symmetric positive
  /// definite.
  BodyParams(double mass, const Mat3& inertia);

  double mass() const { return mass_; }
  const Mat3& inertia() const { return inertia_; }
  const Mat3& inertia_inv() const { return inertia_inv_; }

 private:
  double mass_;
  Mat3 inertia_;
  Mat3 inertia_inv_;
};

struct RigidBodyState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();  // ṗ
  Quaternion q;
  Vec3 w = Vec3::Zero();  // ω

  bool all_finite() const;
};

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

struct StateDerivative {
  Vec3 p_dot = Vec3::Zero();
  Vec3 v_dot = Vec3::Zero();
  Quaternion q_dot{0.0, Vec3::Zero()};
  Vec3 w_dot = Vec3::Zero();
};

/// x + h·dx, without renormalizing q.
RigidBodyState advance(const RigidBodyState& x, const StateDerivative& dx,
                       double h);

StateDerivative dynamics_deriv(const RigidBodyState& x, const Wrench& u,
                               const BodyParams& params);

struct DualState {
  DualQuaternion pose;
  DualVector twist;
};

DualState to_dual_state(const RigidBodyState& x);

/// Inverse of to_dual_state (ω = real twist, ṗ = dual twist − p×ω).
RigidBodyState from_dual_state(const DualState& s);

/// F̂: the state-only part of the dual twist derivative.
DualVector drift_term(const RigidBodyState& x, const BodyParams& params);

/// Û = J⁻¹τ + ε(f/m + p×J⁻¹τ).
DualVector control_term(const Wrench& u, const RigidBodyState& x,
                        const BodyParams& params);

/// Inverse of control_term: τ = J·real(Û), f = m·(dual(Û) − p×real(Û)).
Wrench wrench_from_control(const DualVector& u_hat, const RigidBodyState& x,
                           const BodyParams& params);

/// One fixed-step RK4 step with a constant wrench; the attitude is
/// renormalized afterwards. Throws kNonFiniteState.
RigidBodyState integrate_step(const RigidBodyState& x, const Wrench& u,
                              const BodyParams& params, double dt);

/// RK4 step of the dual form q̂̇ = ½ω̂∘q̂, ω̂̇ = F̂ + Û. The wrench is held
/// constant over the step. Only used to cross-check the vector form.
DualState integrate_dual_step(const DualState& s, const Wrench& u,
                              const BodyParams& params, double dt);

}  // namespace dqf
