#pragma once

// Pose-following error model: the dual quaternion error between the body
// and the reference pose at the current θ, the dual twist error and its
// time derivative.

#include "dqf/reference.hpp"
#include "dqf/rigid_body.hpp"

namespace dqf {

/// Rigid body state augmented with the pose-parameter and its rate.
struct AugmentedState {
  RigidBodyState body;
  double theta = 0.0;
  double theta_dot = 0.0;

  bool all_finite() const;
};

/// q̂_e = q̂∘q̂_d*.
DualQuaternion pose_error(const DualQuaternion& q, const DualQuaternion& qd);

/// ω̂_e = ω̂ + θ̇·Ad_{q̂_e} ω̂_d*.
DualVector twist_error_adjoint(const DualVector& twist, double theta_dot,
                               const DualQuaternion& q_e,
                               const DualVector& twist_d);

/// ω̂_e = ω_e + ε(ṗ_e + p_e×ω_e).
DualVector twist_error_structural(const Vec3& w_e, const Vec3& p_e,
                                  const Vec3& p_e_dot);

/// ω_e = ω + θ̇·Ad_{q_e} ω_d*.
Vec3 rotation_rate_error(const Vec3& w, double theta_dot,
                         const Quaternion& q_e, const Vec3& w_d);
/// p_e = p + Ad_{q_e} p_d*.
Vec3 position_error(const Vec3& p, const Quaternion& q_e, const Vec3& p_d);
/// ṗ_e = ṗ + ω_e×Ad_{q_e}p_d* + θ̇·Ad_{q_e} p̊_d*.
Vec3 position_error_rate(const Vec3& p_dot, const Vec3& w_e,
                         const Quaternion& q_e, const Vec3& p_d,
                         const Vec3& dp_d, double theta_dot);

struct ErrorState {
  DualQuaternion pose;  // q̂_e
  DualVector twist;     // ω̂_e
  Vec3 p_e = Vec3::Zero();
  Vec3 w_e = Vec3::Zero();
};

/// Every quantity the error model needs at one instant, derived from the
/// primitive augmented state.
struct ErrorContext {
  double theta = 0.0;
  double theta_dot = 0.0;
  RigidBodyState body;
  DualState dual;             // q̂, ω̂
  ReferenceSample reference;  // at θ
  DesiredDualState desired;   // q̂_d, ω̂_d, ω̂̊_d at θ
  DualQuaternion q_e;
  DualVector w_e;             // adjoint form
  DualQuaternion q_e_dot;     // ½ ω̂_e∘q̂_e
  DualVector drift;           // F̂
};

/// Throws kThetaOutOfRange when θ is outside the reference.
ErrorContext make_error_context(const AugmentedState& x,
                                const GeometricReference& ref,
                                const BodyParams& params);

/// Error state with p_e, ω_e and the structural twist.
ErrorState error_state(const ErrorContext& ctx);

/// d/dt Ad_{q̂_e} ω̂_d*(θ):
/// q̂̇_e∘ω̂_d*∘q̂_e* + θ̇ q̂_e∘ω̂̊_d*∘q̂_e* + q̂_e∘ω̂_d*∘q̂̇_e*.
DualVector reference_coupling(const ErrorContext& ctx);

/// ω̂̇_e = F̂ + Û + θ̈·Ad_{q̂_e}ω̂_d* + θ̇·reference_coupling.
DualVector error_accel(const ErrorContext& ctx, const DualVector& u_hat,
                       double theta_ddot);
DualVector error_accel(const AugmentedState& x, const GeometricReference& ref,
                       const BodyParams& params, const DualVector& u_hat,
                       double theta_ddot);

}  // namespace dqf
