#include "dqf/error_dynamics.hpp"

#include <cmath>

namespace dqf {

bool AugmentedState::all_finite() const {
  return body.all_finite() && std::isfinite(theta) && std::isfinite(theta_dot);
}

DualQuaternion pose_error(const DualQuaternion& q, const DualQuaternion& qd) {
  return q * qd.conj();
}

DualVector twist_error_adjoint(const DualVector& twist, double theta_dot,
                               const DualQuaternion& q_e,
                               const DualVector& twist_d) {
  return twist + theta_dot * dq_adjoint(q_e, -twist_d);
}

DualVector twist_error_structural(const Vec3& w_e, const Vec3& p_e,
                                  const Vec3& p_e_dot) {
  return {w_e, p_e_dot + p_e.cross(w_e)};
}

Vec3 rotation_rate_error(const Vec3& w, double theta_dot,
                         const Quaternion& q_e, const Vec3& w_d) {
  return w + theta_dot * q_e.rotate(-w_d);
}

Vec3 position_error(const Vec3& p, const Quaternion& q_e, const Vec3& p_d) {
  return p + q_e.rotate(-p_d);
}

Vec3 position_error_rate(const Vec3& p_dot, const Vec3& w_e,
                         const Quaternion& q_e, const Vec3& p_d,
                         const Vec3& dp_d, double theta_dot) {
  return p_dot + w_e.cross(q_e.rotate(-p_d)) + theta_dot * q_e.rotate(-dp_d);
}

ErrorContext make_error_context(const AugmentedState& x,
                                const GeometricReference& ref,
                                const BodyParams& params) {
  ErrorContext ctx;
  ctx.theta = x.theta;
  ctx.theta_dot = x.theta_dot;
  ctx.body = x.body;
  ctx.dual = to_dual_state(x.body);
  ctx.reference = ref.sample(x.theta);
  ctx.desired = desired_from_sample(ctx.reference);
  ctx.q_e = pose_error(ctx.dual.pose, ctx.desired.pose);
  ctx.w_e = twist_error_adjoint(ctx.dual.twist, x.theta_dot, ctx.q_e,
                                ctx.desired.twist);
  ctx.q_e_dot = 0.5 * (DualQuaternion::from_vector(ctx.w_e) * ctx.q_e);
  ctx.drift = drift_term(x.body, params);
  return ctx;
}

ErrorState error_state(const ErrorContext& ctx) {
  ErrorState e;
  e.pose = ctx.q_e;
  const Quaternion& q_e = ctx.q_e.real;
  e.w_e = rotation_rate_error(ctx.body.w, ctx.theta_dot, q_e, ctx.reference.w);
  e.p_e = position_error(ctx.body.p, q_e, ctx.reference.p);
  const Vec3 p_e_dot =
      position_error_rate(ctx.body.v, e.w_e, q_e, ctx.reference.p,
                          ctx.reference.dp, ctx.theta_dot);
  e.twist = twist_error_structural(e.w_e, e.p_e, p_e_dot);
  return e;
}

DualVector reference_coupling(const ErrorContext& ctx) {
  const DualQuaternion wd_conj = DualQuaternion::from_vector(-ctx.desired.twist);
  const DualQuaternion dwd_conj =
      DualQuaternion::from_vector(-ctx.desired.twist_rate);
  const DualQuaternion& q_e = ctx.q_e;
  const DualQuaternion sum =
      ctx.q_e_dot * wd_conj * q_e.conj() +
      ctx.theta_dot * (q_e * dwd_conj * q_e.conj()) +
      q_e * wd_conj * ctx.q_e_dot.conj();
  return sum.vector_part();
}

DualVector error_accel(const ErrorContext& ctx, const DualVector& u_hat,
                       double theta_ddot) {
  return ctx.drift + u_hat +
         theta_ddot * dq_adjoint(ctx.q_e, -ctx.desired.twist) +
         ctx.theta_dot * reference_coupling(ctx);
}

DualVector error_accel(const AugmentedState& x, const GeometricReference& ref,
                       const BodyParams& params, const DualVector& u_hat,
                       double theta_ddot) {
  return error_accel(make_error_context(x, ref, params), u_hat, theta_ddot);
}

}  // namespace dqf
