#include "dqf/rigid_body.hpp"

#include <cmath>

#include "dqf/errors.hpp"

namespace dqf {

BodyParams::BodyParams(double mass, const Mat3& inertia)
    : mass_(mass), inertia_(inertia) {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorCode::kInvalidParams, "mass must be positive");
  }
  if (!inertia.allFinite() ||
      (inertia - inertia.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * inertia.cwiseAbs().maxCoeff()) {
    throw Error(ErrorCode::kInvalidParams, "inertia must be symmetric");
  }
  Eigen::LLT<Mat3> llt(inertia);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidParams,
                "inertia must be positive definite");
  }
  inertia_inv_ = llt.solve(Mat3::Identity());
}

bool RigidBodyState::all_finite() const {
  return p.allFinite() && v.allFinite() && std::isfinite(q.w) &&
         q.v.allFinite() && w.allFinite();
}

RigidBodyState advance(const RigidBodyState& x, const StateDerivative& dx,
                       double h) {
  return {x.p + h * dx.p_dot, x.v + h * dx.v_dot, x.q + h * dx.q_dot,
          x.w + h * dx.w_dot};
}

StateDerivative dynamics_deriv(const RigidBodyState& x, const Wrench& u,
                               const BodyParams& params) {
  StateDerivative d;
  d.p_dot = x.v;
  d.v_dot = u.force / params.mass();
  d.q_dot = 0.5 * (Quaternion::pure(x.w) * x.q);
  d.w_dot = params.inertia_inv() *
            (u.torque - x.w.cross(params.inertia() * x.w));
  return d;
}

DualState to_dual_state(const RigidBodyState& x) {
  return {dq_from_pose(x.p, x.q), {x.w, x.v + x.p.cross(x.w)}};
}

RigidBodyState from_dual_state(const DualState& s) {
  const Pose pose = dq_to_pose(s.pose);
  RigidBodyState x;
  x.p = pose.p;
  x.q = pose.q;
  x.w = s.twist.real;
  x.v = s.twist.dual - x.p.cross(x.w);
  return x;
}

DualVector drift_term(const RigidBodyState& x, const BodyParams& params) {
  // Gyroscopic acceleration, signed as it enters ω̇.
  const Vec3 a = -params.inertia_inv() * x.w.cross(params.inertia() * x.w);
  return {a, x.p.cross(a) + x.v.cross(x.w)};
}

DualVector control_term(const Wrench& u, const RigidBodyState& x,
                        const BodyParams& params) {
  const Vec3 alpha = params.inertia_inv() * u.torque;
  return {alpha, u.force / params.mass() + x.p.cross(alpha)};
}

Wrench wrench_from_control(const DualVector& u_hat, const RigidBodyState& x,
                           const BodyParams& params) {
  return {params.mass() * (u_hat.dual - x.p.cross(u_hat.real)),
          params.inertia() * u_hat.real};
}

RigidBodyState integrate_step(const RigidBodyState& x, const Wrench& u,
                              const BodyParams& params, double dt) {
  const StateDerivative k1 = dynamics_deriv(x, u, params);
  const StateDerivative k2 = dynamics_deriv(advance(x, k1, 0.5 * dt), u, params);
  const StateDerivative k3 = dynamics_deriv(advance(x, k2, 0.5 * dt), u, params);
  const StateDerivative k4 = dynamics_deriv(advance(x, k3, dt), u, params);
  RigidBodyState next = x;
  next.p += dt / 6.0 * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
  next.v += dt / 6.0 * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  next.q = next.q + (dt / 6.0) * (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot +
                                  k4.q_dot);
  next.w += dt / 6.0 * (k1.w_dot + 2.0 * k2.w_dot + 2.0 * k3.w_dot + k4.w_dot);
  if (!next.all_finite()) {
    throw Error(ErrorCode::kNonFiniteState, "rigid body step diverged");
  }
  next.q = next.q.normalized();
  return next;
}

namespace {

DualState dual_deriv(const DualState& s, const Wrench& u,
                     const BodyParams& params) {
  // Positions are decoded without the unit check: RK4 stages drift off the
  // unit manifold by O(dt⁵), which is below any useful tolerance.
  RigidBodyState x;
  x.q = s.pose.real;
  x.p = 2.0 * (s.pose.dual * s.pose.real.conj()).v;
  x.w = s.twist.real;
  x.v = s.twist.dual - x.p.cross(x.w);
  const DualQuaternion pose_dot =
      0.5 * (DualQuaternion::from_vector(s.twist) * s.pose);
  return {pose_dot, drift_term(x, params) + control_term(u, x, params)};
}

DualState axpy(const DualState& s, const DualState& d, double h) {
  return {s.pose + h * d.pose, s.twist + h * d.twist};
}

}  // namespace

DualState integrate_dual_step(const DualState& s, const Wrench& u,
                              const BodyParams& params, double dt) {
  const DualState k1 = dual_deriv(s, u, params);
  const DualState k2 = dual_deriv(axpy(s, k1, 0.5 * dt), u, params);
  const DualState k3 = dual_deriv(axpy(s, k2, 0.5 * dt), u, params);
  const DualState k4 = dual_deriv(axpy(s, k3, dt), u, params);
  DualState next = s;
  next = axpy(next, k1, dt / 6.0);
  next = axpy(next, k2, dt / 3.0);
  next = axpy(next, k3, dt / 3.0);
  next = axpy(next, k4, dt / 6.0);
  if (!next.twist.all_finite()) {
    throw Error(ErrorCode::kNonFiniteState, "dual form step diverged");
  }
  // Project back onto the unit group: normalize the real part and remove
  // the component of the dual part along it.
  const double n = next.pose.real.norm();
  Quaternion r = (1.0 / n) * next.pose.real;
  Quaternion d = (1.0 / n) * next.pose.dual;
  d = d - dot(r, d) * r;
  next.pose = {r, d};
  return next;
}

}  // namespace dqf
