#include "dqf/controller.hpp"

#include <algorithm>
#include <cmath>

#include "dqf/errors.hpp"

namespace dqf {

ControlGains::ControlGains()
    : kp_(DualVector::uniform(3.0)), kv_(DualVector::uniform(3.0)), k_theta_(1.0) {}

ControlGains::ControlGains(const DualVector& kp, const DualVector& kv,
                           double k_theta)
    : kp_(kp), kv_(kv), k_theta_(k_theta) {
  auto positive = [](const Vec3& v) { return v.allFinite() && (v.array() > 0.0).all(); };
  if (!positive(kp.real) || !positive(kp.dual) || !positive(kv.real) ||
      !positive(kv.dual)) {
    throw Error(ErrorCode::kInvalidGains, "all gain components must be > 0");
  }
  if (kp.dual.x() != kp.dual.y() || kp.dual.y() != kp.dual.z()) {
    throw Error(ErrorCode::kInvalidGains,
                "dual part of kp must have equal components");
  }
  if (!(k_theta > 0.0) || !std::isfinite(k_theta)) {
    throw Error(ErrorCode::kInvalidGains, "k_theta must be > 0");
  }
}

VelocityProfile VelocityProfile::constant(double speed) {
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw Error(ErrorCode::kInvalidProfile, "constant profile must be > 0");
  }
  VelocityProfile p;
  p.kind_ = Kind::kConstant;
  p.mean_ = speed;
  return p;
}

VelocityProfile VelocityProfile::sinusoidal(double mean, double amplitude,
                                            double frequency, double phase) {
  if (!(mean > std::abs(amplitude)) || !std::isfinite(mean) ||
      !std::isfinite(frequency) || !std::isfinite(phase)) {
    throw Error(ErrorCode::kInvalidProfile,
                "sinusoidal profile must stay positive (mean > |amplitude|)");
  }
  VelocityProfile p;
  p.kind_ = Kind::kSinusoidal;
  p.mean_ = mean;
  p.amplitude_ = amplitude;
  p.frequency_ = frequency;
  p.phase_ = phase;
  return p;
}

double VelocityProfile::value(double theta) const {
  if (kind_ == Kind::kConstant) return mean_;
  return mean_ + amplitude_ * std::sin(2.0 * M_PI * frequency_ * theta + phase_);
}

double VelocityProfile::slope(double theta) const {
  if (kind_ == Kind::kConstant) return 0.0;
  const double k = 2.0 * M_PI * frequency_;
  return amplitude_ * k * std::cos(k * theta + phase_);
}

void DistanceMap::validate() const {
  if (!(v_min > 0.0 && v_min <= v_nom && d_scale > 0.0) ||
      !std::isfinite(v_nom) || !std::isfinite(d_scale)) {
    throw Error(ErrorCode::kInvalidProfile,
                "distance map needs 0 < v_min <= v_nom and d_scale > 0");
  }
}

double DistanceMap::operator()(double distance) const {
  const double r = distance / d_scale;
  return v_min + (v_nom - v_min) * std::exp(-r * r);
}

DistanceMap DistanceMap::progressive(double v_nom) {
  return {v_nom, 0.5 * v_nom, 0.3};
}

DistanceMap DistanceMap::medium(double v_nom) {
  return {v_nom, 0.25 * v_nom, 0.2};
}

DistanceMap DistanceMap::conservative(double v_nom) {
  return {v_nom, 0.05 * v_nom, 0.1};
}

DistanceMap DistanceMap::preset(const std::string& name, double v_nom) {
  if (name == "progressive") return progressive(v_nom);
  if (name == "medium") return medium(v_nom);
  if (name == "conservative") return conservative(v_nom);
  throw Error(ErrorCode::kUnknownVariant, "distance map preset " + name);
}

int lambda_switch(const DualQuaternion& q_e) { return q_e.real.w >= 0.0 ? 1 : -1; }

DualVector feedback(const DualQuaternion& q_e, const DualVector& w_e,
                    const ControlGains& gains, int lambda) {
  const DualVector log_err = dq_log(static_cast<double>(lambda) * q_e);
  return -2.0 * gain_apply(gains.kp(), log_err) - gain_apply(gains.kv(), w_e);
}

DualVector feedback(const DualQuaternion& q_e, const DualVector& w_e,
                    const ControlGains& gains) {
  return feedback(q_e, w_e, gains, lambda_switch(q_e));
}

DualVector feedforward(const ErrorContext& ctx, double u_theta) {
  return -ctx.drift - u_theta * dq_adjoint(ctx.q_e, -ctx.desired.twist) -
         ctx.theta_dot * reference_coupling(ctx);
}

double pose_param_velocity_assignment(double theta, double theta_dot,
                                      const VelocityProfile& profile,
                                      double k_theta) {
  return -k_theta * (theta_dot - profile.value(theta)) +
         theta_dot * profile.slope(theta);
}

double pose_param_distance_feedback(double theta_dot, double d_perp,
                                    const DistanceMap& map, double k_theta) {
  return -k_theta * (theta_dot - map(d_perp));
}

double transverse_distance(const Vec3& p, const ReferenceSample& ref) {
  const Vec3 offset = p - ref.p;
  const double n = ref.dp.norm();
  if (n == 0.0) return offset.norm();
  const Vec3 t = ref.dp / n;
  return (offset - offset.dot(t) * t).norm();
}

ControlOutput compute_control(const AugmentedState& x,
                              const GeometricReference& ref,
                              const BodyParams& params,
                              const ControllerConfig& config, bool terminal) {
  ControlOutput out;
  out.context = make_error_context(x, ref, params);
  const ErrorContext& ctx = out.context;
  out.d_perp = transverse_distance(x.body.p, ctx.reference);

  double u_theta = 0.0;
  if (!terminal && config.mode == ControlMode::kFollowing) {
    const double k = config.gains.k_theta();
    if (config.law == PoseParamLaw::kVelocityAssignment) {
      u_theta = pose_param_velocity_assignment(x.theta, x.theta_dot,
                                               config.profile, k);
    } else {
      u_theta = pose_param_distance_feedback(x.theta_dot, out.d_perp,
                                             config.distance_map, k);
    }
    const double limit = config.theta_ddot_limit;
    if (std::abs(u_theta) > limit) {
      u_theta = std::clamp(u_theta, -limit, limit);
      out.saturated = true;
    }
  }
  out.theta_ddot = u_theta;

  out.lambda = config.lambda_enabled ? lambda_switch(ctx.q_e) : 1;
  out.u_fb = feedback(ctx.q_e, ctx.w_e, config.gains, out.lambda);
  out.u_ff = feedforward(ctx, u_theta);
  out.u_hat = out.u_ff + out.u_fb;
  out.wrench = wrench_from_control(out.u_hat, x.body, params);
  out.err_log_norm = dq_log(static_cast<double>(out.lambda) * ctx.q_e).norm();
  return out;
}

}  // namespace dqf
