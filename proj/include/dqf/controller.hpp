#pragma once

// Pose-following control law: feedforward that cancels the error model's
// drift and reference coupling, PD feedback on the dual quaternion
// logarithm with the λ double-cover switch, and the pose-parameter laws
// that generate θ̈.

#include <string>

#include "dqf/error_dynamics.hpp"

namespace dqf {

class ControlGains {
 public:
  /// k̂_p = k̂_v = 3̂, k_θ = 1.
  ControlGains();
  /// Throws kInvalidGains unless every component is strictly positive and
  /// the dual part of kp has three equal entries.
  ControlGains(const DualVector& kp, const DualVector& kv, double k_theta);

  const DualVector& kp() const { return kp_; }
  const DualVector& kv() const { return kv_; }
  double k_theta() const { return k_theta_; }

 private:
  DualVector kp_;
  DualVector kv_;
  double k_theta_;
};

/// Desired pose-parameter rate as a function of θ.
class VelocityProfile {
 public:
  enum class Kind { kConstant, kSinusoidal };

  /// Throws kInvalidProfile unless speed > 0.
  static VelocityProfile constant(double speed);
  /// mean + amplitude·sin(2π·frequency·θ + phase); requires mean > |amplitude|.
  static VelocityProfile sinusoidal(double mean, double amplitude,
                                    double frequency, double phase = 0.0);

  Kind kind() const { return kind_; }
  double mean() const { return mean_; }
  double amplitude() const { return amplitude_; }
  double frequency() const { return frequency_; }
  double phase() const { return phase_; }

  double value(double theta) const;
  /// θ-derivative of value.
  double slope(double theta) const;

 private:
  VelocityProfile() = default;

  Kind kind_ = Kind::kConstant;
  double mean_ = 0.0;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  double phase_ = 0.0;
};

/// Desired pose-parameter rate as a function of transverse distance:
/// v_min + (v_nom − v_min)·exp(−(d/d_scale)²).
struct DistanceMap {
  double v_nom = 0.05;
  double v_min = 0.01;
  double d_scale = 0.5;

  /// Throws kInvalidProfile unless 0 < v_min <= v_nom and d_scale > 0.
  void validate() const;
  double operator()(double distance) const;

  static DistanceMap progressive(double v_nom);
  static DistanceMap medium(double v_nom);
  static DistanceMap conservative(double v_nom);
  /// "progressive" | "medium" | "conservative"; kUnknownVariant otherwise.
  static DistanceMap preset(const std::string& name, double v_nom);
};

enum class ControlMode { kFollowing, kTracking };
enum class PoseParamLaw { kVelocityAssignment, kDistanceFeedback };

struct ControllerConfig {
  ControlGains gains;
  ControlMode mode = ControlMode::kFollowing;
  PoseParamLaw law = PoseParamLaw::kVelocityAssignment;
  VelocityProfile profile = VelocityProfile::constant(0.05);
  DistanceMap distance_map;
  bool lambda_enabled = true;
  double theta_ddot_limit = 10.0;
  /// θ̇ of the tracking clock; only read in tracking mode.
  double tracking_rate = 0.05;
};

/// +1 when the scalar part of the real quaternion of q̂_e is >= 0, else −1.
int lambda_switch(const DualQuaternion& q_e);

/// Û_FB = −2 k̂_p⊙ln(λq̂_e) − k̂_v⊙ω̂_e.
DualVector feedback(const DualQuaternion& q_e, const DualVector& w_e,
                    const ControlGains& gains, int lambda);
DualVector feedback(const DualQuaternion& q_e, const DualVector& w_e,
                    const ControlGains& gains);

/// Û_FF = −F̂ − U_θ·Ad_{q̂_e}ω̂_d* − θ̇·d/dt(Ad_{q̂_e}ω̂_d*).
DualVector feedforward(const ErrorContext& ctx, double u_theta);

/// −k_θ(θ̇ − θ_vd(θ)) + θ̇·θ̊_vd(θ).
double pose_param_velocity_assignment(double theta, double theta_dot,
                                      const VelocityProfile& profile,
                                      double k_theta);

/// −k_θ(θ̇ − θ_vd(d⊥)).
double pose_param_distance_feedback(double theta_dot, double d_perp,
                                    const DistanceMap& map, double k_theta);

/// Distance from p to p_d with the component along the reference tangent
/// removed.
double transverse_distance(const Vec3& p, const ReferenceSample& ref);

struct ControlOutput {
  Wrench wrench;
  double theta_ddot = 0.0;
  DualVector u_hat;
  DualVector u_ff;
  DualVector u_fb;
  int lambda = 1;
  bool saturated = false;
  double d_perp = 0.0;
  double err_log_norm = 0.0;  // ‖ln λq̂_e‖
  ErrorContext context;
};

/// Û = Û_FF + Û_FB mapped back to a wrench, plus θ̈ from the active law.
/// `terminal` marks the end-of-reference hold (θ = θ_f, θ̈ = 0). Tracking
/// mode also uses θ̈ = 0. Throws kThetaOutOfRange.
ControlOutput compute_control(const AugmentedState& x,
                              const GeometricReference& ref,
                              const BodyParams& params,
                              const ControllerConfig& config,
                              bool terminal = false);

}  // namespace dqf
