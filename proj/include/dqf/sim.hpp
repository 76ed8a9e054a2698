#pragma once

// Closed-loop simulation of the rigid body under the pose-following
// controller, with disturbance injection, run metrics and the experiment
// presets.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dqf/controller.hpp"

namespace dqf {

struct ReferenceSpec {
  std::string kind = "helix3d";  // helix3d | sinusoid2d | spline
  HelixParams helix;
  SinusoidParams sinusoid;
  std::string path_file;  // spline only
};

GeometricReference build_reference(const ReferenceSpec& spec);

struct Disturbance {
  enum class Trigger { kTheta, kTime };
  Trigger trigger = Trigger::kTheta;
  double at = 0.0;
  Vec3 dv = Vec3::Zero();  // added to ṗ [m/s]
  Vec3 dw = Vec3::Zero();  // added to ω [rad/s]
};

/// ṗ += dv, ω += dw; everything else is untouched.
AugmentedState inject_disturbance(const AugmentedState& x, const Disturbance& d);

/// Applies a disturbance the first time its trigger is reached and never
/// again.
class DisturbanceLatch {
 public:
  explicit DisturbanceLatch(std::optional<Disturbance> d) : d_(std::move(d)) {}

  bool applied() const { return applied_; }
  /// Returns the (possibly) disturbed state.
  AugmentedState update(double t, const AugmentedState& x);

 private:
  std::optional<Disturbance> d_;
  bool applied_ = false;
};

struct InitialCondition {
  enum class Mode { kOnReference, kRelative, kAbsolute, kRandom };
  Mode mode = Mode::kOnReference;
  std::optional<double> theta;  // defaults to θ₀
  double theta_dot = 0.0;
  // kRelative: p = p_d + offset, q = rotation∘q_d, at rest.
  Vec3 position_offset = Vec3::Zero();
  Vec3 rotation_axis = Vec3::UnitZ();
  double rotation_angle = 0.0;
  // kAbsolute
  RigidBodyState body;
  // kRandom: offset uniform in a ball of this radius, uniform rotation.
  double random_radius = 3.0;
};

struct SimConfig {
  int schema_version = 1;
  std::string name = "run";
  ReferenceSpec reference;
  double mass = 1.0;
  Mat3 inertia = 0.01 * Mat3::Identity();
  ControllerConfig control;
  InitialCondition initial;
  double dt = 1e-3;
  double duration = 40.0;
  double export_rate = 100.0;
  double convergence_tol = 1e-3;
  double convergence_hold = 1.0;
  /// Time after which "after transient" metrics are evaluated.
  double transient_time = 5.0;
  std::optional<Disturbance> disturbance;
  std::uint64_t seed = 0;
};

/// Throws kConfigInvalid describing the first problem found.
void validate_config(const SimConfig& config);

/// Initial augmented state described by config.initial.
AugmentedState initial_state(const SimConfig& config,
                             const GeometricReference& ref);

struct RecordRow {
  double t = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  Vec3 p = Vec3::Zero();
  Quaternion q;
  Vec3 pd = Vec3::Zero();
  Quaternion qd;
  double d_perp = 0.0;
  double err_log_norm = 0.0;
  int lambda = 1;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  double theta_ddot = 0.0;
};

struct RunRecord {
  std::string name;
  std::string config_hash;
  std::vector<RecordRow> rows;
  double theta0 = 0.0;
  double theta_f = 0.0;
  std::optional<double> disturbance_time;
  int saturation_steps = 0;
  int positivity_violations = 0;
  std::vector<std::string> warnings;
};

/// Fixed-step RK4 integration of the closed loop. The controller is a static
/// state feedback, evaluated at every RK4 stage. Throws kConfigInvalid and
/// kNonFiniteState (with the failure time).
RunRecord run_closed_loop(const SimConfig& config);

struct RunMetrics {
  std::optional<double> convergence_time;
  std::optional<double> convergence_theta;
  std::optional<double> hold_end_theta;  // θ when the sustain window ends
  std::optional<double> completion_time;
  std::optional<double> max_d_perp_post_disturbance;
  double final_theta_dot_error = 0.0;  // |θ̇ − θ_vd| at the last sample
  int lambda_switch_count = 0;
  double rotation_path_length = 0.0;   // Σ angle between successive q_e
  double max_err_log_norm = 0.0;
  double final_err_log_norm = 0.0;
  bool theta_monotone = true;
  std::optional<double> min_theta_dot_after_transient;
};

/// Throws kConfigInvalid on an empty record.
RunMetrics compute_metrics(const RunRecord& record, const SimConfig& config);

/// Desired θ̇ the active pose-parameter law steers toward at a row.
double target_theta_dot(const RecordRow& row, const SimConfig& config);

/// "convergence" (8 runs), "velocity" (3), "lambda" (2); kUnknownVariant.
std::vector<SimConfig> preset_fig2(const std::string& variant);
/// Tracking, progressive, medium, conservative. The tracking clock rate is
/// calibrated so its disturbance-free completion time equals the following
/// variants'.
std::vector<SimConfig> preset_fig3();
/// Nominal following-variant config used for calibration (no disturbance).
SimConfig fig3_base_config(const std::string& variant);
/// (θ_f − θ₀) / T, with T the disturbance-free completion time of `following`.
double calibrate_tracking_rate(const SimConfig& following);

/// Preset by CLI name: fig2-convergence | fig2-velocity | fig2-lambda | fig3.
std::vector<SimConfig> preset_by_name(const std::string& name);

// --- serialization (config.cpp / export.cpp) -------------------------------

SimConfig config_from_json_text(const std::string& text);
SimConfig load_config(const std::string& path);
std::string config_to_json_text(const SimConfig& config);
/// FNV-1a 64 of the canonical JSON text, as 16 hex digits.
std::string config_hash(const SimConfig& config);

/// Normative column order.
const std::vector<std::string>& csv_columns();
std::string record_to_csv(const RunRecord& record);
void write_csv(const RunRecord& record, const std::string& path);
std::string summary_to_json_text(const RunRecord& record,
                                 const RunMetrics& metrics);
void write_summary(const RunRecord& record, const RunMetrics& metrics,
                   const std::string& path);

}  // namespace dqf
