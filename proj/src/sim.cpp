#include "dqf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dqf/errors.hpp"

namespace dqf {

GeometricReference build_reference(const ReferenceSpec& spec) {
  if (spec.kind == "helix3d") return build_helix3d(spec.helix);
  if (spec.kind == "sinusoid2d") return build_sinusoid2d(spec.sinusoid);
  if (spec.kind == "spline") {
    return build_spline_reference(load_path_samples(spec.path_file));
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown reference kind " + spec.kind);
}

AugmentedState inject_disturbance(const AugmentedState& x, const Disturbance& d) {
  AugmentedState out = x;
  out.body.v += d.dv;
  out.body.w += d.dw;
  return out;
}

AugmentedState DisturbanceLatch::update(double t, const AugmentedState& x) {
  if (!d_ || applied_) return x;
  const double probe = d_->trigger == Disturbance::Trigger::kTheta ? x.theta : t;
  if (probe < d_->at) return x;
  applied_ = true;
  return inject_disturbance(x, *d_);
}

void validate_config(const SimConfig& c) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kConfigInvalid, msg);
  };
  if (c.schema_version != 1) fail("unsupported schema_version");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("dt must be > 0");
  if (!(c.duration > 0.0) || !std::isfinite(c.duration)) fail("duration must be > 0");
  if (!(c.export_rate > 0.0)) fail("export_rate must be > 0");
  const double per_export = 1.0 / (c.export_rate * c.dt);
  if (per_export < 1.0 - 1e-9 ||
      std::abs(per_export - std::round(per_export)) > 1e-6 * per_export) {
    fail("1/(export_rate·dt) must be a positive integer");
  }
  if (!(c.convergence_tol > 0.0)) fail("convergence tolerance must be > 0");
  if (!(c.convergence_hold >= 0.0)) fail("convergence hold must be >= 0");
  if (c.control.mode == ControlMode::kTracking && !(c.control.tracking_rate > 0.0)) {
    fail("tracking_rate must be > 0");
  }
  if (!(c.control.theta_ddot_limit > 0.0)) fail("theta_ddot_limit must be > 0");
  try {
    BodyParams(c.mass, c.inertia);
    c.control.distance_map.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (c.disturbance && !(c.disturbance->dv.allFinite() && c.disturbance->dw.allFinite())) {
    fail("disturbance must be finite");
  }
}

AugmentedState initial_state(const SimConfig& config,
                             const GeometricReference& ref) {
  const InitialCondition& ic = config.initial;
  AugmentedState x;
  x.theta = ic.theta.value_or(ref.theta0());
  if (x.theta < ref.theta0() || x.theta > ref.theta_f()) {
    throw Error(ErrorCode::kConfigInvalid, "initial θ outside the reference");
  }
  x.theta_dot = config.control.mode == ControlMode::kTracking
                    ? config.control.tracking_rate
                    : ic.theta_dot;
  const ReferenceSample s = ref.sample(x.theta);
  switch (ic.mode) {
    case InitialCondition::Mode::kOnReference:
      // Matched twist: ω̂ = θ̇ ω̂_d.
      x.body.p = s.p;
      x.body.q = s.q;
      x.body.w = x.theta_dot * s.w;
      x.body.v = x.theta_dot * s.dp;
      break;
    case InitialCondition::Mode::kRelative:
      x.body.p = s.p + ic.position_offset;
      x.body.q = Quaternion::from_axis_angle(ic.rotation_axis, ic.rotation_angle) * s.q;
      break;
    case InitialCondition::Mode::kAbsolute:
      x.body = ic.body;
      x.body.q = x.body.q.normalized();
      break;
    case InitialCondition::Mode::kRandom: {
      std::mt19937_64 rng(config.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Vec3 dir(normal(rng), normal(rng), normal(rng));
      const double radius = ic.random_radius * std::cbrt(unit(rng));
      x.body.p = s.p + radius * dir.normalized();
      Quaternion q{normal(rng), Vec3(normal(rng), normal(rng), normal(rng))};
      x.body.q = q.normalized();
      break;
    }
  }
  return x;
}

namespace {

struct AugmentedDerivative {
  StateDerivative body;
  double theta_dot = 0.0;
  double theta_ddot = 0.0;
};

AugmentedState advance(const AugmentedState& x, const AugmentedDerivative& d,
                       double h) {
  return {dqf::advance(x.body, d.body, h), x.theta + h * d.theta_dot,
          x.theta_dot + h * d.theta_ddot};
}

class ClosedLoop {
 public:
  ClosedLoop(const SimConfig& config, const GeometricReference& ref)
      : config_(config), ref_(ref), params_(config.mass, config.inertia) {}

  ControlOutput control(const AugmentedState& x, bool terminal) const {
    AugmentedState clamped = x;
    clamped.theta = ref_.clamp(x.theta);
    return compute_control(clamped, ref_, params_, config_.control, terminal);
  }

  AugmentedDerivative deriv(const AugmentedState& x, bool terminal) const {
    const ControlOutput u = control(x, terminal);
    return {dynamics_deriv(x.body, u.wrench, params_),
            terminal ? 0.0 : x.theta_dot, u.theta_ddot};
  }

  AugmentedState step(const AugmentedState& x, bool terminal) const {
    const double dt = config_.dt;
    const AugmentedDerivative k1 = deriv(x, terminal);
    const AugmentedDerivative k2 = deriv(advance(x, k1, 0.5 * dt), terminal);
    const AugmentedDerivative k3 = deriv(advance(x, k2, 0.5 * dt), terminal);
    const AugmentedDerivative k4 = deriv(advance(x, k3, dt), terminal);
    AugmentedState next = advance(x, k1, dt / 6.0);
    next = advance(next, k2, dt / 3.0);
    next = advance(next, k3, dt / 3.0);
    next = advance(next, k4, dt / 6.0);
    next.body.q = next.body.q.normalized();
    return next;
  }

 private:
  const SimConfig& config_;
  const GeometricReference& ref_;
  BodyParams params_;
};

}  // namespace

RunRecord run_closed_loop(const SimConfig& config) {
  validate_config(config);
  const GeometricReference ref = build_reference(config.reference);
  const ClosedLoop loop(config, ref);

  RunRecord record;
  record.name = config.name;
  record.config_hash = config_hash(config);
  record.theta0 = ref.theta0();
  record.theta_f = ref.theta_f();

  AugmentedState x = initial_state(config, ref);
  DisturbanceLatch latch(config.disturbance);
  bool terminal = x.theta >= ref.theta_f();
  if (terminal) x.theta_dot = 0.0;

  const long steps = std::lround(config.duration / config.dt);
  const long export_every = std::lround(1.0 / (config.export_rate * config.dt));
  const bool following = config.control.mode == ControlMode::kFollowing;
  bool positivity_logged = false;

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    if (!latch.applied()) {
      x = latch.update(t, x);
      if (latch.applied()) record.disturbance_time = t;
    }
    const ControlOutput out = loop.control(x, terminal);
    if (out.saturated) ++record.saturation_steps;
    if (following && !terminal && t > config.transient_time && x.theta_dot <= 0.0) {
      ++record.positivity_violations;
      if (!positivity_logged) {
        record.warnings.push_back("θ̇ <= 0 at t = " + std::to_string(t));
        positivity_logged = true;
      }
    }
    if (k % export_every == 0) {
      RecordRow row;
      row.t = t;
      row.theta = x.theta;
      row.theta_dot = x.theta_dot;
      row.p = x.body.p;
      row.q = x.body.q;
      row.pd = out.context.reference.p;
      row.qd = out.context.reference.q;
      row.d_perp = out.d_perp;
      row.err_log_norm = out.err_log_norm;
      row.lambda = out.lambda;
      row.force = out.wrench.force;
      row.torque = out.wrench.torque;
      row.theta_ddot = out.theta_ddot;
      record.rows.push_back(row);
    }
    if (k >= steps) break;

    x = loop.step(x, terminal);
    if (!x.all_finite()) {
      throw Error(ErrorCode::kNonFiniteState,
                  "state diverged at t = " + std::to_string(t + config.dt));
    }
    if (!terminal && x.theta >= ref.theta_f()) {
      // End of reference: hold θ_f and regulate to the final pose.
      x.theta = ref.theta_f();
      x.theta_dot = 0.0;
      terminal = true;
    }
  }
  if (record.saturation_steps > 0) {
    record.warnings.push_back("θ̈ saturated for " +
                              std::to_string(record.saturation_steps) + " steps");
  }
  return record;
}

double target_theta_dot(const RecordRow& row, const SimConfig& config) {
  const ControllerConfig& c = config.control;
  if (c.mode == ControlMode::kTracking) return c.tracking_rate;
  if (c.law == PoseParamLaw::kVelocityAssignment) return c.profile.value(row.theta);
  return c.distance_map(row.d_perp);
}

RunMetrics compute_metrics(const RunRecord& record, const SimConfig& config) {
  if (record.rows.empty()) {
    throw Error(ErrorCode::kConfigInvalid, "empty run record");
  }
  const auto& rows = record.rows;
  RunMetrics m;

  // Earliest sample from which the error stays below tolerance for the whole
  // hold window; the window has to fit inside the record.
  const double tol = config.convergence_tol;
  const double hold = config.convergence_hold;
  std::size_t below_since = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].err_log_norm < tol) {
      if (below_since == rows.size()) below_since = i;
      if (rows[i].t - rows[below_since].t >= hold - 1e-9) {
        m.convergence_time = rows[below_since].t;
        m.convergence_theta = rows[below_since].theta;
        m.hold_end_theta = rows[i].theta;
        break;
      }
    } else {
      below_since = rows.size();
    }
  }

  for (const auto& r : rows) {
    if (r.theta >= record.theta_f) {
      m.completion_time = r.t;
      break;
    }
  }

  if (record.disturbance_time) {
    double worst = 0.0;
    for (const auto& r : rows) {
      if (r.t >= *record.disturbance_time) worst = std::max(worst, r.d_perp);
    }
    m.max_d_perp_post_disturbance = worst;
  }

  m.final_theta_dot_error =
      std::abs(rows.back().theta_dot - target_theta_dot(rows.back(), config));

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    m.max_err_log_norm = std::max(m.max_err_log_norm, r.err_log_norm);
    if (i == 0) continue;
    const auto& prev = rows[i - 1];
    if (r.lambda != prev.lambda) ++m.lambda_switch_count;
    if (r.theta < prev.theta) m.theta_monotone = false;
    const Quaternion qe0 = prev.q * prev.qd.conj();
    const Quaternion qe1 = r.q * r.qd.conj();
    const double c = std::min(1.0, std::abs(dot(qe0, qe1)) /
                                       (qe0.norm() * qe1.norm()));
    m.rotation_path_length += 2.0 * std::acos(c);
  }
  m.final_err_log_norm = rows.back().err_log_norm;

  for (const auto& r : rows) {
    if (r.t <= config.transient_time || r.theta >= record.theta_f) continue;
    m.min_theta_dot_after_transient =
        std::min(m.min_theta_dot_after_transient.value_or(r.theta_dot), r.theta_dot);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

constexpr double kSlowSpeed = 0.019;
constexpr double kFastSpeed = 0.075;
constexpr double kFig3NominalSpeed = 0.05;

SimConfig fig2_base() {
  SimConfig c;
  c.reference.kind = "helix3d";
  c.mass = 1.0;
  c.inertia = 0.01 * Mat3::Identity();
  c.control.gains = ControlGains(DualVector::uniform(3.0), DualVector::uniform(3.0), 1.0);
  c.control.mode = ControlMode::kFollowing;
  c.control.law = PoseParamLaw::kVelocityAssignment;
  c.duration = 40.0;
  c.initial.theta_dot = 0.0;
  return c;
}

struct StartPose {
  const char* name;
  Vec3 offset;
  Vec3 axis;
  double angle_deg;
};

// Offsets from the reference start. The first one starts with an error
// rotation beyond π, i.e. a negative scalar part.
const StartPose kFig2Poses[] = {
    {"purple", Vec3(-3.0, 2.0, 2.0), Vec3(1.0, 1.0, 0.0), 250.0},
    {"orange", Vec3(3.0, -2.0, -1.0), Vec3(0.0, 1.0, 1.0), 120.0},
    {"yellow", Vec3(-1.0, -3.0, 1.5), Vec3(1.0, 0.0, 0.0), 90.0},
    {"cyan", Vec3(2.0, 2.5, -2.0), Vec3(1.0, -1.0, 1.0), 160.0},
};

void set_start(SimConfig& c, const StartPose& pose) {
  c.initial.mode = InitialCondition::Mode::kRelative;
  c.initial.position_offset = pose.offset;
  c.initial.rotation_axis = pose.axis;
  c.initial.rotation_angle = pose.angle_deg * M_PI / 180.0;
}

}  // namespace

std::vector<SimConfig> preset_fig2(const std::string& variant) {
  std::vector<SimConfig> out;
  if (variant == "convergence") {
    for (const auto& pose : kFig2Poses) {
      for (const auto& [label, speed] :
           {std::pair{"slow", kSlowSpeed}, std::pair{"fast", kFastSpeed}}) {
        SimConfig c = fig2_base();
        c.name = std::string("fig2-convergence-") + pose.name + "-" + label;
        set_start(c, pose);
        c.control.profile = VelocityProfile::constant(speed);
        out.push_back(c);
      }
    }
  } else if (variant == "velocity") {
    const std::pair<const char*, VelocityProfile> profiles[] = {
        {"slow", VelocityProfile::constant(kSlowSpeed)},
        {"fast", VelocityProfile::constant(kFastSpeed)},
        {"sinusoidal", VelocityProfile::sinusoidal(0.047, 0.028, 1.5)},
    };
    for (const auto& [label, profile] : profiles) {
      SimConfig c = fig2_base();
      c.name = std::string("fig2-velocity-") + label;
      set_start(c, kFig2Poses[0]);
      c.control.profile = profile;
      out.push_back(c);
    }
  } else if (variant == "lambda") {
    for (bool enabled : {true, false}) {
      SimConfig c = fig2_base();
      c.name = std::string("fig2-lambda-") + (enabled ? "on" : "off");
      set_start(c, kFig2Poses[0]);
      c.control.profile = VelocityProfile::constant(kFastSpeed);
      c.control.lambda_enabled = enabled;
      out.push_back(c);
    }
  } else {
    throw Error(ErrorCode::kUnknownVariant, "fig2 variant " + variant);
  }
  return out;
}

SimConfig fig3_base_config(const std::string& variant) {
  SimConfig c;
  c.name = "fig3-" + variant;
  c.reference.kind = "sinusoid2d";
  c.mass = 1.0;
  c.inertia = 0.01 * Mat3::Identity();
  c.control.gains = ControlGains(DualVector::uniform(3.0), DualVector::uniform(3.0), 1.0);
  c.initial.mode = InitialCondition::Mode::kOnReference;
  c.initial.theta_dot = 0.0;
  c.control.mode = ControlMode::kFollowing;
  c.control.law = PoseParamLaw::kDistanceFeedback;
  c.control.distance_map = DistanceMap::preset(
      variant == "tracking" ? "progressive" : variant, kFig3NominalSpeed);
  const double span = c.reference.sinusoid.theta_f - c.reference.sinusoid.theta0;
  c.duration = std::ceil(span / kFig3NominalSpeed) + 15.0;
  return c;
}

double calibrate_tracking_rate(const SimConfig& following) {
  SimConfig c = following;
  c.disturbance.reset();
  const RunRecord record = run_closed_loop(c);
  const RunMetrics m = compute_metrics(record, c);
  if (!m.completion_time) {
    throw Error(ErrorCode::kConfigInvalid,
                "calibration run did not reach the end of the reference");
  }
  return (record.theta_f - record.theta0) / *m.completion_time;
}

std::vector<SimConfig> preset_fig3() {
  const SinusoidParams sp;
  const double theta_mid = 0.5 * (sp.theta0 + sp.theta_f);
  const GeometricReference ref = build_sinusoid2d(sp);
  const ReferenceSample mid = ref.sample(theta_mid);
  const Vec3 normal = Vec3::UnitZ();
  const Vec3 transverse = normal.cross(mid.dp.normalized());

  Disturbance d;
  d.trigger = Disturbance::Trigger::kTheta;
  d.at = theta_mid;
  d.dv = 0.5 * transverse;
  d.dw = 2.0 * normal;

  const double rate = calibrate_tracking_rate(fig3_base_config("medium"));

  std::vector<SimConfig> out;
  for (const char* variant : {"tracking", "progressive", "medium", "conservative"}) {
    SimConfig c = fig3_base_config(variant);
    if (std::string(variant) == "tracking") {
      c.control.mode = ControlMode::kTracking;
      c.control.tracking_rate = rate;
    }
    c.disturbance = d;
    out.push_back(c);
  }
  return out;
}

std::vector<SimConfig> preset_by_name(const std::string& name) {
  if (name == "fig2-convergence") return preset_fig2("convergence");
  if (name == "fig2-velocity") return preset_fig2("velocity");
  if (name == "fig2-lambda") return preset_fig2("lambda");
  if (name == "fig3") return preset_fig3();
  throw Error(ErrorCode::kUnknownVariant, "preset " + name);
}

}  // namespace dqf
