#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dqf/errors.hpp"
#include "dqf/sim.hpp"
#include "json.hpp"

namespace dqf {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCode::kConfigInvalid, msg);
}

void require_object(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) invalid(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!keys.count(key)) invalid("unknown field " + where + "." + key);
  }
}

Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) invalid(where + " must have 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Quaternion quat_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) invalid(where + " must have 4 numbers (w,x,y,z)");
  return {j[0].get<double>(), Vec3(j[1].get<double>(), j[2].get<double>(), j[3].get<double>())};
}

json quat_to(const Quaternion& q) {
  return json::array({q.w, q.v.x(), q.v.y(), q.v.z()});
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

DualVector dual_vector_from(const json& j, const std::string& where) {
  if (j.is_number()) return DualVector::uniform(j.get<double>());
  require_object(j, where, {"real", "dual"});
  return {vec3_from(j.at("real"), where + ".real"), vec3_from(j.at("dual"), where + ".dual")};
}

json dual_vector_to(const DualVector& v) {
  return {{"real", vec3_to(v.real)}, {"dual", vec3_to(v.dual)}};
}

ReferenceSpec reference_from(const json& j) {
  require_object(j, "reference", {"kind", "helix", "sinusoid", "path"});
  ReferenceSpec r;
  r.kind = j.at("kind").get<std::string>();
  if (j.contains("helix")) {
    const json& h = j.at("helix");
    require_object(h, "reference.helix",
                   {"radius0", "radius_rate", "turns_per_unit", "climb", "theta0", "theta_f"});
    read_opt(h, "radius0", r.helix.radius0);
    read_opt(h, "radius_rate", r.helix.radius_rate);
    read_opt(h, "turns_per_unit", r.helix.turns_per_unit);
    read_opt(h, "climb", r.helix.climb);
    read_opt(h, "theta0", r.helix.theta0);
    read_opt(h, "theta_f", r.helix.theta_f);
  }
  if (j.contains("sinusoid")) {
    const json& s = j.at("sinusoid");
    require_object(s, "reference.sinusoid",
                   {"length", "amplitude", "periods", "theta0", "theta_f"});
    read_opt(s, "length", r.sinusoid.length);
    read_opt(s, "amplitude", r.sinusoid.amplitude);
    read_opt(s, "periods", r.sinusoid.periods);
    read_opt(s, "theta0", r.sinusoid.theta0);
    read_opt(s, "theta_f", r.sinusoid.theta_f);
  }
  read_opt(j, "path", r.path_file);
  if (r.kind != "helix3d" && r.kind != "sinusoid2d" && r.kind != "spline") {
    invalid("reference.kind must be helix3d, sinusoid2d or spline");
  }
  if (r.kind == "spline" && r.path_file.empty()) invalid("spline reference needs a path");
  return r;
}

json reference_to(const ReferenceSpec& r) {
  json j = {{"kind", r.kind}};
  if (r.kind == "helix3d") {
    j["helix"] = {{"radius0", r.helix.radius0},
                  {"radius_rate", r.helix.radius_rate},
                  {"turns_per_unit", r.helix.turns_per_unit},
                  {"climb", r.helix.climb},
                  {"theta0", r.helix.theta0},
                  {"theta_f", r.helix.theta_f}};
  } else if (r.kind == "sinusoid2d") {
    j["sinusoid"] = {{"length", r.sinusoid.length},
                     {"amplitude", r.sinusoid.amplitude},
                     {"periods", r.sinusoid.periods},
                     {"theta0", r.sinusoid.theta0},
                     {"theta_f", r.sinusoid.theta_f}};
  } else {
    j["path"] = r.path_file;
  }
  return j;
}

VelocityProfile profile_from(const json& j) {
  require_object(j, "controller.profile",
                 {"kind", "speed", "mean", "amplitude", "frequency", "phase"});
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return VelocityProfile::constant(j.at("speed").get<double>());
  if (kind == "sinusoidal") {
    return VelocityProfile::sinusoidal(j.at("mean").get<double>(),
                                       j.at("amplitude").get<double>(),
                                       j.at("frequency").get<double>(),
                                       j.value("phase", 0.0));
  }
  invalid("controller.profile.kind must be constant or sinusoidal");
}

json profile_to(const VelocityProfile& p) {
  if (p.kind() == VelocityProfile::Kind::kConstant) {
    return {{"kind", "constant"}, {"speed", p.mean()}};
  }
  return {{"kind", "sinusoidal"},
          {"mean", p.mean()},
          {"amplitude", p.amplitude()},
          {"frequency", p.frequency()},
          {"phase", p.phase()}};
}

DistanceMap distance_map_from(const json& j) {
  require_object(j, "controller.distance_map", {"preset", "v_nom", "v_min", "d_scale"});
  DistanceMap m;
  if (j.contains("preset")) {
    m = DistanceMap::preset(j.at("preset").get<std::string>(), j.value("v_nom", m.v_nom));
  }
  read_opt(j, "v_nom", m.v_nom);
  read_opt(j, "v_min", m.v_min);
  read_opt(j, "d_scale", m.d_scale);
  m.validate();
  return m;
}

const char* mode_name(InitialCondition::Mode mode) {
  switch (mode) {
    case InitialCondition::Mode::kOnReference: return "on_reference";
    case InitialCondition::Mode::kRelative: return "relative";
    case InitialCondition::Mode::kAbsolute: return "absolute";
    case InitialCondition::Mode::kRandom: return "random";
  }
  return "on_reference";
}

InitialCondition initial_from(const json& j) {
  require_object(j, "initial",
                 {"mode", "theta", "theta_dot", "position_offset", "rotation_axis",
                  "rotation_angle", "p", "q", "v", "w", "random_radius"});
  InitialCondition ic;
  const std::string mode = j.value("mode", std::string("on_reference"));
  if (mode == "on_reference") ic.mode = InitialCondition::Mode::kOnReference;
  else if (mode == "relative") ic.mode = InitialCondition::Mode::kRelative;
  else if (mode == "absolute") ic.mode = InitialCondition::Mode::kAbsolute;
  else if (mode == "random") ic.mode = InitialCondition::Mode::kRandom;
  else invalid("initial.mode must be on_reference, relative, absolute or random");
  if (j.contains("theta")) ic.theta = j.at("theta").get<double>();
  read_opt(j, "theta_dot", ic.theta_dot);
  if (j.contains("position_offset")) ic.position_offset = vec3_from(j.at("position_offset"), "initial.position_offset");
  if (j.contains("rotation_axis")) ic.rotation_axis = vec3_from(j.at("rotation_axis"), "initial.rotation_axis");
  read_opt(j, "rotation_angle", ic.rotation_angle);
  if (j.contains("p")) ic.body.p = vec3_from(j.at("p"), "initial.p");
  if (j.contains("q")) ic.body.q = quat_from(j.at("q"), "initial.q");
  if (j.contains("v")) ic.body.v = vec3_from(j.at("v"), "initial.v");
  if (j.contains("w")) ic.body.w = vec3_from(j.at("w"), "initial.w");
  read_opt(j, "random_radius", ic.random_radius);
  if (ic.mode == InitialCondition::Mode::kAbsolute &&
      std::abs(ic.body.q.norm() - 1.0) > default_tolerances().unit_rotation) {
    invalid("initial.q must be a unit quaternion");
  }
  return ic;
}

json initial_to(const InitialCondition& ic) {
  json j = {{"mode", mode_name(ic.mode)}, {"theta_dot", ic.theta_dot}};
  if (ic.theta) j["theta"] = *ic.theta;
  switch (ic.mode) {
    case InitialCondition::Mode::kRelative:
      j["position_offset"] = vec3_to(ic.position_offset);
      j["rotation_axis"] = vec3_to(ic.rotation_axis);
      j["rotation_angle"] = ic.rotation_angle;
      break;
    case InitialCondition::Mode::kAbsolute:
      j["p"] = vec3_to(ic.body.p);
      j["q"] = quat_to(ic.body.q);
      j["v"] = vec3_to(ic.body.v);
      j["w"] = vec3_to(ic.body.w);
      break;
    case InitialCondition::Mode::kRandom:
      j["random_radius"] = ic.random_radius;
      break;
    case InitialCondition::Mode::kOnReference:
      break;
  }
  return j;
}

SimConfig config_from_json(const json& j) {
  require_object(j, "config",
                 {"schema_version", "name", "reference", "body", "gains", "controller",
                  "initial", "integration", "convergence", "transient_time",
                  "disturbance", "seed"});
  SimConfig c;
  if (!j.contains("schema_version")) invalid("missing schema_version");
  c.schema_version = j.at("schema_version").get<int>();
  if (c.schema_version != 1) invalid("unsupported schema_version");
  read_opt(j, "name", c.name);
  if (j.contains("reference")) c.reference = reference_from(j.at("reference"));

  if (j.contains("body")) {
    const json& b = j.at("body");
    require_object(b, "body", {"mass", "inertia"});
    read_opt(b, "mass", c.mass);
    if (b.contains("inertia")) {
      const json& in = b.at("inertia");
      if (!in.is_array() || in.size() != 3) invalid("body.inertia must be 3x3");
      for (int r = 0; r < 3; ++r) {
        const Vec3 row = vec3_from(in[r], "body.inertia row");
        c.inertia.row(r) = row.transpose();
      }
    }
  }

  if (j.contains("gains")) {
    const json& g = j.at("gains");
    require_object(g, "gains", {"kp", "kv", "k_theta"});
    DualVector kp = c.control.gains.kp(), kv = c.control.gains.kv();
    double kt = c.control.gains.k_theta();
    if (g.contains("kp")) kp = dual_vector_from(g.at("kp"), "gains.kp");
    if (g.contains("kv")) kv = dual_vector_from(g.at("kv"), "gains.kv");
    read_opt(g, "k_theta", kt);
    c.control.gains = ControlGains(kp, kv, kt);
  }

  if (j.contains("controller")) {
    const json& k = j.at("controller");
    require_object(k, "controller",
                   {"mode", "law", "profile", "distance_map", "lambda_enabled",
                    "theta_ddot_limit", "tracking_rate"});
    const std::string mode = k.value("mode", std::string("following"));
    if (mode == "following") c.control.mode = ControlMode::kFollowing;
    else if (mode == "tracking") c.control.mode = ControlMode::kTracking;
    else invalid("controller.mode must be following or tracking");
    const std::string law = k.value("law", std::string("velocity_assignment"));
    if (law == "velocity_assignment") c.control.law = PoseParamLaw::kVelocityAssignment;
    else if (law == "distance_feedback") c.control.law = PoseParamLaw::kDistanceFeedback;
    else invalid("controller.law must be velocity_assignment or distance_feedback");
    if (k.contains("profile")) c.control.profile = profile_from(k.at("profile"));
    if (k.contains("distance_map")) c.control.distance_map = distance_map_from(k.at("distance_map"));
    read_opt(k, "lambda_enabled", c.control.lambda_enabled);
    read_opt(k, "theta_ddot_limit", c.control.theta_ddot_limit);
    read_opt(k, "tracking_rate", c.control.tracking_rate);
  }

  if (j.contains("initial")) c.initial = initial_from(j.at("initial"));

  if (j.contains("integration")) {
    const json& i = j.at("integration");
    require_object(i, "integration", {"dt", "duration", "export_rate"});
    read_opt(i, "dt", c.dt);
    read_opt(i, "duration", c.duration);
    read_opt(i, "export_rate", c.export_rate);
  }
  if (j.contains("convergence")) {
    const json& v = j.at("convergence");
    require_object(v, "convergence", {"tolerance", "hold"});
    read_opt(v, "tolerance", c.convergence_tol);
    read_opt(v, "hold", c.convergence_hold);
  }
  read_opt(j, "transient_time", c.transient_time);

  if (j.contains("disturbance") && !j.at("disturbance").is_null()) {
    const json& d = j.at("disturbance");
    require_object(d, "disturbance", {"trigger", "at", "dv", "dw"});
    Disturbance dist;
    const std::string trigger = d.value("trigger", std::string("theta"));
    if (trigger == "theta") dist.trigger = Disturbance::Trigger::kTheta;
    else if (trigger == "time") dist.trigger = Disturbance::Trigger::kTime;
    else invalid("disturbance.trigger must be theta or time");
    dist.at = d.at("at").get<double>();
    if (d.contains("dv")) dist.dv = vec3_from(d.at("dv"), "disturbance.dv");
    if (d.contains("dw")) dist.dw = vec3_from(d.at("dw"), "disturbance.dw");
    c.disturbance = dist;
  }
  read_opt(j, "seed", c.seed);
  return c;
}

json config_to_json(const SimConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["reference"] = reference_to(c.reference);
  json inertia = json::array();
  for (int r = 0; r < 3; ++r) inertia.push_back(vec3_to(c.inertia.row(r).transpose()));
  j["body"] = {{"mass", c.mass}, {"inertia", inertia}};
  j["gains"] = {{"kp", dual_vector_to(c.control.gains.kp())},
                {"kv", dual_vector_to(c.control.gains.kv())},
                {"k_theta", c.control.gains.k_theta()}};
  const DistanceMap& m = c.control.distance_map;
  j["controller"] = {
      {"mode", c.control.mode == ControlMode::kFollowing ? "following" : "tracking"},
      {"law", c.control.law == PoseParamLaw::kVelocityAssignment ? "velocity_assignment"
                                                                 : "distance_feedback"},
      {"profile", profile_to(c.control.profile)},
      {"distance_map", {{"v_nom", m.v_nom}, {"v_min", m.v_min}, {"d_scale", m.d_scale}}},
      {"lambda_enabled", c.control.lambda_enabled},
      {"theta_ddot_limit", c.control.theta_ddot_limit},
      {"tracking_rate", c.control.tracking_rate}};
  j["initial"] = initial_to(c.initial);
  j["integration"] = {{"dt", c.dt}, {"duration", c.duration}, {"export_rate", c.export_rate}};
  j["convergence"] = {{"tolerance", c.convergence_tol}, {"hold", c.convergence_hold}};
  j["transient_time"] = c.transient_time;
  if (c.disturbance) {
    const Disturbance& d = *c.disturbance;
    j["disturbance"] = {
        {"trigger", d.trigger == Disturbance::Trigger::kTheta ? "theta" : "time"},
        {"at", d.at},
        {"dv", vec3_to(d.dv)},
        {"dw", vec3_to(d.dw)}};
  }
  j["seed"] = c.seed;
  return j;
}

}  // namespace

SimConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("parse error: ") + e.what());
  }
  try {
    SimConfig c = config_from_json(j);
    validate_config(c);
    return c;
  } catch (const json::exception& e) {
    invalid(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigInvalid) throw;
    invalid(e.what());
  }
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const SimConfig& config) {
  return config_to_json(config).dump(2);
}

std::string config_hash(const SimConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dqf
