#include <cmath>
#include <cstdio>
#include <fstream>

#include "dqf/errors.hpp"
#include "dqf/sim.hpp"
#include "json.hpp"

namespace dqf {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "t",     "theta", "theta_dot", "px",  "py",    "pz",
      "qw",    "qx",    "qy",        "qz",  "pdx",   "pdy",
      "pdz",   "qdw",   "qdx",       "qdy", "qdz",   "d_perp",
      "err_log_norm",   "lambda",    "fx",  "fy",    "fz",
      "taux",  "tauy",  "tauz",      "theta_ddot"};
  return columns;
}

namespace {

void append(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  out += buf;
}

}  // namespace

std::string record_to_csv(const RunRecord& record) {
  std::string out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& r : record.rows) {
    const double values[] = {
        r.t,         r.theta,     r.theta_dot,  r.p.x(),      r.p.y(),
        r.p.z(),     r.q.w,       r.q.v.x(),    r.q.v.y(),    r.q.v.z(),
        r.pd.x(),    r.pd.y(),    r.pd.z(),     r.qd.w,       r.qd.v.x(),
        r.qd.v.y(),  r.qd.v.z(),  r.d_perp,     r.err_log_norm,
        static_cast<double>(r.lambda),
        r.force.x(), r.force.y(), r.force.z(),  r.torque.x(), r.torque.y(),
        r.torque.z(), r.theta_ddot};
    bool first = true;
    for (double v : values) {
      if (!first) out += ',';
      append(out, v);
      first = false;
    }
    out += '\n';
  }
  return out;
}

void write_csv(const RunRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << record_to_csv(record);
}

std::string summary_to_json_text(const RunRecord& record,
                                 const RunMetrics& m) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) -> json {
    return v ? json(*v) : json(nullptr);
  };
  json j;
  j["schema"] = "dqf.summary";
  j["version"] = 1;
  j["name"] = record.name;
  j["config_hash"] = record.config_hash;
  j["samples"] = record.rows.size();
  j["theta0"] = record.theta0;
  j["theta_f"] = record.theta_f;
  j["disturbance_time"] = opt(record.disturbance_time);
  j["convergence_time"] = opt(m.convergence_time);
  j["convergence_theta"] = opt(m.convergence_theta);
  j["hold_end_theta"] = opt(m.hold_end_theta);
  j["completion_time"] = opt(m.completion_time);
  j["max_d_perp_post_disturbance"] = opt(m.max_d_perp_post_disturbance);
  j["final_theta_dot_error"] = m.final_theta_dot_error;
  j["lambda_switch_count"] = m.lambda_switch_count;
  j["rotation_path_length"] = m.rotation_path_length;
  j["max_err_log_norm"] = m.max_err_log_norm;
  j["final_err_log_norm"] = m.final_err_log_norm;
  j["theta_monotone"] = m.theta_monotone;
  j["min_theta_dot_after_transient"] = opt(m.min_theta_dot_after_transient);
  j["saturation_steps"] = record.saturation_steps;
  j["positivity_violations"] = record.positivity_violations;
  j["warnings"] = record.warnings;
  return j.dump(2);
}

void write_summary(const RunRecord& record, const RunMetrics& metrics,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << summary_to_json_text(record, metrics) << "\n";
}

}  // namespace dqf
