#include "dqf/reference.hpp"

#include <Eigen/Sparse>
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dqf/errors.hpp"
#include "jet.hpp"

namespace dqf {

using detail::Jet;
using detail::QuaternionJet;
using detail::Vec3Jet;

GeometricReference::GeometricReference(std::string name, double theta0,
                                       double theta_f, Evaluator eval)
    : name_(std::move(name)),
      theta0_(theta0),
      theta_f_(theta_f),
      eval_(std::move(eval)) {
  if (!(theta_f > theta0)) {
    throw Error(ErrorCode::kNonMonotonicTheta, "θ_f must exceed θ₀");
  }
}

double GeometricReference::clamp(double theta) const {
  return std::clamp(theta, theta0_, theta_f_);
}

ReferenceSample GeometricReference::sample(double theta) const {
  if (!(theta >= theta0_ && theta <= theta_f_)) {
    throw Error(ErrorCode::kThetaOutOfRange,
                "θ = " + std::to_string(theta) + " outside [" +
                    std::to_string(theta0_) + ", " + std::to_string(theta_f_) +
                    "]");
  }
  return eval_(theta);
}

DesiredDualState desired_from_sample(const ReferenceSample& s) {
  DesiredDualState d;
  d.pose = dq_from_pose(s.p, s.q);
  d.twist = {s.w, s.dp + s.p.cross(s.w)};
  d.twist_rate = {s.dw, s.ddp + s.dp.cross(s.w) + s.p.cross(s.dw)};
  return d;
}

DesiredDualState eval_desired(const GeometricReference& ref, double theta) {
  return desired_from_sample(ref.sample(theta));
}

namespace {

ReferenceSample sample_from_jets(const Vec3Jet& p, const QuaternionJet& q) {
  ReferenceSample s;
  s.p = p.v;
  s.dp = p.d;
  s.ddp = p.dd;
  s.q = q.v;
  detail::angular_rates(q, s.w, s.dw);
  return s;
}

}  // namespace

GeometricReference build_helix3d(const HelixParams& hp) {
  auto eval = [hp](double theta) {
    const Jet t = Jet::variable(theta);
    const Jet r = Jet::constant(hp.radius0) + hp.radius_rate * t;
    const double rate = 2.0 * M_PI * hp.turns_per_unit;
    const Jet phi = rate * t;
    const Vec3Jet p = Vec3Jet::from(r * cos(phi), r * sin(phi), hp.climb * t);
    // Tangent heading and elevation written in closed form so the jets carry
    // their exact derivatives.
    const Jet heading =
        phi + atan2(rate * r, Jet::constant(hp.radius_rate));
    const Jet horizontal =
        sqrt(Jet::constant(hp.radius_rate * hp.radius_rate) +
             (rate * rate) * (r * r));
    const Jet elevation = atan2(Jet::constant(hp.climb), horizontal);
    const QuaternionJet q =
        detail::axis_rotation(Vec3::UnitZ(), heading) *
        detail::axis_rotation(Vec3::UnitY(), -elevation);
    return sample_from_jets(p, q);
  };
  return GeometricReference("helix3d", hp.theta0, hp.theta_f, eval);
}

GeometricReference build_sinusoid2d(const SinusoidParams& sp) {
  auto eval = [sp](double theta) {
    const Jet t = Jet::variable(theta);
    const double k = 2.0 * M_PI * sp.periods;
    const Vec3Jet p = Vec3Jet::from(sp.length * t, sp.amplitude * sin(k * t),
                                    Jet::constant(0.0));
    const Jet heading = atan2((sp.amplitude * k) * cos(k * t),
                              Jet::constant(sp.length));
    return sample_from_jets(p, detail::axis_rotation(Vec3::UnitZ(), heading));
  };
  return GeometricReference("sinusoid2d", sp.theta0, sp.theta_f, eval);
}

// ---------------------------------------------------------------------------
// Sampled references

namespace {

// Not-a-knot cubic spline of one scalar channel, stored through its knot
// second derivatives.
class CubicSpline {
 public:
  CubicSpline(const std::vector<double>& x, const std::vector<double>& y)
      : x_(x), y_(y), m_(x.size(), 0.0) {
    const int n = static_cast<int>(x.size());
    std::vector<double> h(n - 1);
    for (int i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

    Eigen::SparseMatrix<double> a(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> entries;
    // Third derivative continuous across the second and second-to-last knots.
    entries.emplace_back(0, 0, h[1]);
    entries.emplace_back(0, 1, -(h[0] + h[1]));
    entries.emplace_back(0, 2, h[0]);
    for (int i = 1; i + 1 < n; ++i) {
      entries.emplace_back(i, i - 1, h[i - 1]);
      entries.emplace_back(i, i, 2.0 * (h[i - 1] + h[i]));
      entries.emplace_back(i, i + 1, h[i]);
      rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    entries.emplace_back(n - 1, n - 3, h[n - 2]);
    entries.emplace_back(n - 1, n - 2, -(h[n - 3] + h[n - 2]));
    entries.emplace_back(n - 1, n - 1, h[n - 3]);
    a.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    const Eigen::VectorXd m = lu.solve(rhs);
    for (int i = 0; i < n; ++i) m_[i] = m[i];
  }

  Jet eval(double xq) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double t = xq - x_[i];
    const double m0 = m_[i], m1 = m_[i + 1];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m0 + m1) / 6.0;
    const double c3 = (m1 - m0) / (6.0 * h);
    return {y_[i] + t * (b + t * (0.5 * m0 + t * c3)),
            b + t * (m0 + 3.0 * c3 * t), m0 + 6.0 * c3 * t};
  }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

struct SplineData {
  std::vector<CubicSpline> position;  // x, y, z
  std::vector<CubicSpline> attitude;  // w, x, y, z
};

void validate_samples(const std::vector<PathSample>& samples) {
  if (samples.size() < 4) {
    throw Error(ErrorCode::kInsufficientSamples,
                "need at least 4 samples, got " + std::to_string(samples.size()));
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].theta > samples[i - 1].theta)) {
      throw Error(ErrorCode::kNonMonotonicTheta,
                  "θ not strictly increasing at sample " + std::to_string(i));
    }
  }
  for (const auto& s : samples) {
    if (!s.p.allFinite()) {
      throw Error(ErrorCode::kInsufficientSamples, "non-finite sample position");
    }
    if (s.q && !(std::abs(s.q->norm() - 1.0) <= default_tolerances().unit_rotation)) {
      throw Error(ErrorCode::kNonUnitRotation, "sample attitude is not unit");
    }
  }
}

std::vector<CubicSpline> fit_positions(const std::vector<PathSample>& samples) {
  std::vector<double> theta;
  std::vector<std::vector<double>> comp(3);
  for (const auto& s : samples) {
    theta.push_back(s.theta);
    for (int k = 0; k < 3; ++k) comp[k].push_back(s.p[k]);
  }
  std::vector<CubicSpline> out;
  for (int k = 0; k < 3; ++k) out.emplace_back(theta, comp[k]);
  return out;
}

Mat3 reflect(const Vec3& axis) {
  const double c = axis.squaredNorm();
  if (c == 0.0) return Mat3::Identity();
  return Mat3::Identity() - (2.0 / c) * axis * axis.transpose();
}

}  // namespace

std::vector<Quaternion> resolve_sample_attitudes(
    const std::vector<PathSample>& samples) {
  validate_samples(samples);
  const auto pos = fit_positions(samples);
  auto tangent = [&](double theta) {
    Vec3 t(pos[0].eval(theta).d, pos[1].eval(theta).d, pos[2].eval(theta).d);
    return Vec3(t.normalized());
  };

  std::vector<Quaternion> out;
  Mat3 frame;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].q) {
      frame = samples[i].q->normalized().to_rotation_matrix();
    } else if (i == 0) {
      // x along the tangent, y horizontal when possible.
      const Vec3 t = tangent(samples[0].theta);
      Vec3 y = Vec3::UnitZ().cross(t);
      if (y.norm() < 1e-6) y = t.cross(Vec3::UnitX());
      y.normalize();
      frame.col(0) = t;
      frame.col(1) = y;
      frame.col(2) = t.cross(y);
    } else {
      // Double reflection: mirror across the chord bisector, then across
      // the plane that maps the mirrored tangent onto the new tangent.
      const Vec3 chord = samples[i].p - samples[i - 1].p;
      const Mat3 h1 = reflect(chord);
      const Vec3 t_prev = tangent(samples[i - 1].theta);
      const Vec3 t_next = tangent(samples[i].theta);
      const Mat3 h2 = reflect(t_next - h1 * t_prev);
      frame = h2 * h1 * frame;
    }
    Quaternion q = Quaternion::from_rotation_matrix(frame);
    if (!out.empty() && dot(out.back(), q) < 0.0) q = -q;
    out.push_back(q);
  }
  return out;
}

GeometricReference build_spline_reference(const std::vector<PathSample>& samples) {
  const std::vector<Quaternion> attitudes = resolve_sample_attitudes(samples);
  auto data = std::make_shared<SplineData>();
  data->position = fit_positions(samples);
  std::vector<double> theta;
  std::vector<std::vector<double>> comp(4);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    theta.push_back(samples[i].theta);
    const auto c = attitudes[i].coeffs();
    for (int k = 0; k < 4; ++k) comp[k].push_back(c[k]);
  }
  for (int k = 0; k < 4; ++k) data->attitude.emplace_back(theta, comp[k]);

  std::shared_ptr<const SplineData> shared = data;
  auto eval = [shared](double t) {
    const auto& pos = shared->position;
    const Vec3Jet p = Vec3Jet::from(pos[0].eval(t), pos[1].eval(t), pos[2].eval(t));
    const auto& att = shared->attitude;
    const Jet w = att[0].eval(t), x = att[1].eval(t), y = att[2].eval(t),
              z = att[3].eval(t);
    const Jet inv_norm = reciprocal(sqrt(w * w + x * x + y * y + z * z));
    const QuaternionJet q =
        QuaternionJet::from(w * inv_norm, x * inv_norm, y * inv_norm, z * inv_norm);
    return sample_from_jets(p, q);
  };
  return GeometricReference("spline", samples.front().theta,
                            samples.back().theta, eval);
}

// ---------------------------------------------------------------------------
// Path files

namespace {
constexpr const char* kPathSchema = "dqf.path";
constexpr int kPathVersion = 1;
}  // namespace

std::vector<PathSample> load_path_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, path + ": " + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != kPathSchema ||
        doc.at("version").get<int>() != kPathVersion) {
      throw Error(ErrorCode::kConfigInvalid,
                  path + ": unsupported schema or version");
    }
    for (const auto& [key, _] : doc.items()) {
      if (key != "schema" && key != "version" && key != "samples") {
        throw Error(ErrorCode::kConfigInvalid, path + ": unknown field " + key);
      }
    }
    std::vector<PathSample> out;
    for (const auto& rec : doc.at("samples")) {
      for (const auto& [key, _] : rec.items()) {
        if (key != "theta" && key != "p" && key != "q") {
          throw Error(ErrorCode::kConfigInvalid, path + ": unknown field " + key);
        }
      }
      PathSample s;
      s.theta = rec.at("theta").get<double>();
      const auto p = rec.at("p").get<std::vector<double>>();
      if (p.size() != 3) throw Error(ErrorCode::kConfigInvalid, path + ": p needs 3 values");
      s.p = Vec3(p[0], p[1], p[2]);
      if (rec.contains("q")) {
        const auto q = rec.at("q").get<std::vector<double>>();
        if (q.size() != 4) throw Error(ErrorCode::kConfigInvalid, path + ": q needs 4 values");
        s.q = Quaternion{q[0], Vec3(q[1], q[2], q[3])};
      }
      out.push_back(s);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, path + ": " + e.what());
  }
}

void save_path_samples(const std::string& path,
                       const std::vector<PathSample>& samples) {
  nlohmann::json doc;
  doc["schema"] = kPathSchema;
  doc["version"] = kPathVersion;
  doc["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json rec;
    rec["theta"] = s.theta;
    rec["p"] = {s.p.x(), s.p.y(), s.p.z()};
    if (s.q) rec["q"] = {s.q->w, s.q->v.x(), s.q->v.y(), s.q->v.z()};
    doc["samples"].push_back(rec);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace dqf
