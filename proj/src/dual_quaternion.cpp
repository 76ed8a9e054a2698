#include "dqf/dual_quaternion.hpp"

#include <cmath>

#include "dqf/errors.hpp"

namespace dqf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonUnitRotation: return "NonUnitRotation";
    case ErrorCode::kNonUnitDualQuaternion: return "NonUnitDualQuaternion";
    case ErrorCode::kAngleOutOfRange: return "AngleOutOfRange";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kNonMonotonicTheta: return "NonMonotonicTheta";
    case ErrorCode::kInvalidGains: return "InvalidGains";
    case ErrorCode::kInvalidProfile: return "InvalidProfile";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kUnknownVariant: return "UnknownVariant";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

const Tolerances& default_tolerances() {
  static const Tolerances tol;
  return tol;
}

// ---------------------------------------------------------------------------
// Quaternion

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) return identity();
  return {std::cos(0.5 * angle), std::sin(0.5 * angle) / n * axis};
}

Quaternion Quaternion::from_rotation_matrix(const Mat3& r) {
  // Shepperd's method: pivot on the largest of w², x², y², z².
  const double tr = r.trace();
  Quaternion q;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q.w = 0.25 * s;
    q.v = Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q.w = (r(2, 1) - r(1, 2)) / s;
    q.v = Vec3(0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s);
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q.w = (r(0, 2) - r(2, 0)) / s;
    q.v = Vec3((r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s);
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q.w = (r(1, 0) - r(0, 1)) / s;
    q.v = Vec3((r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s);
  }
  return canonicalize(q.normalized());
}

double Quaternion::norm() const { return std::sqrt(squared_norm()); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  return {w / n, v / n};
}

Mat3 Quaternion::to_rotation_matrix() const {
  const double x = v.x(), y = v.y(), z = v.z();
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Vec3 Quaternion::rotate(const Vec3& x) const {
  return ((*this) * Quaternion::pure(x) * conj()).v;
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.v.dot(b.v), a.w * b.v + b.w * a.v + a.v.cross(b.v)};
}

Quaternion operator+(const Quaternion& a, const Quaternion& b) {
  return {a.w + b.w, a.v + b.v};
}

Quaternion operator-(const Quaternion& a, const Quaternion& b) {
  return {a.w - b.w, a.v - b.v};
}

Quaternion operator-(const Quaternion& a) { return {-a.w, -a.v}; }

Quaternion operator*(double s, const Quaternion& a) { return {s * a.w, s * a.v}; }

double dot(const Quaternion& a, const Quaternion& b) {
  return a.w * b.w + a.v.dot(b.v);
}

Quaternion canonicalize(const Quaternion& q) { return q.w < 0.0 ? -q : q; }

// ---------------------------------------------------------------------------
// DualVector

double DualVector::norm() const {
  return std::sqrt(real.squaredNorm() + dual.squaredNorm());
}

bool DualVector::all_finite() const {
  return real.allFinite() && dual.allFinite();
}

DualVector operator+(const DualVector& a, const DualVector& b) {
  return {a.real + b.real, a.dual + b.dual};
}

DualVector operator-(const DualVector& a, const DualVector& b) {
  return {a.real - b.real, a.dual - b.dual};
}

DualVector operator-(const DualVector& a) { return {-a.real, -a.dual}; }

DualVector operator*(double s, const DualVector& a) {
  return {s * a.real, s * a.dual};
}

DualVector gain_apply(const DualVector& k, const DualVector& v) {
  return {k.real.cwiseProduct(v.real), k.dual.cwiseProduct(v.dual)};
}

// ---------------------------------------------------------------------------
// DualQuaternion

std::array<double, 8> DualQuaternion::coeffs() const {
  return {real.w, real.v.x(), real.v.y(), real.v.z(),
          dual.w, dual.v.x(), dual.v.y(), dual.v.z()};
}

double DualQuaternion::unit_residual() const {
  const DualQuaternion r = (*this) * conj();
  double worst = std::abs(r.real.w - 1.0);
  worst = std::max(worst, r.real.v.cwiseAbs().maxCoeff());
  worst = std::max(worst, std::abs(r.dual.w));
  worst = std::max(worst, r.dual.v.cwiseAbs().maxCoeff());
  return worst;
}

DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.real * b.real, a.real * b.dual + a.dual * b.real};
}

DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.real + b.real, a.dual + b.dual};
}

DualQuaternion operator-(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.real - b.real, a.dual - b.dual};
}

DualQuaternion operator-(const DualQuaternion& a) { return {-a.real, -a.dual}; }

DualQuaternion operator*(double s, const DualQuaternion& a) {
  return {s * a.real, s * a.dual};
}

DualQuaternion dq_from_pose(const Vec3& p, const Quaternion& q,
                            const Tolerances& tol) {
  if (!(std::abs(q.norm() - 1.0) <= tol.unit_rotation)) {
    throw Error(ErrorCode::kNonUnitRotation,
                "rotation quaternion norm " + std::to_string(q.norm()));
  }
  return {q, 0.5 * (Quaternion::pure(p) * q)};
}

Pose dq_to_pose(const DualQuaternion& a, const Tolerances& tol) {
  const double norm_err = std::abs(a.real.norm() - 1.0);
  const double ortho_err = std::abs(dot(a.real, a.dual));
  if (!(norm_err <= tol.unit_dual && ortho_err <= tol.unit_dual)) {
    throw Error(ErrorCode::kNonUnitDualQuaternion,
                "residuals " + std::to_string(norm_err) + ", " +
                    std::to_string(ortho_err));
  }
  return {2.0 * (a.dual * a.real.conj()).v, a.real};
}

DualVector dq_log(const DualQuaternion& a, const Tolerances& tol) {
  const Vec3 p = 2.0 * (a.dual * a.real.conj()).v;
  const double vn = a.real.v.norm();
  const double half_angle = std::atan2(vn, a.real.w);  // |φ|/2 in [0, π]
  double scale;  // (|φ|/2) / ‖v‖
  if (2.0 * half_angle < tol.small_angle) {
    // atan(n/w)/n = (1/w)(1 - n²/(3w²) + ...), w > 0 on this branch.
    const double w = a.real.w;
    scale = (1.0 - vn * vn / (3.0 * w * w)) / w;
  } else {
    scale = half_angle / vn;
  }
  return {scale * a.real.v, 0.5 * p};
}

DualQuaternion dq_exp(const DualVector& v, const Tolerances& tol) {
  const double half_angle = v.real.norm();
  if (!(half_angle < M_PI)) {
    throw Error(ErrorCode::kAngleOutOfRange,
                "rotation angle " + std::to_string(2.0 * half_angle) +
                    " outside [0, 2π)");
  }
  double sinc;  // sin(x)/x
  if (2.0 * half_angle < tol.small_angle) {
    sinc = 1.0 - half_angle * half_angle / 6.0;
  } else {
    sinc = std::sin(half_angle) / half_angle;
  }
  const Quaternion q{std::cos(half_angle), sinc * v.real};
  const Vec3 p = 2.0 * v.dual;
  return {q, 0.5 * (Quaternion::pure(p) * q)};
}

DualQuaternion dq_adjoint(const DualQuaternion& g, const DualQuaternion& v) {
  return g * v * g.conj();
}

DualVector dq_adjoint(const DualQuaternion& g, const DualVector& v) {
  return dq_adjoint(g, DualQuaternion::from_vector(v)).vector_part();
}

}  // namespace dqf
