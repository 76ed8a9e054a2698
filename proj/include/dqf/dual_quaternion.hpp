#pragma once

// Quaternion, dual quaternion and dual vector algebra.
//
// Storage order is scalar-first (w, x, y, z) for quaternions and
// real-then-dual for dual quaternions. Every export in this project uses
// that order.

#include <Eigen/Dense>

#include <array>

namespace dqf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thresholds used by the algebra layer. Defaults are the documented
/// contract values; simulations may override them from config.
struct Tolerances {
  double unit_rotation = 1e-6;   // |‖q‖ - 1| accepted by from_pose
  double unit_dual = 1e-6;       // unit check accepted by to_pose
  double small_angle = 1e-6;     // rotation angle [rad] below which log/exp use series
};

const Tolerances& default_tolerances();

struct Quaternion {
  double w = 1.0;
  Vec3 v = Vec3::Zero();

  static Quaternion identity() { return {}; }
  static Quaternion pure(const Vec3& vec) { return {0.0, vec}; }
  static Quaternion from_axis_angle(const Vec3& axis, double angle);
  static Quaternion from_rotation_matrix(const Mat3& r);

  std::array<double, 4> coeffs() const { return {w, v.x(), v.y(), v.z()}; }
  double squared_norm() const { return w * w + v.squaredNorm(); }
  double norm() const;
  Quaternion conj() const { return {w, -v}; }
  Quaternion normalized() const;
  Mat3 to_rotation_matrix() const;
  /// Rotation of a 3-vector: vector part of q∘[0,x]∘q*.
  Vec3 rotate(const Vec3& x) const;
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);
Quaternion operator+(const Quaternion& a, const Quaternion& b);
Quaternion operator-(const Quaternion& a, const Quaternion& b);
Quaternion operator-(const Quaternion& a);
Quaternion operator*(double s, const Quaternion& a);
double dot(const Quaternion& a, const Quaternion& b);

/// Flips the sign so that w >= 0.
Quaternion canonicalize(const Quaternion& q);

/// Dual vector quaternion: both scalar parts are identically zero, so only
/// the two vector parts are stored.
struct DualVector {
  Vec3 real = Vec3::Zero();
  Vec3 dual = Vec3::Zero();

  static DualVector zero() { return {}; }
  static DualVector uniform(double k) {
    return {Vec3::Constant(k), Vec3::Constant(k)};
  }
  double norm() const;
  bool all_finite() const;
};

DualVector operator+(const DualVector& a, const DualVector& b);
DualVector operator-(const DualVector& a, const DualVector& b);
DualVector operator-(const DualVector& a);
DualVector operator*(double s, const DualVector& a);

/// k̂ ⊙ v̂: diagonal gains applied to the real and dual parts separately.
DualVector gain_apply(const DualVector& k, const DualVector& v);

struct DualQuaternion {
  Quaternion real;
  Quaternion dual{0.0, Vec3::Zero()};

  static DualQuaternion identity() { return {}; }
  static DualQuaternion from_vector(const DualVector& v) {
    return {Quaternion::pure(v.real), Quaternion::pure(v.dual)};
  }

  std::array<double, 8> coeffs() const;
  DualQuaternion conj() const { return {real.conj(), dual.conj()}; }
  /// Drops both scalar parts.
  DualVector vector_part() const { return {real.v, dual.v}; }
  /// Largest component of q̂∘q̂* − Î.
  double unit_residual() const;
};

DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator-(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator-(const DualQuaternion& a);
DualQuaternion operator*(double s, const DualQuaternion& a);

struct Pose {
  Vec3 p = Vec3::Zero();
  Quaternion q;
};

/// q̂ = q + ε/2 p∘q. Throws kNonUnitRotation when ‖q‖ is off by more than
/// tol.unit_rotation.
DualQuaternion dq_from_pose(const Vec3& p, const Quaternion& q,
                            const Tolerances& tol = default_tolerances());
/// p = 2 vec(q_dual∘q_real*), q = q_real. Throws kNonUnitDualQuaternion.
Pose dq_to_pose(const DualQuaternion& a,
                const Tolerances& tol = default_tolerances());

/// ln q̂ = ½(φ + εp), with the rotation angle |φ| = 2·atan2(‖v‖, w) in [0, 2π).
DualVector dq_log(const DualQuaternion& a,
                  const Tolerances& tol = default_tolerances());
/// Inverse of dq_log. Requires ‖real‖ < π (kAngleOutOfRange otherwise).
DualQuaternion dq_exp(const DualVector& v,
                      const Tolerances& tol = default_tolerances());

/// Ad_g V = g∘V∘g*.
DualQuaternion dq_adjoint(const DualQuaternion& g, const DualQuaternion& v);
DualVector dq_adjoint(const DualQuaternion& g, const DualVector& v);

}  // namespace dqf
