#pragma once

// Second-order forward-mode derivatives: a value with its first and second
// derivative along one parameter.

#include <cmath>

#include "dqf/dual_quaternion.hpp"

namespace dqf::detail {

struct Jet {
  double v = 0.0;
  double d = 0.0;
  double dd = 0.0;

  static Jet constant(double c) { return {c, 0.0, 0.0}; }
  static Jet variable(double x) { return {x, 1.0, 0.0}; }
};

inline Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet operator-(Jet a) { return {-a.v, -a.d, -a.dd}; }
inline Jet operator*(double s, Jet a) { return {s * a.v, s * a.d, s * a.dd}; }
inline Jet operator*(Jet a, Jet b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d,
          a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}
inline Jet reciprocal(Jet a) {
  const double inv = 1.0 / a.v;
  return {inv, -a.d * inv * inv,
          -a.dd * inv * inv + 2.0 * a.d * a.d * inv * inv * inv};
}
inline Jet operator/(Jet a, Jet b) { return a * reciprocal(b); }

inline Jet sin(Jet a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {s, c * a.d, -s * a.d * a.d + c * a.dd};
}
inline Jet cos(Jet a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {c, -s * a.d, -c * a.d * a.d - s * a.dd};
}
inline Jet sqrt(Jet a) {
  const double s = std::sqrt(a.v);
  return {s, a.d / (2.0 * s), a.dd / (2.0 * s) - a.d * a.d / (4.0 * s * a.v)};
}
inline Jet atan2(Jet y, Jet x) {
  const double den = x.v * x.v + y.v * y.v;
  const double num = x.v * y.d - y.v * x.d;
  const double num_d = x.v * y.dd - y.v * x.dd;
  const double den_d = 2.0 * (x.v * x.d + y.v * y.d);
  return {std::atan2(y.v, x.v), num / den,
          (num_d * den - num * den_d) / (den * den)};
}

struct Vec3Jet {
  Vec3 v = Vec3::Zero();
  Vec3 d = Vec3::Zero();
  Vec3 dd = Vec3::Zero();

  static Vec3Jet from(Jet x, Jet y, Jet z) {
    return {Vec3(x.v, y.v, z.v), Vec3(x.d, y.d, z.d), Vec3(x.dd, y.dd, z.dd)};
  }
};

struct QuaternionJet {
  Quaternion v{0.0, Vec3::Zero()};
  Quaternion d{0.0, Vec3::Zero()};
  Quaternion dd{0.0, Vec3::Zero()};

  static QuaternionJet from(Jet w, Jet x, Jet y, Jet z) {
    return {{w.v, Vec3(x.v, y.v, z.v)},
            {w.d, Vec3(x.d, y.d, z.d)},
            {w.dd, Vec3(x.dd, y.dd, z.dd)}};
  }
};

inline QuaternionJet operator*(const QuaternionJet& a, const QuaternionJet& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d,
          a.dd * b.v + 2.0 * (a.d * b.d) + a.v * b.dd};
}

/// Rotation by angle about a fixed unit axis.
inline QuaternionJet axis_rotation(const Vec3& axis, Jet angle) {
  const Jet c = cos(0.5 * angle), s = sin(0.5 * angle);
  return QuaternionJet::from(c, s * Jet::constant(axis.x()),
                             s * Jet::constant(axis.y()),
                             s * Jet::constant(axis.z()));
}

/// (ω, ω̊) for q̊ = ½ω∘q, using unit-norm q: ω = 2 vec(q̊∘q*) and
/// ω̊ = 2 vec(q̊̊∘q* + q̊∘q̊*).
inline void angular_rates(const QuaternionJet& q, Vec3& w, Vec3& dw) {
  w = 2.0 * (q.d * q.v.conj()).v;
  dw = 2.0 * (q.dd * q.v.conj() + q.d * q.d.conj()).v;
}

}  // namespace dqf::detail
