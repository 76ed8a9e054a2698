#include <gtest/gtest.h>

#include <cmath>

#include "dqf/dual_quaternion.hpp"
#include "dqf/errors.hpp"
#include "test_support.hpp"

using namespace dqf;
using dqf::oracle::Rng;
namespace oracle = dqf::oracle;

namespace {

void expect_quat_near(const Quaternion& a, const Quaternion& b, double tol) {
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR((a.v - b.v).cwiseAbs().maxCoeff(), 0.0, tol);
}

}  // namespace

TEST(Quaternion, BasisProducts) {
  Quaternion i{0, Vec3::UnitX()}, j{0, Vec3::UnitY()}, k{0, Vec3::UnitZ()};
  expect_quat_near(i * j, k, 0.0);
  expect_quat_near(j * k, i, 0.0);
  expect_quat_near(k * i, j, 0.0);
  expect_quat_near(i * i, Quaternion{-1, Vec3::Zero()}, 0.0);
}

TEST(Quaternion, IdentityAndInverse) {
  Rng rng(1);
  for (int n = 0; n < 100; ++n) {
    Quaternion q = rng.unit_quaternion();
    expect_quat_near(Quaternion::identity() * q, q, 0.0);
    expect_quat_near(q * q.conj(), Quaternion::identity(), 1e-12);
    EXPECT_NEAR(q.squared_norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(Quaternion::pure(Vec3(1, 2, 3)).w, 0.0);
}

TEST(Quaternion, RotationMatrixMatchesOracle) {
  Rng rng(2);
  for (int n = 0; n < 100; ++n) {
    Quaternion q = rng.unit_quaternion();
    Mat3 r = oracle::rotation_oracle(q);
    EXPECT_LT((q.to_rotation_matrix() - r).cwiseAbs().maxCoeff(), 1e-12);
    Vec3 x = rng.vec(3.0);
    EXPECT_LT((q.rotate(x) - r * x).norm(), 1e-12);
    Quaternion back = Quaternion::from_rotation_matrix(r);
    EXPECT_NEAR(std::abs(dot(back, q)), 1.0, 1e-12);
    EXPECT_GE(back.w, 0.0);
  }
}

TEST(Quaternion, AxisAngle) {
  Quaternion q = Quaternion::from_axis_angle(Vec3(0, 0, 2), M_PI / 2);
  EXPECT_LT((q.rotate(Vec3::UnitX()) - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_NEAR(canonicalize(-q).w, q.w, 0.0);
}

TEST(DualQuaternion, IdentityAndConjugate) {
  Rng rng(3);
  DualQuaternion id = DualQuaternion::identity();
  auto c = id.coeffs();
  for (int i = 0; i < 8; ++i) EXPECT_EQ(c[i], i == 0 ? 1.0 : 0.0);
  EXPECT_EQ(oracle::max_abs_diff(id.conj(), id), 0.0);
  for (int n = 0; n < 100; ++n) {
    DualQuaternion a = rng.unit_dq(), b = rng.unit_dq();
    EXPECT_EQ(oracle::max_abs_diff(id * a, a), 0.0);
    EXPECT_EQ(oracle::max_abs_diff(a.conj().conj(), a), 0.0);
    EXPECT_LT(oracle::max_abs_diff((a * b).conj(), b.conj() * a.conj()), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(a * a.conj(), id), 1e-12);
    EXPECT_LT(a.unit_residual(), 1e-12);
  }
}

TEST(DualQuaternion, CompositionMatchesHomogeneousTransforms) {
  Rng rng(4);
  for (int n = 0; n < 1000; ++n) {
    Vec3 pa = rng.vec(5.0), pb = rng.vec(5.0);
    Quaternion qa = rng.unit_quaternion(), qb = rng.unit_quaternion();
    Pose c = dq_to_pose(dq_from_pose(pa, qa) * dq_from_pose(pb, qb));
    Eigen::Matrix4d t = oracle::htm(pa, qa) * oracle::htm(pb, qb);
    EXPECT_LT((c.p - t.topRightCorner<3, 1>()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((oracle::rotation_oracle(c.q) - t.topLeftCorner<3, 3>())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
  }
}

TEST(DualQuaternion, FromAndToPose) {
  DualQuaternion a = dq_from_pose(Vec3::Zero(), Quaternion::identity());
  EXPECT_EQ(oracle::max_abs_diff(a, DualQuaternion::identity()), 0.0);

  DualQuaternion b = dq_from_pose(Vec3(1, 0, 0), Quaternion::identity());
  auto c = b.coeffs();
  std::array<double, 8> expected{1, 0, 0, 0, 0, 0.5, 0, 0};
  for (int i = 0; i < 8; ++i) EXPECT_EQ(c[i], expected[i]);
  Pose pb = dq_to_pose(b);
  EXPECT_EQ(pb.p, Vec3(1, 0, 0));

  Rng rng(5);
  for (int n = 0; n < 1000; ++n) {
    Vec3 p = rng.vec(5.0);
    Quaternion q = rng.unit_quaternion();
    Pose back = dq_to_pose(dq_from_pose(p, q));
    EXPECT_LT((back.p - p).cwiseAbs().maxCoeff(), 1e-12);
    expect_quat_near(back.q, q, 1e-12);
  }
}

TEST(DualQuaternion, RejectsNonUnitInput) {
  try {
    dq_from_pose(Vec3::Zero(), Quaternion{1.1, Vec3::Zero()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonUnitRotation);
  }
  DualQuaternion bad = DualQuaternion::identity();
  bad.dual.w = 0.1;  // breaks real·dual orthogonality
  try {
    dq_to_pose(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonUnitDualQuaternion);
  }
  // a looser tolerance accepts it
  Tolerances loose;
  loose.unit_rotation = 0.2;
  EXPECT_NO_THROW(dq_from_pose(Vec3::Zero(), Quaternion{1.1, Vec3::Zero()}, loose));
}

TEST(DualQuaternion, LogExamples) {
  DualVector z = dq_log(DualQuaternion::identity());
  EXPECT_EQ(z.norm(), 0.0);

  DualVector r = dq_log(dq_from_pose(
      Vec3::Zero(), Quaternion::from_axis_angle(Vec3::UnitZ(), M_PI / 2)));
  EXPECT_LT((r.real - Vec3(0, 0, M_PI / 4)).norm(), 1e-15);
  EXPECT_LT(r.dual.norm(), 1e-15);

  DualVector t = dq_log(dq_from_pose(Vec3(1, 2, 3), Quaternion::identity()));
  EXPECT_EQ(t.real, Vec3::Zero());
  EXPECT_LT((t.dual - Vec3(0.5, 1, 1.5)).norm(), 1e-15);
}

TEST(DualQuaternion, ExpLogRoundTrip) {
  EXPECT_EQ(oracle::max_abs_diff(dq_exp(DualVector::zero()),
                                  DualQuaternion::identity()),
            0.0);
  Rng rng(6);
  for (int n = 0; n < 1000; ++n) {
    double angle = rng.uniform(1e-4, M_PI - 1e-4);
    Quaternion q = Quaternion::from_axis_angle(rng.vec(1.0), angle);
    DualQuaternion a = dq_from_pose(rng.vec(5.0), q);
    EXPECT_LT(oracle::max_abs_diff(dq_exp(dq_log(a)), a), 1e-12);
  }
}

TEST(DualQuaternion, NearIdentitySeries) {
  Rng rng(7);
  for (int n = 0; n < 100; ++n) {
    Vec3 axis = rng.vec(1.0).normalized();
    Vec3 a = 0.5e-8 * axis;  // half the rotation vector, |φ| = 1e-8
    Vec3 b = rng.vec(2.0);
    // Taylor expansion with one more term than the implementation keeps.
    double s = a.squaredNorm();
    Quaternion qr{1 - s / 2 + s * s / 24, (1 - s / 6 + s * s / 120) * a};
    Quaternion qd = 0.5 * (Quaternion::pure(2 * b) * qr);
    DualQuaternion oracle{qr, qd};
    DualQuaternion e = dq_exp({a, b});
    EXPECT_LT(oracle::max_abs_diff(e, oracle), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(dq_log(e), DualVector{a, b}), 1e-12);
  }
}

TEST(DualQuaternion, ExpRejectsLargeAngle) {
  try {
    dq_exp({Vec3(M_PI, 0, 0), Vec3::Zero()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAngleOutOfRange);
  }
}

TEST(DualQuaternion, AdjointMatchesMatrixAction) {
  Rng rng(8);
  DualVector v0 = rng.dual_vector(2.0);
  EXPECT_LT(oracle::max_abs_diff(dq_adjoint(DualQuaternion::identity(), v0), v0),
            1e-15);
  for (int n = 0; n < 1000; ++n) {
    Quaternion q = rng.unit_quaternion();
    Vec3 p = rng.vec(5.0);
    DualVector v = rng.dual_vector(2.0);
    Mat3 r = oracle::rotation_oracle(q);

    DualVector pure_rot = dq_adjoint(dq_from_pose(Vec3::Zero(), q),
                                     DualVector{v.real, Vec3::Zero()});
    EXPECT_LT((pure_rot.real - r * v.real).norm(), 1e-12);
    EXPECT_LT(pure_rot.dual.norm(), 1e-12);

    // Twist transform: (Rω, Rv + p×Rω).
    DualQuaternion full = dq_adjoint(dq_from_pose(p, q), DualQuaternion::from_vector(v));
    EXPECT_NEAR(full.real.w, 0.0, 1e-12);
    EXPECT_NEAR(full.dual.w, 0.0, 1e-12);
    EXPECT_LT((full.real.v - r * v.real).norm(), 1e-12);
    EXPECT_LT((full.dual.v - (r * v.dual + p.cross(r * v.real))).norm(), 1e-11);
  }
}

TEST(DualVector, GainApply) {
  DualVector v{Vec3(1, 1, 1), Vec3(1, 1, 1)};
  DualVector k{Vec3(1, 2, 3), Vec3(4, 5, 6)};
  DualVector out = gain_apply(k, v);
  EXPECT_EQ(out.real, Vec3(1, 2, 3));
  EXPECT_EQ(out.dual, Vec3(4, 5, 6));

  DualVector w{Vec3(0.1, -2, 3), Vec3(4, 0.5, -6)};
  EXPECT_EQ(oracle::max_abs_diff(gain_apply(DualVector::uniform(1.0), w), w), 0.0);
  EXPECT_LT(oracle::max_abs_diff(gain_apply(DualVector::uniform(3.0), w), 3.0 * w),
            1e-15);
}
