#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "dqf/errors.hpp"
#include "dqf/reference.hpp"
#include "test_support.hpp"

using namespace dqf;
namespace oracle = dqf::oracle;

namespace {

void check_frame_and_derivatives(const GeometricReference& ref) {
  const double h = 1e-6;
  Quaternion prev = ref.sample(ref.theta0()).q;
  const int n = 100;
  for (int i = 0; i <= n; ++i) {
    double th = ref.theta0() + (ref.theta_f() - ref.theta0()) * i / n;
    ReferenceSample s = ref.sample(th);
    Mat3 r = oracle::rotation_oracle(s.q);
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-10);
    if (i == 0 || i == n) continue;

    ReferenceSample a = ref.sample(th - h), b = ref.sample(th + h);
    double span = 2 * h;
    EXPECT_LT((s.dp - (b.p - a.p) / span).norm(), 1e-6 * (1 + s.dp.norm()));
    EXPECT_LT((s.ddp - (b.dp - a.dp) / span).norm(), 1e-5 * (1 + s.ddp.norm()));
    // ω_d = 2 vec(q̊_d∘q_d*)
    Quaternion qdot = (1.0 / span) * (b.q - a.q);
    Vec3 w_fd = 2.0 * (qdot * s.q.conj()).v;
    EXPECT_LT((s.w - w_fd).norm(), 1e-8 * (1 + s.w.norm()));
    EXPECT_LT((s.dw - (b.w - a.w) / span).norm(), 1e-5 * (1 + s.dw.norm()));
  }
  // continuity on a 1e-3 grid
  for (double th = ref.theta0(); th <= ref.theta_f(); th += 1e-3) {
    Quaternion q = ref.sample(th).q;
    EXPECT_GT(dot(prev, q), 0.99);
    prev = q;
  }
}

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + name;
}

}  // namespace

TEST(Helix, FrameAndDerivatives) {
  GeometricReference ref = build_helix3d();
  check_frame_and_derivatives(ref);
  for (double th : {0.0, 0.3, 1.1, 2.0}) {
    ReferenceSample s = ref.sample(th);
    Mat3 r = s.q.to_rotation_matrix();
    EXPECT_LT((r.col(0) - s.dp.normalized()).norm(), 1e-12);
    EXPECT_NEAR(r.col(1).z(), 0.0, 1e-12);
  }
}

TEST(Sinusoid, FrameAndDerivatives) {
  GeometricReference ref = build_sinusoid2d();
  check_frame_and_derivatives(ref);
  // crest of the first period
  ReferenceSample crest = ref.sample(1.0 / 8.0);
  EXPECT_NEAR(crest.p.y(), 2.0, 1e-12);
  EXPECT_LT(crest.w.head<2>().norm(), 1e-12);
  EXPECT_GT(std::abs(crest.w.z()), 1.0);
  Mat3 r = crest.q.to_rotation_matrix();
  EXPECT_LT((r.col(2) - Vec3::UnitZ()).norm(), 1e-12);
}

TEST(Reference, OutOfRange) {
  GeometricReference ref = build_sinusoid2d();
  try {
    ref.sample(1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kThetaOutOfRange);
  }
  EXPECT_EQ(ref.clamp(1.5), 1.0);
  EXPECT_EQ(ref.clamp(-0.5), 0.0);
}

TEST(EvalDesired, StraightLine) {
  std::vector<PathSample> samples;
  for (int i = 0; i < 5; ++i) samples.push_back({double(i), Vec3(i, 0, 0), Quaternion::identity()});
  GeometricReference ref = build_spline_reference(samples);
  DesiredDualState d = eval_desired(ref, 1.7);
  EXPECT_LT(d.twist.real.norm(), 1e-12);
  EXPECT_LT((d.twist.dual - Vec3(1, 0, 0)).norm(), 1e-12);
  EXPECT_LT(d.twist_rate.norm(), 1e-12);
}

TEST(EvalDesired, PoseRateMatchesTwist) {
  const double h = 1e-6;
  for (const GeometricReference& ref : {build_helix3d(), build_sinusoid2d()}) {
    for (double th : {0.2, 0.45, 0.8}) {
      DesiredDualState d = eval_desired(ref, th);
      DualQuaternion fd = (0.5 / h) * (eval_desired(ref, th + h).pose -
                                      eval_desired(ref, th - h).pose);
      DualQuaternion model = 0.5 * (DualQuaternion::from_vector(d.twist) * d.pose);
      EXPECT_LT(oracle::max_abs_diff(fd, model), 1e-6);

      DualVector rate_fd = (0.5 / h) * (eval_desired(ref, th + h).twist -
                                        eval_desired(ref, th - h).twist);
      EXPECT_LT(oracle::max_abs_diff(rate_fd, d.twist_rate), 1e-5);
    }
  }
}

TEST(Spline, ReproducesHelix) {
  GeometricReference helix = build_helix3d();
  std::vector<PathSample> samples;
  const int n = 201;
  for (int i = 0; i < n; ++i) {
    double th = 2.0 * i / (n - 1);
    ReferenceSample s = helix.sample(th);
    samples.push_back({th, s.p, s.q});
  }
  GeometricReference spline = build_spline_reference(samples);
  EXPECT_EQ(spline.theta0(), 0.0);
  EXPECT_EQ(spline.theta_f(), 2.0);
  double worst_p = 0.0, worst_q = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    double th = 2.0 * (i + 0.5) / (n - 1);
    ReferenceSample a = helix.sample(th), b = spline.sample(th);
    worst_p = std::max(worst_p, (a.p - b.p).cwiseAbs().maxCoeff());
    worst_q = std::max(worst_q, (a.q - b.q).v.cwiseAbs().maxCoeff());
    worst_q = std::max(worst_q, std::abs(a.q.w - b.q.w));
  }
  EXPECT_LT(worst_p, 1e-4);
  EXPECT_LT(worst_q, 1e-4);
}

TEST(Spline, InputValidation) {
  std::vector<PathSample> two{{0.0, Vec3::Zero(), {}}, {1.0, Vec3::UnitX(), {}}};
  try {
    build_spline_reference(two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
  std::vector<PathSample> back{{0.0, Vec3::Zero(), {}},
                               {1.0, Vec3::UnitX(), {}},
                               {0.5, Vec3(2, 0, 0), {}},
                               {2.0, Vec3(3, 0, 0), {}}};
  try {
    build_spline_reference(back);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonMonotonicTheta);
  }
}

TEST(Spline, SignCanonicalization) {
  std::vector<PathSample> samples;
  for (int i = 0; i < 6; ++i) {
    Quaternion q = Quaternion::from_axis_angle(Vec3::UnitZ(), 0.1 * i);
    if (i % 2) q = -q;
    samples.push_back({double(i), Vec3(i, 0.1 * i * i, 0), q});
  }
  std::vector<Quaternion> frames = resolve_sample_attitudes(samples);
  for (size_t i = 1; i < frames.size(); ++i) EXPECT_GE(dot(frames[i - 1], frames[i]), 0.0);
  GeometricReference ref = build_spline_reference(samples);
  double angle = 2.0 * std::atan2(ref.sample(2.5).q.v.z(), ref.sample(2.5).q.w);
  EXPECT_NEAR(std::abs(angle), 0.25, 1e-3);
}

TEST(Spline, GapFillingTransportsFrames) {
  // Straight path: the transported frame must stay constant.
  Quaternion q0 = Quaternion::from_axis_angle(Vec3(1, 2, 3), 0.4);
  std::vector<PathSample> samples;
  for (int i = 0; i < 5; ++i) {
    PathSample s{double(i), Vec3(i, i, 0), {}};
    if (i == 0) s.q = q0;
    samples.push_back(s);
  }
  for (const Quaternion& q : resolve_sample_attitudes(samples))
    EXPECT_NEAR(std::abs(dot(q, q0)), 1.0, 1e-12);

  // Circle in the plane: the frame keeps its angle to the tangent.
  std::vector<PathSample> circle;
  for (int i = 0; i < 40; ++i) {
    double a = 0.05 * i;
    PathSample s{a, Vec3(std::cos(a), std::sin(a), 0), {}};
    if (i == 0) s.q = Quaternion::from_axis_angle(Vec3::UnitZ(), M_PI / 2);
    circle.push_back(s);
  }
  std::vector<Quaternion> frames = resolve_sample_attitudes(circle);
  for (size_t i = 0; i < frames.size(); ++i) {
    Vec3 x = frames[i].rotate(Vec3::UnitX());
    Vec3 tangent(-std::sin(0.05 * i), std::cos(0.05 * i), 0);
    EXPECT_GT(x.dot(tangent), 1.0 - 1e-3);
  }
}

TEST(PathFile, RoundTrip) {
  std::vector<PathSample> samples;
  for (int i = 0; i < 5; ++i) {
    PathSample s{0.25 * i, Vec3(i, -i, 0.5 * i), {}};
    if (i % 2 == 0) s.q = Quaternion::from_axis_angle(Vec3::UnitY(), 0.1 * i);
    samples.push_back(s);
  }
  std::string path = temp_path("dqf_path_roundtrip.json");
  save_path_samples(path, samples);
  std::vector<PathSample> back = load_path_samples(path);
  ASSERT_EQ(back.size(), samples.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].theta, samples[i].theta);
    EXPECT_EQ(back[i].p, samples[i].p);
    ASSERT_EQ(back[i].q.has_value(), samples[i].q.has_value());
    if (back[i].q) EXPECT_NEAR(dot(*back[i].q, *samples[i].q), 1.0, 1e-15);
  }
  std::remove(path.c_str());
}

TEST(PathFile, RejectsUnknownFields) {
  std::string path = temp_path("dqf_path_bad.json");
  {
    std::ofstream f(path);
    f << R"({"schema": "dqf.path", "version": 1, "samples": [], "extra": 1})";
  }
  EXPECT_THROW(load_path_samples(path), Error);
  EXPECT_THROW(load_path_samples(temp_path("does_not_exist.json")), Error);
  std::remove(path.c_str());
}
