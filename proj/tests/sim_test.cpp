#include <gtest/gtest.h>

#include <cmath>

#include "dqf/errors.hpp"
#include "dqf/sim.hpp"
#include "test_support.hpp"

namespace oracle = dqf::oracle;

using namespace dqf;

namespace {

SimConfig equilibrium_config() {
  SimConfig c;
  c.name = "equilibrium";
  c.reference.kind = "helix3d";
  c.control.profile = VelocityProfile::constant(0.05);
  c.initial.mode = InitialCondition::Mode::kOnReference;
  c.initial.theta_dot = 0.05;
  c.duration = 10.0;
  return c;
}

std::string without_name(SimConfig c) {
  c.name = "x";
  return config_to_json_text(c);
}

}  // namespace

TEST(Disturbance, Injection) {
  AugmentedState x;
  x.body.v = Vec3(1, 2, 3);
  x.body.w = Vec3(-1, 0, 1);
  x.theta = 0.4;
  AugmentedState same = inject_disturbance(x, Disturbance{});
  EXPECT_EQ(same.body.v, x.body.v);
  EXPECT_EQ(same.body.w, x.body.w);

  Disturbance d;
  d.dv = Vec3(0, 0.5, 0);
  AugmentedState y = inject_disturbance(x, d);
  EXPECT_EQ(y.body.v - x.body.v, Vec3(0, 0.5, 0));
  EXPECT_EQ(y.body.w, x.body.w);
  EXPECT_EQ(y.theta, x.theta);
}

TEST(Disturbance, LatchAppliesOnce) {
  Disturbance d;
  d.trigger = Disturbance::Trigger::kTime;
  d.at = 1.0;
  d.dw = Vec3(0, 0, 2);
  DisturbanceLatch latch(d);
  AugmentedState x;
  EXPECT_EQ(latch.update(0.5, x).body.w, Vec3::Zero());
  EXPECT_FALSE(latch.applied());
  EXPECT_EQ(latch.update(1.0, x).body.w, Vec3(0, 0, 2));
  EXPECT_TRUE(latch.applied());
  EXPECT_EQ(latch.update(1.5, x).body.w, Vec3::Zero());

  Disturbance by_theta;
  by_theta.at = 0.5;
  by_theta.dv = Vec3(1, 0, 0);
  DisturbanceLatch l2(by_theta);
  AugmentedState early;
  early.theta = 0.4;
  EXPECT_EQ(l2.update(0.0, early).body.v, Vec3::Zero());
  AugmentedState late;
  late.theta = 0.6;
  EXPECT_EQ(l2.update(0.0, late).body.v, Vec3(1, 0, 0));
  EXPECT_EQ(l2.update(0.0, late).body.v, Vec3::Zero());

  DisturbanceLatch none(std::nullopt);
  EXPECT_EQ(none.update(100.0, late).body.v, Vec3::Zero());
}

TEST(ClosedLoop, EquilibriumStaysOnReference) {
  SimConfig c = equilibrium_config();
  RunRecord r = run_closed_loop(c);
  ASSERT_EQ(r.rows.size(), 1001u);
  for (const RecordRow& row : r.rows) {
    ASSERT_LT(row.err_log_norm, 1e-6) << row.t;
    ASSERT_LT(row.d_perp, 1e-6);
  }
  RunMetrics m = compute_metrics(r, c);
  ASSERT_TRUE(m.convergence_time.has_value());
  EXPECT_EQ(*m.convergence_time, 0.0);
  EXPECT_LT(m.max_err_log_norm, 1e-6);
  EXPECT_LT(m.final_theta_dot_error, 1e-9);
  EXPECT_EQ(m.lambda_switch_count, 0);
  EXPECT_TRUE(m.theta_monotone);
  EXPECT_EQ(r.positivity_violations, 0);
}

TEST(ClosedLoop, VelocityAssignmentSettles) {
  SimConfig c = equilibrium_config();
  c.control.profile = VelocityProfile::sinusoidal(0.047, 0.028, 1.5);
  c.initial.theta_dot = 0.0;
  c.duration = 20.0;
  RunRecord r = run_closed_loop(c);
  RunMetrics m = compute_metrics(r, c);
  EXPECT_LT(m.final_theta_dot_error, 1e-5);
  const double e0 = r.rows.front().theta_dot - target_theta_dot(r.rows.front(), c);
  for (const RecordRow& row : r.rows) {
    if (row.t < c.transient_time) continue;
    EXPECT_NEAR(row.theta_dot - target_theta_dot(row, c), e0 * std::exp(-row.t), 1e-6);
  }
}

TEST(ClosedLoop, TerminalHold) {
  SimConfig c = equilibrium_config();
  c.reference.helix.theta_f = 0.2;
  c.initial.theta_dot = 0.1;
  c.control.profile = VelocityProfile::constant(0.1);
  c.duration = 6.0;
  RunRecord r = run_closed_loop(c);
  RunMetrics m = compute_metrics(r, c);
  ASSERT_TRUE(m.completion_time.has_value());
  EXPECT_NEAR(*m.completion_time, 2.0, 0.02);
  EXPECT_EQ(r.rows.back().theta, 0.2);
  EXPECT_EQ(r.rows.back().theta_dot, 0.0);
  EXPECT_LT(r.rows.back().err_log_norm, 1e-3);
}

TEST(ClosedLoop, DeterministicCsv) {
  SimConfig c = preset_fig2("lambda").front();
  c.duration = 5.0;
  EXPECT_EQ(record_to_csv(run_closed_loop(c)), record_to_csv(run_closed_loop(c)));

  SimConfig rnd = equilibrium_config();
  rnd.initial.mode = InitialCondition::Mode::kRandom;
  rnd.duration = 1.0;
  rnd.seed = 7;
  std::string a = record_to_csv(run_closed_loop(rnd));
  EXPECT_EQ(a, record_to_csv(run_closed_loop(rnd)));
  rnd.seed = 8;
  EXPECT_NE(a, record_to_csv(run_closed_loop(rnd)));
}

TEST(ClosedLoop, ValidationErrors) {
  SimConfig c = equilibrium_config();
  c.export_rate = 300.0;  // not a divisor of 1/dt
  try {
    run_closed_loop(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  }
  SimConfig d = equilibrium_config();
  d.dt = -1.0;
  EXPECT_THROW(validate_config(d), Error);
  SimConfig s = equilibrium_config();
  s.reference.kind = "spline";
  s.reference.path_file = "/nonexistent/path.json";
  EXPECT_THROW(run_closed_loop(s), Error);
}

TEST(ClosedLoop, InitialStateModes) {
  SimConfig c = equilibrium_config();
  GeometricReference ref = build_reference(c.reference);
  c.initial.mode = InitialCondition::Mode::kRelative;
  c.initial.theta = 0.5;
  c.initial.position_offset = Vec3(1, 2, 3);
  c.initial.rotation_axis = Vec3(0, 0, 1);
  c.initial.rotation_angle = 0.3;
  AugmentedState x = initial_state(c, ref);
  ReferenceSample s = ref.sample(0.5);
  EXPECT_LT((x.body.p - s.p - Vec3(1, 2, 3)).norm(), 1e-12);
  Quaternion rel = x.body.q * s.q.conj();
  EXPECT_NEAR(2 * std::atan2(rel.v.norm(), rel.w), 0.3, 1e-12);
  EXPECT_EQ(x.body.v, Vec3::Zero());
  EXPECT_EQ(x.theta, 0.5);

  c.control.mode = ControlMode::kTracking;
  c.control.tracking_rate = 0.07;
  EXPECT_EQ(initial_state(c, ref).theta_dot, 0.07);
}

TEST(Presets, CountsAndSharedParameters) {
  auto conv = preset_fig2("convergence");
  auto vel = preset_fig2("velocity");
  auto lam = preset_fig2("lambda");
  auto fig3 = preset_fig3();
  EXPECT_EQ(conv.size(), 8u);
  EXPECT_EQ(vel.size(), 3u);
  EXPECT_EQ(lam.size(), 2u);
  EXPECT_EQ(fig3.size(), 4u);
  EXPECT_THROW(preset_fig2("nope"), Error);
  EXPECT_THROW(preset_by_name("fig9"), Error);
  EXPECT_EQ(preset_by_name("fig2-convergence").size(), 8u);

  std::vector<SimConfig> all = conv;
  all.insert(all.end(), vel.begin(), vel.end());
  all.insert(all.end(), lam.begin(), lam.end());
  all.insert(all.end(), fig3.begin(), fig3.end());
  for (const SimConfig& c : all) {
    EXPECT_EQ(c.mass, 1.0) << c.name;
    EXPECT_EQ(c.inertia, 0.01 * Mat3::Identity()) << c.name;
    EXPECT_EQ(oracle::max_abs_diff(c.control.gains.kp(), DualVector::uniform(3.0)), 0.0);
    EXPECT_EQ(oracle::max_abs_diff(c.control.gains.kv(), DualVector::uniform(3.0)), 0.0);
    EXPECT_EQ(c.control.gains.k_theta(), 1.0);
    EXPECT_NO_THROW(validate_config(c));
  }

  int slow = 0, fast = 0;
  for (const SimConfig& c : conv) {
    double v = c.control.profile.value(0.0);
    slow += v == 0.019;
    fast += v == 0.075;
  }
  EXPECT_EQ(slow, 4);
  EXPECT_EQ(fast, 4);

  EXPECT_TRUE(lam[0].control.lambda_enabled);
  EXPECT_FALSE(lam[1].control.lambda_enabled);
  SimConfig off = lam[1];
  off.control.lambda_enabled = true;
  EXPECT_EQ(without_name(off), without_name(lam[0]));

  for (const SimConfig& c : fig3) {
    ASSERT_TRUE(c.disturbance.has_value());
    EXPECT_EQ(c.disturbance->dv, fig3[0].disturbance->dv);
    EXPECT_EQ(c.disturbance->dw, fig3[0].disturbance->dw);
    EXPECT_EQ(c.disturbance->at, 0.5);
    EXPECT_NEAR(c.disturbance->dv.norm(), 0.5, 1e-12);
    EXPECT_NEAR(c.disturbance->dw.norm(), 2.0, 1e-12);
    EXPECT_EQ(c.initial.mode, InitialCondition::Mode::kOnReference);
    EXPECT_EQ(c.initial.theta_dot, c.control.mode == ControlMode::kTracking
                                        ? c.initial.theta_dot
                                        : 0.0);
  }
  EXPECT_EQ(fig3[0].control.mode, ControlMode::kTracking);
}

TEST(Presets, Fig3DisturbanceFreeCompletionMatches) {
  std::vector<double> times;
  for (SimConfig c : preset_fig3()) {
    c.disturbance.reset();
    RunRecord r = run_closed_loop(c);
    RunMetrics m = compute_metrics(r, c);
    ASSERT_TRUE(m.completion_time.has_value()) << c.name;
    times.push_back(*m.completion_time);
  }
  for (double t : times) EXPECT_NEAR(t / times[0], 1.0, 0.01);
}

TEST(Presets, Fig2ErrorDecreasesAfterTransient) {
  for (const SimConfig& c : preset_fig2("convergence")) {
    RunRecord r = run_closed_loop(c);
    RunMetrics m = compute_metrics(r, c);
    EXPECT_LE(m.lambda_switch_count, 1) << c.name;
    EXPECT_TRUE(m.theta_monotone) << c.name;
    EXPECT_EQ(r.positivity_violations, 0) << c.name;
    // 10 Hz samples after 5 / min(k_v) and before the terminal hold, where
    // the reference stops abruptly
    double end = m.completion_time.value_or(c.duration);
    double prev = INFINITY;
    for (size_t i = 0; i < r.rows.size(); i += 10) {
      if (r.rows[i].t <= 5.0 / 3.0 || r.rows[i].t >= end) continue;
      double e = r.rows[i].err_log_norm;
      EXPECT_LE(e, prev + 1e-9) << c.name << " t=" << r.rows[i].t;
      prev = e;
    }
  }
}

TEST(Metrics, EmptyRecordRejected) {
  RunRecord r;
  EXPECT_THROW(compute_metrics(r, SimConfig{}), Error);
}
