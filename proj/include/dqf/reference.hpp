#pragma once

// Geometric references: a path with a moving frame, parameterized by the
// dimensionless pose-parameter θ. Derivatives marked "θ-" are with respect
// to θ, not time.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dqf/dual_quaternion.hpp"

namespace dqf {

struct ReferenceSample {
  Vec3 p = Vec3::Zero();    // p_d
  Vec3 dp = Vec3::Zero();   // θ-derivative of p_d
  Vec3 ddp = Vec3::Zero();  // second θ-derivative of p_d
  Quaternion q;             // q_d
  Vec3 w = Vec3::Zero();    // ω_d, from q̊_d = ½ ω_d∘q_d
  Vec3 dw = Vec3::Zero();   // θ-derivative of ω_d
};

class GeometricReference {
 public:
  using Evaluator = std::function<ReferenceSample(double)>;

  GeometricReference(std::string name, double theta0, double theta_f,
                     Evaluator eval);

  const std::string& name() const { return name_; }
  double theta0() const { return theta0_; }
  double theta_f() const { return theta_f_; }
  double clamp(double theta) const;

  /// Throws kThetaOutOfRange outside [θ₀, θ_f].
  ReferenceSample sample(double theta) const;

 private:
  std::string name_;
  double theta0_;
  double theta_f_;
  Evaluator eval_;
};

struct DesiredDualState {
  DualQuaternion pose;     // q̂_d
  DualVector twist;        // ω̂_d
  DualVector twist_rate;   // θ-derivative of ω̂_d
};

DesiredDualState eval_desired(const GeometricReference& ref, double theta);
DesiredDualState desired_from_sample(const ReferenceSample& s);

/// Helix whose radius grows linearly with θ. The frame's x-axis is the unit
/// tangent and its y-axis stays horizontal.
struct HelixParams {
  double radius0 = 2.0;
  double radius_rate = 0.5;
  double turns_per_unit = 1.0;
  double climb = 1.5;
  double theta0 = 0.0;
  double theta_f = 2.0;
};

/// p_d = (length·θ, amplitude·sin(2π·periods·θ), 0) with the frame's x-axis
/// along the unit tangent and z along the plane normal.
struct SinusoidParams {
  double length = 20.0;
  double amplitude = 2.0;
  double periods = 2.0;
  double theta0 = 0.0;
  double theta_f = 1.0;
};

GeometricReference build_helix3d(const HelixParams& params = {});
GeometricReference build_sinusoid2d(const SinusoidParams& params = {});

struct PathSample {
  double theta = 0.0;
  Vec3 p = Vec3::Zero();
  std::optional<Quaternion> q;
};

/// C² reference through sampled poses: not-a-knot cubic splines for
/// position, and a normalized cubic spline through sign-canonicalized
/// quaternions for attitude. Samples without an attitude get one from
/// double-reflection rotation-minimizing transport of the previous frame.
/// Throws kInsufficientSamples (< 4), kNonMonotonicTheta, kNonUnitRotation.
GeometricReference build_spline_reference(const std::vector<PathSample>& samples);

/// Frames the samples would be given by build_spline_reference, after gap
/// filling and sign canonicalization.
std::vector<Quaternion> resolve_sample_attitudes(
    const std::vector<PathSample>& samples);

/// Reads a path file: {"schema": "dqf.path", "version": 1, "samples":
/// [{"theta": t, "p": [x,y,z], "q": [w,x,y,z]}, ...]} ("q" optional).
std::vector<PathSample> load_path_samples(const std::string& path);
void save_path_samples(const std::string& path,
                       const std::vector<PathSample>& samples);

}  // namespace dqf
