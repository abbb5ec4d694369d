// Copyright 2026 The twinarm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace twinarm::arm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr std::size_t kSections = 3;
inline constexpr std::size_t kTendonsPerSection = 3;
inline constexpr std::size_t kTendons = kSections * kTendonsPerSection;

/// Below this bend angle (rad) a section counts as straight and its azimuth is 0.
inline constexpr double kStraightEps = 1e-9;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double rad);

/// Nine per-tendon scalars ordered (section, tendon), base to tip. The tag
/// keeps displacements, currents and tensions from being mixed up.
template <class Tag>
struct PerTendon {
  std::array<double, kTendons> values{};

  double& operator()(std::size_t section, std::size_t tendon) {
    return values[section * kTendonsPerSection + tendon];
  }
  double operator()(std::size_t section, std::size_t tendon) const {
    return values[section * kTendonsPerSection + tendon];
  }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  static PerTendon filled(double v) {
    PerTendon out;
    out.values.fill(v);
    return out;
  }

  friend PerTendon operator+(PerTendon a, const PerTendon& b) {
    for (std::size_t i = 0; i < kTendons; ++i) a.values[i] += b.values[i];
    return a;
  }
  friend PerTendon operator-(PerTendon a, const PerTendon& b) {
    for (std::size_t i = 0; i < kTendons; ++i) a.values[i] -= b.values[i];
    return a;
  }
  friend PerTendon operator*(double s, PerTendon a) {
    for (auto& v : a.values) v *= s;
    return a;
  }
  friend bool operator==(const PerTendon&, const PerTendon&) = default;
};

/// Tendon length displacements (m); negative means shortened (pulled in).
using TendonVector = PerTendon<struct TendonDisplacementTag>;
/// Motor currents (A).
using CurrentVector = PerTendon<struct MotorCurrentTag>;
/// Tendon tensions (N).
using TensionVector = PerTendon<struct TendonTensionTag>;

struct TendonLayout {
  /// Tendon azimuths (rad) in each section's local frame.
  std::array<std::array<double, kTendonsPerSection>, kSections> azimuth{};
  /// Tendon pitch radius per section (m).
  std::array<double, kSections> pitch_radius{};

  /// Sections I and III at {60, 180, 300} deg, section II at {0, 120, 240} deg.
  static TendonLayout standard(const std::array<double, kSections>& pitch_radius);

  /// Throws std::invalid_argument when azimuths are not 120 deg apart or a
  /// radius is not positive.
  void validate() const;
  TendonLayout scaled(double factor) const;
};

struct ArmGeometry {
  std::array<double, kSections> length{};          // m
  std::array<double, kSections> mass{};            // kg, lumped at each section midpoint
  std::array<double, kSections> bend_stiffness{};  // N*m/rad
  double tip_mass = 0.0;                           // kg, lumped at the tip
  TendonLayout layout;
  Vec3 gravity = Vec3(0.0, 0.0, 9.81);  // m/s^2 in the base frame
  double max_bend = std::numbers::pi;   // rad, per section

  double total_length() const { return length[0] + length[1] + length[2]; }

  void validate() const;

  /// Uniform geometric scaling: lengths and tendon radii scale, masses and
  /// stiffnesses are kept.
  ArmGeometry scaled(double factor) const;

  /// 0.60 m hand-held demonstrator, three 0.20 m sections.
  static ArmGeometry demonstrator();
  /// 0.98 m executor, the demonstrator scaled by 98/60.
  static ArmGeometry large_executor();
};

/// Pitch radius of a conical section at its mid-length, given the radius at
/// its narrow end and the full cone angle.
double tapered_pitch_radius(double narrow_radius, double section_length, double cone_angle_rad);

/// PCC coordinates of one section. Construct through `make` or
/// `from_cartesian` to get the canonical form (bend >= 0, azimuth in
/// [0, 2pi)). `make` zeroes the azimuth below kStraightEps;
/// `from_cartesian` keeps the direction of any nonzero vector.
struct SectionState {
  double bend = 0.0;     // theta, rad
  double azimuth = 0.0;  // phi, rad

  static SectionState make(double bend, double azimuth);
  /// From (theta cos phi, theta sin phi).
  static SectionState from_cartesian(const Vec2& u);
  Vec2 cartesian() const;
};

struct ArmConfig {
  std::array<SectionState, kSections> sections{};

  static ArmConfig straight() { return {}; }
  static ArmConfig from_cartesian(const Eigen::Matrix<double, 6, 1>& u);
  Eigen::Matrix<double, 6, 1> cartesian() const;
};

struct ArmPose {
  std::array<Eigen::Isometry3d, kSections> section_end;
  const Eigen::Isometry3d& tip() const { return section_end.back(); }
};

ArmPose forward_kinematics(const ArmConfig& config, const ArmGeometry& geom);

/// Position of the backbone point at arc length s from the base.
Vec3 backbone_point(const ArmConfig& config, const ArmGeometry& geom, double s);

/// Homogeneous transform of a single constant-curvature arc together with its
/// partial derivatives with respect to the Cartesian bend coordinates
/// u = (theta cos phi, theta sin phi). Smooth through u = 0.
struct SectionTransform {
  Mat3 rotation;
  Vec3 position = Vec3::Zero();
  std::array<Mat3, 2> d_rotation;
  std::array<Vec3, 2> d_position;
};

SectionTransform section_transform(const Vec2& u, double length);

/// Backbone point at arc length s and its 3x6 Jacobian with respect to the
/// stacked Cartesian bend coordinates of all sections.
struct PointJacobian {
  Vec3 position = Vec3::Zero();
  Eigen::Matrix<double, 3, 6> jacobian;
};

PointJacobian point_jacobian(const ArmConfig& config, const ArmGeometry& geom, double s);

/// Straight-routed tendon displacement: dl_ij = -theta_i R_i cos(phi_i - phi_ij).
TendonVector tendon_lengths(const ArmConfig& config, const TendonLayout& layout);

struct TendonInverse {
  ArmConfig config;
  /// Root-sum-square least-squares residual per section (m).
  std::array<double, kSections> residual{};
};

/// Per-section least-squares inverse of `tendon_lengths`. Bends below
/// kStraightEps are reported with azimuth 0.
TendonInverse config_from_tendons(const TendonVector& tendons, const TendonLayout& layout);

/// d(dl)/d(theta_1, phi_1, ..., theta_3, phi_3). The phi columns of a
/// section are zero while it is straight.
Eigen::Matrix<double, 9, 6> tendon_jacobian(const ArmConfig& config, const TendonLayout& layout);

/// Same map with respect to the Cartesian bend coordinates; constant.
Eigen::Matrix<double, 9, 6> tendon_jacobian_cartesian(const TendonLayout& layout);

struct WorkspaceExtents {
  double width = 0.0;   // x extent of reachable tip positions (m)
  double height = 0.0;  // z extent (m)
};

/// Samples (theta_i, phi_i) with a Halton sequence over [0, max_bend] x
/// [0, 2pi) and measures the tip bounding box. Requires n_samples >= 1000.
WorkspaceExtents workspace_extents(const ArmGeometry& geom, std::size_t n_samples);

}  // namespace twinarm::arm
