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

#include "twinarm/arm_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace twinarm::arm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Demonstrator tendon radius for sections II and III; section I is conical.
constexpr double kDemoPitchRadius = 0.04;
constexpr double kDemoConeAngleDeg = 14.0;

// The arc shape functions, written in x = theta^2 so they stay smooth at 0:
//   f(x) = (1 - cos theta) / theta^2,  g(x) = sin theta / theta
// and their derivatives with respect to x.
struct ShapeFunctions {
  double f, g, df, dg;
};

ShapeFunctions shape_functions(double x) {
  ShapeFunctions s{};
  if (x < 1e-2) {
    // Alternating series; 9 terms leave a remainder below 1e-30.
    double f = 0.0, g = 0.0, df = 0.0, dg = 0.0;
    double xk = 1.0;      // x^k
    double xkm1 = 0.0;    // x^(k-1)
    double fact_2k1 = 1.0;  // (2k+1)!
    double fact_2k2 = 2.0;  // (2k+2)!
    for (int k = 0; k < 9; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      g += sign * xk / fact_2k1;
      f += sign * xk / fact_2k2;
      if (k > 0) {
        dg += sign * k * xkm1 / fact_2k1;
        df += sign * k * xkm1 / fact_2k2;
      }
      xkm1 = xk;
      xk *= x;
      fact_2k1 *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
      fact_2k2 *= (2.0 * k + 3.0) * (2.0 * k + 4.0);
    }
    s = {f, g, df, dg};
  } else {
    const double th = std::sqrt(x);
    const double sn = std::sin(th);
    const double cs = std::cos(th);
    const double half = std::sin(0.5 * th);
    const double one_minus_cos = 2.0 * half * half;
    s.f = one_minus_cos / x;
    s.g = sn / th;
    s.df = (th * sn - 2.0 * one_minus_cos) / (2.0 * x * x);
    s.dg = (th * cs - sn) / (2.0 * x * th);
  }
  return s;
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return m;
}

double halton(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Locates arc length s: section index and local arc length.
std::pair<std::size_t, double> locate(const ArmGeometry& geom, double s) {
  require(s >= 0.0 && s <= geom.total_length() * (1.0 + 1e-12),
          "arc length outside the arm: " + std::to_string(s));
  double start = 0.0;
  for (std::size_t i = 0; i < kSections; ++i) {
    if (s <= start + geom.length[i] || i + 1 == kSections) {
      return {i, std::clamp(s - start, 0.0, geom.length[i])};
    }
    start += geom.length[i];
  }
  return {kSections - 1, geom.length.back()};
}

}  // namespace

double wrap_angle(double rad) {
  double w = std::fmod(rad, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

TendonLayout TendonLayout::standard(const std::array<double, kSections>& pitch_radius) {
  TendonLayout layout;
  layout.azimuth[0] = {deg2rad(60.0), deg2rad(180.0), deg2rad(300.0)};
  layout.azimuth[1] = {deg2rad(0.0), deg2rad(120.0), deg2rad(240.0)};
  layout.azimuth[2] = layout.azimuth[0];
  layout.pitch_radius = pitch_radius;
  return layout;
}

void TendonLayout::validate() const {
  for (std::size_t i = 0; i < kSections; ++i) {
    require(pitch_radius[i] > 0.0, "tendon pitch radius must be positive");
    // Sorted azimuths must be 2pi/3 apart, including the wrap-around gap.
    std::array<double, 3> a{};
    for (std::size_t j = 0; j < 3; ++j) a[j] = wrap_angle(azimuth[i][j]);
    std::sort(a.begin(), a.end());
    const double gaps[3] = {a[1] - a[0], a[2] - a[1], a[0] + kTwoPi - a[2]};
    for (double gap : gaps) {
      require(std::abs(gap - kTwoPi / 3.0) < 1e-12,
              "section " + std::to_string(i + 1) + " tendon azimuths are not 120 deg apart");
    }
  }
}

TendonLayout TendonLayout::scaled(double factor) const {
  TendonLayout out = *this;
  for (double& r : out.pitch_radius) r *= factor;
  return out;
}

double tapered_pitch_radius(double narrow_radius, double section_length, double cone_angle_rad) {
  require(narrow_radius > 0.0 && section_length > 0.0, "taper needs a positive radius and length");
  require(cone_angle_rad >= 0.0 && cone_angle_rad < std::numbers::pi, "cone angle must be in [0, pi)");
  return narrow_radius + 0.5 * section_length * std::tan(0.5 * cone_angle_rad);
}

void ArmGeometry::validate() const {
  for (std::size_t i = 0; i < kSections; ++i) {
    require(length[i] > 0.0, "section length must be positive");
    require(mass[i] >= 0.0, "section mass must be non-negative");
    require(bend_stiffness[i] > 0.0, "bending stiffness must be positive");
  }
  require(tip_mass >= 0.0, "tip mass must be non-negative");
  require(max_bend > 0.0 && max_bend <= 2.0 * std::numbers::pi, "max bend must be in (0, 2pi]");
  require(gravity.allFinite(), "gravity must be finite");
  layout.validate();
}

ArmGeometry ArmGeometry::scaled(double factor) const {
  require(factor > 0.0, "scale factor must be positive");
  ArmGeometry out = *this;
  for (double& l : out.length) l *= factor;
  out.layout = layout.scaled(factor);
  return out;
}

ArmGeometry ArmGeometry::demonstrator() {
  ArmGeometry g;
  g.length = {0.20, 0.20, 0.20};
  g.mass = {0.12, 0.10, 0.08};
  g.bend_stiffness = {0.6, 0.4, 0.25};
  g.layout = TendonLayout::standard(
      {tapered_pitch_radius(kDemoPitchRadius, 0.20, deg2rad(kDemoConeAngleDeg)), kDemoPitchRadius,
       kDemoPitchRadius});
  return g;
}

ArmGeometry ArmGeometry::large_executor() { return demonstrator().scaled(0.98 / 0.60); }

SectionState SectionState::make(double bend, double azimuth) {
  if (bend < 0.0) {
    bend = -bend;
    azimuth += std::numbers::pi;
  }
  if (bend < kStraightEps) return {bend, 0.0};
  return {bend, wrap_angle(azimuth)};
}

// Exact for any nonzero u: the solver and back-drive integrator round-trip
// through here, and snapping tiny bends would fold their residuals.
SectionState SectionState::from_cartesian(const Vec2& u) {
  const double bend = std::hypot(u.x(), u.y());
  if (bend == 0.0) return {};
  return {bend, wrap_angle(std::atan2(u.y(), u.x()))};
}

Vec2 SectionState::cartesian() const {
  return {bend * std::cos(azimuth), bend * std::sin(azimuth)};
}

ArmConfig ArmConfig::from_cartesian(const Eigen::Matrix<double, 6, 1>& u) {
  ArmConfig c;
  for (std::size_t i = 0; i < kSections; ++i) {
    c.sections[i] = SectionState::from_cartesian(u.segment<2>(2 * i));
  }
  return c;
}

Eigen::Matrix<double, 6, 1> ArmConfig::cartesian() const {
  Eigen::Matrix<double, 6, 1> u;
  for (std::size_t i = 0; i < kSections; ++i) u.segment<2>(2 * i) = sections[i].cartesian();
  return u;
}

SectionTransform section_transform(const Vec2& u, double length) {
  const double a = u.x();
  const double b = u.y();
  const ShapeFunctions s = shape_functions(a * a + b * b);

  // Rotation by angle theta about z x (cos phi, sin phi, 0): Rodrigues with
  // omega = (-b, a, 0), R = I + g W + f W^2.
  const Mat3 w = skew(Vec3(-b, a, 0.0));
  const Mat3 w2 = w * w;
  const std::array<Mat3, 2> dw = {skew(Vec3(0.0, 1.0, 0.0)), skew(Vec3(-1.0, 0.0, 0.0))};
  const std::array<double, 2> dx = {2.0 * a, 2.0 * b};

  SectionTransform t;
  t.rotation = Mat3::Identity() + s.g * w + s.f * w2;
  t.position = length * Vec3(s.f * a, s.f * b, s.g);
  for (int c = 0; c < 2; ++c) {
    const double df = s.df * dx[c];
    const double dg = s.dg * dx[c];
    t.d_rotation[c] = dg * w + s.g * dw[c] + df * w2 + s.f * (dw[c] * w + w * dw[c]);
    t.d_position[c] = length * Vec3(df * a + (c == 0 ? s.f : 0.0), df * b + (c == 1 ? s.f : 0.0), dg);
  }
  return t;
}

ArmPose forward_kinematics(const ArmConfig& config, const ArmGeometry& geom) {
  ArmPose pose;
  Eigen::Isometry3d acc = Eigen::Isometry3d::Identity();
  for (std::size_t i = 0; i < kSections; ++i) {
    const SectionTransform t = section_transform(config.sections[i].cartesian(), geom.length[i]);
    Eigen::Isometry3d local = Eigen::Isometry3d::Identity();
    local.linear() = t.rotation;
    local.translation() = t.position;
    acc = acc * local;
    pose.section_end[i] = acc;
  }
  return pose;
}

Vec3 backbone_point(const ArmConfig& config, const ArmGeometry& geom, double s) {
  return point_jacobian(config, geom, s).position;
}

PointJacobian point_jacobian(const ArmConfig& config, const ArmGeometry& geom, double s) {
  const auto [k, local_s] = locate(geom, s);

  // Frames at the end of each proximal section and the transforms used to
  // differentiate them.
  std::array<SectionTransform, kSections> t;
  std::array<Mat3, kSections + 1> rot;
  std::array<Vec3, kSections + 1> pos;
  rot[0] = Mat3::Identity();
  pos[0] = Vec3::Zero();
  for (std::size_t i = 0; i < k; ++i) {
    t[i] = section_transform(config.sections[i].cartesian(), geom.length[i]);
    pos[i + 1] = pos[i] + rot[i] * t[i].position;
    rot[i + 1] = rot[i] * t[i].rotation;
  }
  const double ratio = local_s / geom.length[k];
  const SectionTransform partial = section_transform(config.sections[k].cartesian() * ratio, local_s);

  PointJacobian out;
  out.position = pos[k] + rot[k] * partial.position;
  out.jacobian.setZero();
  for (std::size_t i = 0; i < k; ++i) {
    // Point expressed in the frame at the end of section i.
    const Vec3 q = rot[i + 1].transpose() * (out.position - pos[i + 1]);
    for (int c = 0; c < 2; ++c) {
      out.jacobian.col(2 * i + c) = rot[i] * (t[i].d_rotation[c] * q + t[i].d_position[c]);
    }
  }
  for (int c = 0; c < 2; ++c) {
    out.jacobian.col(2 * k + c) = rot[k] * partial.d_position[c] * ratio;
  }
  return out;
}

TendonVector tendon_lengths(const ArmConfig& config, const TendonLayout& layout) {
  TendonVector out;
  for (std::size_t i = 0; i < kSections; ++i) {
    const auto& sec = config.sections[i];
    for (std::size_t j = 0; j < kTendonsPerSection; ++j) {
      out(i, j) = -sec.bend * layout.pitch_radius[i] * std::cos(sec.azimuth - layout.azimuth[i][j]);
    }
  }
  return out;
}

TendonInverse config_from_tendons(const TendonVector& tendons, const TendonLayout& layout) {
  TendonInverse out;
  for (std::size_t i = 0; i < kSections; ++i) {
    // dl = A u with A_j = -R (cos phi_j, sin phi_j).
    Eigen::Matrix<double, 3, 2> a;
    Eigen::Vector3d dl;
    for (std::size_t j = 0; j < kTendonsPerSection; ++j) {
      a(j, 0) = -layout.pitch_radius[i] * std::cos(layout.azimuth[i][j]);
      a(j, 1) = -layout.pitch_radius[i] * std::sin(layout.azimuth[i][j]);
      dl(j) = tendons(i, j);
    }
    const Vec2 u = (a.transpose() * a).ldlt().solve(a.transpose() * dl);
    // Measured bends below the noise floor read as straight.
    const double bend = u.norm();
    out.config.sections[i] = bend < kStraightEps ? SectionState{bend, 0.0} : SectionState::from_cartesian(u);
    out.residual[i] = (a * u - dl).norm();
  }
  return out;
}

Eigen::Matrix<double, 9, 6> tendon_jacobian(const ArmConfig& config, const TendonLayout& layout) {
  Eigen::Matrix<double, 9, 6> jac = Eigen::Matrix<double, 9, 6>::Zero();
  for (std::size_t i = 0; i < kSections; ++i) {
    const auto& sec = config.sections[i];
    const double r = layout.pitch_radius[i];
    for (std::size_t j = 0; j < kTendonsPerSection; ++j) {
      const double delta = sec.azimuth - layout.azimuth[i][j];
      const auto row = static_cast<Eigen::Index>(i * kTendonsPerSection + j);
      jac(row, 2 * i) = -r * std::cos(delta);
      if (sec.bend >= kStraightEps) jac(row, 2 * i + 1) = sec.bend * r * std::sin(delta);
    }
  }
  return jac;
}

Eigen::Matrix<double, 9, 6> tendon_jacobian_cartesian(const TendonLayout& layout) {
  Eigen::Matrix<double, 9, 6> jac = Eigen::Matrix<double, 9, 6>::Zero();
  for (std::size_t i = 0; i < kSections; ++i) {
    const double r = layout.pitch_radius[i];
    for (std::size_t j = 0; j < kTendonsPerSection; ++j) {
      const auto row = static_cast<Eigen::Index>(i * kTendonsPerSection + j);
      jac(row, 2 * i) = -r * std::cos(layout.azimuth[i][j]);
      jac(row, 2 * i + 1) = -r * std::sin(layout.azimuth[i][j]);
    }
  }
  return jac;
}

WorkspaceExtents workspace_extents(const ArmGeometry& geom, std::size_t n_samples) {
  require(n_samples >= 1000, "workspace sampling needs at least 1000 samples");
  static constexpr unsigned kBases[6] = {2, 3, 5, 7, 11, 13};
  double min_x = std::numeric_limits<double>::infinity();
  double max_x = -min_x;
  double min_z = min_x;
  double max_z = -min_x;
  for (std::size_t n = 0; n < n_samples; ++n) {
    ArmConfig c;
    for (std::size_t i = 0; i < kSections; ++i) {
      c.sections[i] = SectionState::make(geom.max_bend * halton(n, kBases[2 * i]),
                                         kTwoPi * halton(n, kBases[2 * i + 1]));
    }
    const Vec3 tip = forward_kinematics(c, geom).tip().translation();
    min_x = std::min(min_x, tip.x());
    max_x = std::max(max_x, tip.x());
    min_z = std::min(min_z, tip.z());
    max_z = std::max(max_z, tip.z());
  }
  return {max_x - min_x, max_z - min_z};
}

}  // namespace twinarm::arm
