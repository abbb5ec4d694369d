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

#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace twinarm::oracle {

Vec3 integrate_tip(const std::array<Section, 3>& sections, std::size_t steps) {
  double total = 0.0;
  for (const auto& s : sections) total += s.length;
  const double ds = total / static_cast<double>(steps);

  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Vec3 p = Vec3::Zero();
  for (const auto& s : sections) {
    const auto n = static_cast<std::size_t>(std::llround(s.length / ds));
    const double h = s.length / static_cast<double>(n);
    const double kappa = s.bend / s.length;
    // Bending toward azimuth phi is a rotation about the in-plane normal.
    const Vec3 axis(-std::sin(s.azimuth), std::cos(s.azimuth), 0.0);
    const Eigen::Matrix3d half(Eigen::AngleAxisd(0.5 * kappa * h, axis));
    const Eigen::Matrix3d full(Eigen::AngleAxisd(kappa * h, axis));
    for (std::size_t k = 0; k < n; ++k) {
      p += (r * half).col(2) * h;  // midpoint tangent
      r = r * full;
    }
  }
  return p;
}

double potential_energy(const SingleSectionCase& c, double bend, double azimuth) {
  const double l = c.length;
  auto point = [&](double s) -> Vec3 {
    if (bend < 1e-12) return {0.0, 0.0, s};
    const double rho = l / bend;
    const double a = bend * s / l;
    const double radial = rho * (1.0 - std::cos(a));
    return {radial * std::cos(azimuth), radial * std::sin(azimuth), rho * std::sin(a)};
  };
  const Vec3 end = point(l);
  const Vec3 tangent(std::sin(bend) * std::cos(azimuth), std::sin(bend) * std::sin(azimuth), std::cos(bend));
  double u = 0.5 * c.stiffness * bend * bend;
  u -= c.mass * c.gravity.dot(point(0.5 * l));
  for (const auto& [d, m] : c.distal) u -= m * c.gravity.dot(end + d * tangent);
  return u;
}

GridMinimum minimize_on_grid(const SingleSectionCase& c, std::size_t n_bend, std::size_t n_azimuth,
                             double max_bend) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  GridMinimum best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i <= n_bend; ++i) {
    const double th = max_bend * static_cast<double>(i) / static_cast<double>(n_bend);
    for (std::size_t j = 0; j < n_azimuth; ++j) {
      const double ph = kTwoPi * static_cast<double>(j) / static_cast<double>(n_azimuth);
      const double e = potential_energy(c, th, ph);
      if (e < best.energy) best = {th, ph, e};
    }
  }
  // Local refinement in Cartesian bend coordinates, which stay regular at
  // theta = 0.
  double a = best.bend * std::cos(best.azimuth);
  double b = best.bend * std::sin(best.azimuth);
  double span = 2.0 * std::max(max_bend / static_cast<double>(n_bend), best.bend * kTwoPi / n_azimuth);
  for (int round = 0; round < 60; ++round) {
    double ba = a, bb = b, be = best.energy;
    for (int p = -10; p <= 10; ++p) {
      for (int q = -10; q <= 10; ++q) {
        const double ca = a + span * p / 10.0;
        const double cb = b + span * q / 10.0;
        const double th = std::hypot(ca, cb);
        if (th > max_bend) continue;
        const double e = potential_energy(c, th, std::atan2(cb, ca));
        if (e < be) {
          be = e;
          ba = ca;
          bb = cb;
        }
      }
    }
    a = ba;
    b = bb;
    best.energy = be;
    span *= 0.5;
  }
  best.bend = std::hypot(a, b);
  best.azimuth = std::atan2(b, a);
  if (best.azimuth < 0.0) best.azimuth += kTwoPi;
  return best;
}

double payout_tension(double actuation, double mu_k) {
  double t = actuation;
  for (int k = 0; k < 10000; ++k) {
    const double next = actuation + mu_k * (t + actuation);
    if (next == t) break;
    t = next;
  }
  return t;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool proper_intersection(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

std::size_t count_self_crossings(const std::vector<Vec2>& path) {
  const std::size_t n = path.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (proper_intersection(path[i], path[(i + 1) % n], path[j], path[(j + 1) % n])) ++count;
    }
  }
  return count;
}

}  // namespace twinarm::oracle
