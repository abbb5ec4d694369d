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

#include "twinarm/twin_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace twinarm::twin {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Linear interpolation of a time-sorted series at t (clamped to its ends).
Vec3 sample_at(const TipSeries& s, double t) {
  if (s.size() == 1 || t <= s.front().t) return s.front().position;
  if (t >= s.back().t) return s.back().position;
  const auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const TipSample& x) { return v < x.t; });
  const TipSample& b = *it;
  const TipSample& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  return a.position + w * (b.position - a.position);
}

double sample_rate(const TipSeries& s) {
  if (s.size() < 2) return std::numeric_limits<double>::infinity();
  return static_cast<double>(s.size() - 1) / (s.back().t - s.front().t);
}

}  // namespace

ScaleMapping ScaleMapping::uniform(double x) {
  ScaleMapping m;
  m.factor = x;
  m.section_factor = {x, x, x};
  m.validate();
  return m;
}

void ScaleMapping::validate() const {
  require(factor > 0.0, "scale factor must be positive");
  for (double f : section_factor) require(f > 0.0, "section scale factor must be positive");
}

TendonVector map_tendons(const TendonVector& demo, const ScaleMapping& mapping) {
  TendonVector out;
  for (std::size_t i = 0; i < kSections; ++i) {
    for (std::size_t j = 0; j < arm::kTendonsPerSection; ++j) {
      out(i, j) = mapping.section_factor[i] * demo(i, j);
    }
  }
  return out;
}

StiffnessProfile StiffnessProfile::parse(std::string_view name) {
  return StiffnessProfile{}.with_levels(name);
}

StiffnessProfile StiffnessProfile::with_levels(std::string_view name) const {
  require(name.size() == kSections, "stiffness profile must be three letters (L/H), got '" + std::string(name) + "'");
  StiffnessProfile p = *this;
  for (std::size_t i = 0; i < kSections; ++i) {
    const char c = name[i];
    require(c == 'L' || c == 'H', "stiffness profile letters must be L or H, got '" + std::string(name) + "'");
    p.level[i] = c == 'H' ? StiffnessLevel::High : StiffnessLevel::Low;
  }
  return p;
}

std::string StiffnessProfile::name() const {
  std::string s;
  for (auto l : level) s += (l == StiffnessLevel::High ? 'H' : 'L');
  return s;
}

void StiffnessProfile::validate() const {
  require(current_high > current_low && current_low >= 0.0, "stiffness currents require I_high > I_low >= 0");
  require(stiffness_high > stiffness_low && stiffness_low >= 0.0,
          "stiffness levels require k_high > k_low >= 0");
}

double StiffnessProfile::current(std::size_t section) const {
  return level[section] == StiffnessLevel::High ? current_high : current_low;
}

double StiffnessProfile::stiffness(std::size_t section) const {
  return level[section] == StiffnessLevel::High ? stiffness_high : stiffness_low;
}

const std::array<std::string, 8>& profile_names() {
  static const std::array<std::string, 8> names = {"LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH"};
  return names;
}

CurrentVector apply_stiffness_profile(const StiffnessProfile& profile) {
  profile.validate();
  CurrentVector out;
  for (std::size_t i = 0; i < kSections; ++i) {
    for (std::size_t j = 0; j < arm::kTendonsPerSection; ++j) out(i, j) = profile.current(i);
  }
  return out;
}

SectionMoments stiffness_moment(const ArmConfig& config, const StiffnessProfile& profile) {
  SectionMoments m = statics::zero_moments();
  for (std::size_t i = 0; i < kSections; ++i) {
    m[i] = statics::from_generalized(-profile.stiffness(i) * config.sections[i].cartesian());
  }
  return m;
}

TrackingParams TrackingParams::ideal() {
  return {0.0, std::numeric_limits<double>::infinity(), 0.0};
}

void TrackingParams::validate() const {
  require(deadband >= 0.0, "tracking deadband must be non-negative");
  require(rate_limit > 0.0, "tracking rate limit must be positive");
  require(time_constant >= 0.0, "tracking time constant must be non-negative");
}

TendonVector executor_track(const TendonVector& commanded, const TendonVector& current,
                            const TrackingParams& params, double dt) {
  require(dt > 0.0, "tracking step must be positive");
  const double decay = params.time_constant > 0.0 ? std::exp(-dt / params.time_constant) : 0.0;
  const double max_move = params.rate_limit * dt;
  TendonVector out = current;
  for (std::size_t n = 0; n < arm::kTendons; ++n) {
    const double error = commanded[n] - current[n];
    if (std::abs(error) <= params.deadband) continue;
    const double target = commanded[n] - std::copysign(params.deadband, error);
    double move = (target - current[n]) * (1.0 - decay);
    move = std::clamp(move, -max_move, max_move);
    out[n] = current[n] + move;
  }
  return out;
}

DeviationMetrics deviation_metrics(const TipSeries& demo, const TipSeries& exec) {
  require(!demo.empty() && !exec.empty(), "deviation metrics need non-empty series");
  const double start = std::max(demo.front().t, exec.front().t);
  const double end = std::min(demo.back().t, exec.back().t);
  require(start <= end, "demonstrator and executor series do not overlap in time");

  const double rate = std::min(sample_rate(demo), sample_rate(exec));
  std::size_t n = 1;
  if (std::isfinite(rate) && end > start) {
    n = static_cast<std::size_t>(std::floor((end - start) * rate + 1e-9)) + 1;
  }
  const double spacing = std::isfinite(rate) ? 1.0 / rate : 0.0;

  std::array<double, 3> sum_sq{};
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = start + static_cast<double>(k) * spacing;
    const Vec3 d = sample_at(demo, t);
    const Vec3 e = sample_at(exec, t);
    for (int a = 0; a < 3; ++a) {
      sum_sq[a] += (d[a] - e[a]) * (d[a] - e[a]);
      lo[a] = std::min(lo[a], d[a]);
      hi[a] = std::max(hi[a], d[a]);
    }
  }
  DeviationMetrics m;
  for (int a = 0; a < 3; ++a) {
    const double rms = std::sqrt(sum_sq[a] / static_cast<double>(n));
    const double range = hi[a] - lo[a];
    if (range > 0.0) {
      m.value[a] = 100.0 * rms / range;
    } else {
      m.value[a] = rms;
      m.absolute[a] = true;
    }
  }
  return m;
}

}  // namespace twinarm::twin
