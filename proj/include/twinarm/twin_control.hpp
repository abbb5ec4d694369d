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
#include <string>
#include <string_view>
#include <vector>

#include "twinarm/arm_model.hpp"
#include "twinarm/statics.hpp"

namespace twinarm::twin {

using arm::ArmConfig;
using arm::CurrentVector;
using arm::kSections;
using arm::TendonVector;
using arm::Vec3;
using statics::SectionMoments;

/// Demonstrator-to-executor tendon scaling. `factor` is executor length over
/// demonstrator length; `section_factor` overrides it per section for
/// executors that are not uniformly scaled.
struct ScaleMapping {
  double factor = 1.0;
  std::array<double, kSections> section_factor{1.0, 1.0, 1.0};

  static ScaleMapping uniform(double x);
  void validate() const;
};

TendonVector map_tendons(const TendonVector& demo, const ScaleMapping& mapping);

enum class StiffnessLevel { Low, High };

struct StiffnessProfile {
  std::array<StiffnessLevel, kSections> level{StiffnessLevel::Low, StiffnessLevel::Low, StiffnessLevel::Low};
  double current_low = 0.1;     // A
  double current_high = 0.6;    // A
  double stiffness_low = 0.0;   // N*m/rad
  double stiffness_high = 0.8;  // N*m/rad

  /// "LLL" ... "HHH", base to tip. Throws std::invalid_argument otherwise.
  static StiffnessProfile parse(std::string_view name);
  std::string name() const;
  void validate() const;

  double current(std::size_t section) const;
  double stiffness(std::size_t section) const;

  /// A copy with other levels but the same level maps.
  StiffnessProfile with_levels(std::string_view name) const;
};

/// All eight profile names, LLL first.
const std::array<std::string, 8>& profile_names();

CurrentVector apply_stiffness_profile(const StiffnessProfile& profile);

/// Restoring moment k_stiff(level_i) * theta_i opposing each bend.
SectionMoments stiffness_moment(const ArmConfig& config, const StiffnessProfile& profile);

struct TrackingParams {
  double deadband = 0.002;      // m
  double rate_limit = 0.05;     // m/s
  double time_constant = 0.05;  // s

  static TrackingParams ideal();
  void validate() const;
};

/// One control period of the executor's tendon servo: backlash deadband,
/// first-order approach to the far edge of the band, and a rate limit.
TendonVector executor_track(const TendonVector& commanded, const TendonVector& current,
                            const TrackingParams& params, double dt);

struct TipSample {
  double t = 0.0;  // s
  Vec3 position = Vec3::Zero();
};

using TipSeries = std::vector<TipSample>;

struct DeviationMetrics {
  /// Per axis (x, y, z): RMS error over the demonstrator's range in
  /// percent, or the absolute RMS in metres when `absolute[a]` is set.
  std::array<double, 3> value{};
  std::array<bool, 3> absolute{};
};

/// Resamples both series onto a uniform grid at the slower series' rate over
/// their common time window and compares them axis by axis. Throws
/// std::invalid_argument for empty or non-overlapping series.
DeviationMetrics deviation_metrics(const TipSeries& demo, const TipSeries& exec);

}  // namespace twinarm::twin
