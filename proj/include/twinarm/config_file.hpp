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

// Run configuration files: one `key = value` per line, `#` starts a
// comment, vectors are comma separated. Lengths in meters, angles in
// degrees (converted to radians on load). Unknown keys are rejected.
//
//   demo.length            3 x m          demo.mass           3 x kg
//   demo.bend_stiffness    3 x N*m/rad    demo.tip_mass       kg
//   demo.pitch_radius      3 x m          demo.azimuth_deg    9 x deg, section-major
//   demo.gravity           3 x m/s^2      demo.max_bend_deg   deg
//   friction.{mu_s,mu_k,alpha,beta,k_act,c_act,k_kf,c_kf}
//   backdrive.{mobility,max_substep}
//   executor.scale         X              executor.section_scale  3 x X
//   stiffness.{profile,current_low,current_high,k_low,k_high}
//   tracking.{deadband,rate_limit,time_constant}
//   session.{rate_hz,endpoint}
//   load.{shape,plane,amplitude,period,arc_length,jitter,bias}
//   gap.durations          4 x s
//   seed                   unsigned integer

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "twinarm/harness.hpp"

namespace twinarm::config {

/// Any malformed, unknown or out-of-range setting. line() is 1-based, 0 when
/// the problem is not tied to one line.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Applies the settings in `in` on top of `cfg` and validates the result.
void apply_config(std::istream& in, harness::ExperimentConfig& cfg);

harness::ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace twinarm::config
