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

#include <cmath>
#include <numbers>
#include <random>

#include "twinarm/arm_model.hpp"

namespace twinarm::testing {

inline double angle_diff(double a, double b) {
  return std::remainder(a - b, 2.0 * std::numbers::pi);
}

inline arm::ArmConfig random_config(std::mt19937_64& rng, double min_bend, double max_bend) {
  std::uniform_real_distribution<double> th(min_bend, max_bend);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  arm::ArmConfig c;
  for (auto& s : c.sections) s = arm::SectionState::make(th(rng), ph(rng));
  return c;
}

}  // namespace twinarm::testing
