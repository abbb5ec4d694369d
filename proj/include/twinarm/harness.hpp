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
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "twinarm/arm_model.hpp"
#include "twinarm/session.hpp"
#include "twinarm/statics.hpp"
#include "twinarm/twin_control.hpp"

namespace twinarm::harness {

using arm::ArmConfig;
using arm::ArmGeometry;
using arm::Vec3;
using statics::ExternalLoad;

enum class Shape { Circle, Square, Triangle, Star, LateralSweep, RotationSweep };
enum class Plane { XY, XZ, YZ };

Shape parse_shape(std::string_view name);
std::string_view to_string(Shape s);
Plane parse_plane(std::string_view name);
std::string_view to_string(Plane p);

/// The four closed figures, in table order.
inline constexpr std::array<Shape, 4> kFigureShapes = {Shape::Circle, Shape::Square, Shape::Triangle, Shape::Star};

struct LoadScript {
  Shape shape = Shape::Circle;
  Plane plane = Plane::XY;
  double amplitude = 0.4;   // N
  double period = 10.0;     // s
  double arc_length = 0.6;  // m, application point

  void validate() const;
};

/// Unit in-plane pattern at normalized phase u in [0, 1): circle starts on
/// the first plane axis; polygons are traversed at constant speed starting
/// from their first vertex.
Eigen::Vector2d shape_pattern(Shape shape, double u);

/// Load at time t >= 0: amplitude * pattern mapped into the plane.
ExternalLoad generate_load_path(const LoadScript& script, double t);

/// Executor geometry implied by a scale mapping: section i's length and
/// tendon radius scale by its factor, masses and stiffnesses are kept.
ArmGeometry executor_geometry(const ArmGeometry& demo, const twin::ScaleMapping& mapping);

struct ExperimentConfig {
  statics::DemonstratorModel demo;
  teleop::SessionConfig session;
  LoadScript load;
  /// Relative per-period amplitude variation standing in for operator
  /// inconsistency; drawn from `seed`.
  double load_jitter = 0.05;
  /// Constant force added to scripted figures: the posture the operator
  /// holds the arm in while tracing (N, base frame).
  Vec3 load_bias = Vec3(0.6, 0.0, 0.0);
  std::uint64_t seed = 1;
  /// Entry, lateral search, rotational search, retraction (s).
  std::array<double, 4> gap_durations{15.0, 2.0, 10.0, 5.0};

  /// Defaults to the 0.60 m / 0.98 m demonstrator-executor pair.
  ExperimentConfig();
  /// Uniform scale X on the session mapping.
  void set_scale(double x);
  ArmGeometry executor() const { return executor_geometry(demo.geometry, session.scale); }
  void validate() const;
};

struct TrajectoryResult {
  Shape shape = Shape::Circle;
  twin::DeviationMetrics metrics;
  twin::TipSeries demo_tip;
  twin::TipSeries exec_tip;  // divided by the scale factor
  std::vector<ArmConfig> demo_config;
  std::vector<ArmConfig> exec_config;
  std::vector<teleop::TendonFrame> frames;
  teleop::SessionStats stats;
};

/// Back-drives the demonstrator under the shape's load script, samples it
/// at the session rate, streams the frames through a loopback session and
/// compares both tip trajectories.
TrajectoryResult run_trajectory_experiment(const ExperimentConfig& cfg, Shape shape, double duration);

struct StiffnessRow {
  std::string profile;
  ArmConfig config;
  Vec3 tip = Vec3::Zero();
  double tip_displacement = 0.0;  // m, from the unloaded straight tip
  bool converged = false;
};

/// Lateral tip load used by the stiffness comparison.
ExternalLoad default_tip_load(const ArmGeometry& geom);

std::vector<StiffnessRow> run_stiffness_experiment(const ArmGeometry& geom, const statics::FrictionParams& friction,
                                                   const ExternalLoad& load,
                                                   const std::vector<twin::StiffnessProfile>& profiles);

struct PhaseLogEntry {
  std::string phase;
  std::string profile;
  double start = 0.0;  // s
  double end = 0.0;    // s
  Vec3 tip_start = Vec3::Zero();
  Vec3 tip_end = Vec3::Zero();
};

struct GapResult {
  std::vector<PhaseLogEntry> log;
  double duration = 0.0;  // s, first to last frame
  TrajectoryResult trajectory;
};

GapResult run_gap_scenario(const ExperimentConfig& cfg);

// Output helpers. All files are written with fixed formatting so reruns are
// byte-identical.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryResult& r);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<TrajectoryResult>& rows);
void write_stiffness_csv(const std::filesystem::path& path, const std::vector<StiffnessRow>& rows);
void write_phase_log_csv(const std::filesystem::path& path, const std::vector<PhaseLogEntry>& log);

/// Deviation rendered at 3 significant digits.
std::string format_deviation(double value);

}  // namespace twinarm::harness
