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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "twinarm/harness.hpp"

namespace twinarm::harness {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Shapes, NamesRoundTrip) {
  for (Shape s : {Shape::Circle, Shape::Square, Shape::Triangle, Shape::Star, Shape::LateralSweep,
                  Shape::RotationSweep}) {
    EXPECT_EQ(parse_shape(to_string(s)), s);
  }
  for (Plane p : {Plane::XY, Plane::XZ, Plane::YZ}) EXPECT_EQ(parse_plane(to_string(p)), p);
  EXPECT_THROW(parse_shape("blob"), std::invalid_argument);
  EXPECT_THROW(parse_plane("xw"), std::invalid_argument);
}

TEST(Shapes, CircleStartsOnFirstAxis) {
  LoadScript s;
  s.amplitude = 0.3;
  const ExternalLoad l = generate_load_path(s, 0.0);
  EXPECT_NEAR((l.force - Vec3(0.3, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(l.arc_length, s.arc_length);
  s.plane = Plane::YZ;
  EXPECT_NEAR((generate_load_path(s, 0.0).force - Vec3(0, 0.3, 0)).norm(), 0.0, 1e-15);
  s.plane = Plane::XZ;
  EXPECT_NEAR((generate_load_path(s, 2.5).force - Vec3(0, 0, 0.3)).norm(), 0.0, 1e-15);
}

TEST(Shapes, PeriodicAndBounded) {
  for (Shape sh : {Shape::Circle, Shape::Square, Shape::Triangle, Shape::Star, Shape::LateralSweep,
                   Shape::RotationSweep}) {
    for (double u = 0.0; u < 1.0; u += 0.013) {
      const Eigen::Vector2d a = shape_pattern(sh, u);
      EXPECT_LE(a.norm(), std::sqrt(2.0) + 1e-12);
      EXPECT_NEAR((shape_pattern(sh, u + 1.0) - a).norm(), 0.0, 1e-9);
    }
  }
  EXPECT_NEAR((shape_pattern(Shape::Square, 0.0) - Eigen::Vector2d(1, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((shape_pattern(Shape::Square, 0.25) - Eigen::Vector2d(-1, 1)).norm(), 0.0, 1e-12);
  for (double u = 0.0; u < 1.0; u += 0.05) EXPECT_NEAR(shape_pattern(Shape::RotationSweep, u).norm(), 1.0, 1e-12);
}

TEST(Shapes, StarCrossesItselfFiveTimes) {
  std::vector<oracle::Vec2> path;
  for (int k = 0; k < 1000; ++k) path.push_back(shape_pattern(Shape::Star, k / 1000.0));
  EXPECT_EQ(oracle::count_self_crossings(path), 5U);
  path.clear();
  for (int k = 0; k < 999; ++k) path.push_back(shape_pattern(Shape::Triangle, k / 999.0));
  EXPECT_EQ(oracle::count_self_crossings(path), 0U);
}

TEST(Shapes, ScriptValidation) {
  LoadScript s;
  s.period = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_THROW(generate_load_path(LoadScript{}, -1.0), std::invalid_argument);
}

TEST(Executor, GeometryScalesPerSection) {
  twin::ScaleMapping m = twin::ScaleMapping::uniform(1.0);
  m.section_factor = {2.0, 1.0, 0.5};
  const ArmGeometry e = executor_geometry(ArmGeometry::demonstrator(), m);
  EXPECT_NEAR(e.length[0], 0.4, 1e-15);
  EXPECT_NEAR(e.length[2], 0.1, 1e-15);
  EXPECT_NEAR(e.layout.pitch_radius[2], 0.02, 1e-15);
  EXPECT_EQ(e.mass, ArmGeometry::demonstrator().mass);
}

TEST(Trajectory, IdealTrackingHasNoDeviation) {
  ExperimentConfig cfg;
  cfg.session.tracking = twin::TrackingParams::ideal();
  const TrajectoryResult r = run_trajectory_experiment(cfg, Shape::Square, 20.0);
  for (double v : r.metrics.value) EXPECT_LT(v, 1e-9);
  EXPECT_EQ(r.stats.frames_dropped, 0U);
  EXPECT_EQ(r.frames.size(), 2001U);
}

TEST(Trajectory, CircleInPlausibilityBandAndDeterministic) {
  const ExperimentConfig cfg;
  const TrajectoryResult a = run_trajectory_experiment(cfg, Shape::Circle, 60.0);
  const TrajectoryResult b = run_trajectory_experiment(cfg, Shape::Circle, 60.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_FALSE(a.metrics.absolute[k]);
    EXPECT_GT(a.metrics.value[k], 0.0);
    EXPECT_LE(a.metrics.value[k], 20.0);
    EXPECT_EQ(a.metrics.value[k], b.metrics.value[k]);
  }
  EXPECT_EQ(a.frames, b.frames);

  ExperimentConfig other = cfg;
  other.seed = 2;
  const TrajectoryResult c = run_trajectory_experiment(other, Shape::Circle, 60.0);
  EXPECT_NE(a.metrics.value[0], c.metrics.value[0]);
}

TEST(Trajectory, CsvOutputIsByteIdentical) {
  const ExperimentConfig cfg;
  const auto dir = std::filesystem::temp_directory_path() / "twinarm_harness_test";
  std::filesystem::create_directories(dir);
  const TrajectoryResult r1 = run_trajectory_experiment(cfg, Shape::Triangle, 10.0);
  write_trajectory_csv(dir / "a.csv", r1);
  write_metrics_csv(dir / "ma.csv", {r1});
  const TrajectoryResult r2 = run_trajectory_experiment(cfg, Shape::Triangle, 10.0);
  write_trajectory_csv(dir / "b.csv", r2);
  write_metrics_csv(dir / "mb.csv", {r2});
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "ma.csv"), slurp(dir / "mb.csv"));
  const std::string metrics = slurp(dir / "ma.csv");
  EXPECT_EQ(metrics.rfind("shape,x,y,z,unit_x,unit_y,unit_z\ntriangle,", 0), 0U);
  std::filesystem::remove_all(dir);
}

TEST(Stiffness, ProfilesOrderDeflection) {
  const ArmGeometry g = ArmGeometry::demonstrator();
  const statics::FrictionParams p;
  std::vector<twin::StiffnessProfile> profiles;
  for (const char* n : {"LLL", "LHH", "HLL", "HHH"}) profiles.push_back(twin::StiffnessProfile::parse(n));
  const auto rows = run_stiffness_experiment(g, p, default_tip_load(g), profiles);
  ASSERT_EQ(rows.size(), 4U);
  for (const auto& r : rows) EXPECT_TRUE(r.converged) << r.profile;
  EXPECT_LT(rows[3].tip_displacement, rows[0].tip_displacement);
  EXPECT_LT(rows[2].config.sections[0].bend, rows[1].config.sections[0].bend);
}

TEST(Stiffness, ZeroLoadLeavesEveryProfileStraight) {
  const ArmGeometry g = ArmGeometry::demonstrator();
  std::vector<twin::StiffnessProfile> profiles;
  for (const auto& n : twin::profile_names()) profiles.push_back(twin::StiffnessProfile::parse(n));
  const auto rows = run_stiffness_experiment(g, statics::FrictionParams{}, {0.6, Vec3::Zero()}, profiles);
  for (const auto& r : rows) {
    EXPECT_EQ(r.tip_displacement, 0.0) << r.profile;
    for (const auto& s : r.config.sections) EXPECT_EQ(s.bend, 0.0);
  }
  EXPECT_THROW(run_stiffness_experiment(g, statics::FrictionParams{}, {0.6, Vec3::Zero()}, {profiles[0]}),
               std::invalid_argument);
}

TEST(Gap, ScheduleAndDurations) {
  const ExperimentConfig cfg;
  const GapResult g = run_gap_scenario(cfg);
  ASSERT_EQ(g.log.size(), 4U);
  const char* profiles[] = {"LLL", "LHH", "HLL", "LLL"};
  const double durations[] = {15.0, 2.0, 10.0, 5.0};
  const double dt = 1.0 / cfg.session.rate_hz;
  for (std::size_t p = 0; p < 4; ++p) {
    EXPECT_EQ(g.log[p].profile, profiles[p]);
    EXPECT_NEAR(g.log[p].end - g.log[p].start, durations[p], dt + 1e-9);
  }
  EXPECT_NEAR(g.duration, 32.0, 1e-9);
  // Retraction brings the arm back toward where it started.
  EXPECT_LT((g.log[3].tip_end - g.log[0].tip_start).norm(), (g.log[2].tip_end - g.log[0].tip_start).norm());
}

TEST(Gap, CustomDurations) {
  ExperimentConfig cfg;
  cfg.gap_durations = {1.0, 1.0, 2.0, 1.0};
  const GapResult g = run_gap_scenario(cfg);
  ASSERT_EQ(g.log.size(), 4U);
  EXPECT_NEAR(g.duration, 5.0, 1e-9);
  std::ostringstream unused;
  const auto path = std::filesystem::temp_directory_path() / "twinarm_phase_log.csv";
  write_phase_log_csv(path, g.log);
  const std::string csv = slurp(path);
  EXPECT_NE(csv.find("\nrotational-search,HLL,"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Format, ThreeSignificantDigits) {
  EXPECT_EQ(format_deviation(5.0), "5.00");
  EXPECT_EQ(format_deviation(12.345), "12.3");
  EXPECT_EQ(format_deviation(0.0), "0.00");
}

TEST(Config, ValidationCatchesBadExperiment) {
  ExperimentConfig cfg;
  cfg.load_jitter = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  EXPECT_THROW(run_trajectory_experiment(cfg, Shape::Circle, 0.0), std::invalid_argument);
  EXPECT_NEAR(cfg.session.scale.factor, 0.98 / 0.60, 1e-15);
  (void)kTwoPi;
}

}  // namespace
}  // namespace twinarm::harness
