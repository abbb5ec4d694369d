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

#include "twinarm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace twinarm::harness {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

Eigen::Vector2d polygon_point(const std::vector<Eigen::Vector2d>& v, double u) {
  const double n = static_cast<double>(v.size());
  const double x = u * n;
  const auto e = std::min(static_cast<std::size_t>(x), v.size() - 1);
  const double w = x - static_cast<double>(e);
  return v[e] + w * (v[(e + 1) % v.size()] - v[e]);
}

std::vector<Eigen::Vector2d> regular_vertices(int n, int stride) {
  std::vector<Eigen::Vector2d> v;
  for (int k = 0; k < n; ++k) {
    const double a = kTwoPi * static_cast<double>((k * stride) % n) / n;
    v.emplace_back(std::cos(a), std::sin(a));
  }
  return v;
}

Vec3 to_plane(Plane plane, const Eigen::Vector2d& q) {
  switch (plane) {
    case Plane::XY:
      return {q.x(), q.y(), 0.0};
    case Plane::XZ:
      return {q.x(), 0.0, q.y()};
    case Plane::YZ:
      return {0.0, q.x(), q.y()};
  }
  return Vec3::Zero();
}

// Seeded, piecewise-linear amplitude envelope: one random factor per period
// boundary, so the load stays continuous.
class Envelope {
 public:
  Envelope(std::uint64_t seed, double jitter, double period, double duration) : period_(period) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const auto n = static_cast<std::size_t>(std::ceil(duration / period)) + 2;
    for (std::size_t k = 0; k < n; ++k) factor_.push_back(1.0 + jitter * dist(rng));
  }

  double operator()(double t) const {
    const double x = t / period_;
    const auto k = std::min(static_cast<std::size_t>(x), factor_.size() - 2);
    const double w = std::clamp(x - static_cast<double>(k), 0.0, 1.0);
    return factor_[k] + w * (factor_[k + 1] - factor_[k]);
  }

 private:
  double period_;
  std::vector<double> factor_;
};

std::size_t frame_count(double duration, double rate) {
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

std::uint64_t to_us(double t) { return static_cast<std::uint64_t>(std::llround(t * 1e6)); }

// Demonstrator tip as seen through the wire: configuration recovered from
// the transmitted tendon displacements.
Vec3 sensed_tip(const teleop::TendonFrame& f, const ArmGeometry& geom, ArmConfig* config) {
  const ArmConfig c = arm::config_from_tendons(f.displacement_vector(), geom.layout).config;
  if (config) *config = c;
  return arm::forward_kinematics(c, geom).tip().translation();
}

using LoadAt = std::function<ExternalLoad(double)>;
using CurrentsAt = std::function<arm::CurrentVector(double)>;

// Back-drives the demonstrator for `duration` and streams it through a
// loopback session.
TrajectoryResult drive_and_stream(const ExperimentConfig& cfg, double duration, const LoadAt& load_at,
                                  const CurrentsAt& currents_at) {
  const double rate = cfg.session.rate_hz;
  const double dt = 1.0 / rate;
  const std::size_t n = frame_count(duration, rate);
  const ArmGeometry& demo = cfg.demo.geometry;
  const ArmGeometry exec = cfg.executor();

  TrajectoryResult r;
  statics::ArmState state = statics::ArmState::at_rest(ArmConfig::straight(), demo.layout);
  r.frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const arm::CurrentVector currents = currents_at(t);
    if (k > 0) {
      const ExternalLoad load = load_at(t - dt);
      state = statics::backdrive_step(state, std::span(&load, 1), currents, dt, cfg.demo);
    }
    r.frames.push_back(teleop::TendonFrame::from_state(static_cast<std::uint32_t>(k), to_us(t),
                                                       state.displacement(), currents));
    ArmConfig c;
    const Vec3 tip = sensed_tip(r.frames.back(), demo, &c);
    r.demo_tip.push_back({t, tip});
    r.demo_config.push_back(c);
  }

  teleop::VectorFrameSource source(r.frames);
  teleop::RecordingSink sink;
  r.stats = teleop::run_session(source, sink, cfg.session, teleop::SessionTiming::Simulated);
  const double x = cfg.session.scale.factor;
  for (const auto& u : sink.updates) {
    const Vec3 tip = arm::forward_kinematics(u.config, exec).tip().translation() / x;
    r.exec_tip.push_back({static_cast<double>(u.applied_at_us) * 1e-6, tip});
    r.exec_config.push_back(u.config);
  }
  r.metrics = twin::deviation_metrics(r.demo_tip, r.exec_tip);
  return r;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Shape parse_shape(std::string_view name) {
  for (Shape s : {Shape::Circle, Shape::Square, Shape::Triangle, Shape::Star, Shape::LateralSweep,
                  Shape::RotationSweep}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown shape '" + std::string(name) + "'");
}

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::Circle:
      return "circle";
    case Shape::Square:
      return "square";
    case Shape::Triangle:
      return "triangle";
    case Shape::Star:
      return "star";
    case Shape::LateralSweep:
      return "lateral-sweep";
    case Shape::RotationSweep:
      return "rotation-sweep";
  }
  return "unknown";
}

Plane parse_plane(std::string_view name) {
  if (name == "xy") return Plane::XY;
  if (name == "xz") return Plane::XZ;
  if (name == "yz") return Plane::YZ;
  throw std::invalid_argument("unknown plane '" + std::string(name) + "' (expected xy, xz or yz)");
}

std::string_view to_string(Plane p) {
  switch (p) {
    case Plane::XY:
      return "xy";
    case Plane::XZ:
      return "xz";
    case Plane::YZ:
      return "yz";
  }
  return "unknown";
}

void LoadScript::validate() const {
  require(amplitude > 0.0, "load amplitude must be positive");
  require(period > 0.0, "load period must be positive");
  require(arc_length >= 0.0, "load application point must be non-negative");
}

Eigen::Vector2d shape_pattern(Shape shape, double u) {
  u -= std::floor(u);
  switch (shape) {
    case Shape::Circle:
      return {std::cos(kTwoPi * u), std::sin(kTwoPi * u)};
    case Shape::Square: {
      static const std::vector<Eigen::Vector2d> v = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
      return polygon_point(v, u);
    }
    case Shape::Triangle: {
      static const auto v = regular_vertices(3, 1);
      return polygon_point(v, u);
    }
    case Shape::Star: {
      static const auto v = regular_vertices(5, 2);
      return polygon_point(v, u);
    }
    case Shape::LateralSweep:
      return {std::sin(kTwoPi * u), 0.0};
    case Shape::RotationSweep: {
      const double psi = 0.5 * std::numbers::pi * std::sin(kTwoPi * u);
      return {std::cos(psi), std::sin(psi)};
    }
  }
  return Eigen::Vector2d::Zero();
}

ExternalLoad generate_load_path(const LoadScript& script, double t) {
  script.validate();
  require(t >= 0.0, "load time must be non-negative");
  return {script.arc_length, script.amplitude * to_plane(script.plane, shape_pattern(script.shape, t / script.period))};
}

ArmGeometry executor_geometry(const ArmGeometry& demo, const twin::ScaleMapping& mapping) {
  mapping.validate();
  ArmGeometry g = demo;
  for (std::size_t i = 0; i < arm::kSections; ++i) {
    g.length[i] *= mapping.section_factor[i];
    g.layout.pitch_radius[i] *= mapping.section_factor[i];
  }
  return g;
}

ExperimentConfig::ExperimentConfig() {
  load.arc_length = demo.geometry.total_length();
  set_scale(0.98 / 0.60);
}

void ExperimentConfig::set_scale(double x) {
  session.scale = twin::ScaleMapping::uniform(x);
  session.executor_layout = executor().layout;
}

void ExperimentConfig::validate() const {
  demo.geometry.validate();
  demo.friction.validate();
  require(demo.backdrive.mobility > 0.0 && demo.backdrive.max_substep > 0.0,
          "backdrive mobility and substep must be positive");
  session.validate();
  load.validate();
  require(load.arc_length <= demo.geometry.total_length() * (1.0 + 1e-12), "load application point beyond the tip");
  require(load_jitter >= 0.0 && load_jitter < 1.0, "load jitter must be in [0, 1)");
  for (double d : gap_durations) require(d > 0.0, "gap phase durations must be positive");
}

TrajectoryResult run_trajectory_experiment(const ExperimentConfig& cfg, Shape shape, double duration) {
  cfg.validate();
  require(duration > 0.0, "experiment duration must be positive");
  LoadScript script = cfg.load;
  script.shape = shape;
  const Envelope env(cfg.seed, cfg.load_jitter, script.period, duration);
  const arm::CurrentVector currents = twin::apply_stiffness_profile(cfg.session.profile);
  TrajectoryResult r = drive_and_stream(
      cfg, duration,
      [&](double t) {
        ExternalLoad l = generate_load_path(script, t);
        l.force = env(t) * l.force + cfg.load_bias;
        return l;
      },
      [&](double) { return currents; });
  r.shape = shape;
  return r;
}

ExternalLoad default_tip_load(const ArmGeometry& geom) {
  return {geom.total_length(), Vec3(0.5, 0.0, 0.0)};
}

std::vector<StiffnessRow> run_stiffness_experiment(const ArmGeometry& geom, const statics::FrictionParams& friction,
                                                   const ExternalLoad& load,
                                                   const std::vector<twin::StiffnessProfile>& profiles) {
  require(profiles.size() >= 2, "stiffness experiment needs at least two profiles");
  geom.validate();
  friction.validate();
  const Vec3 rest = arm::forward_kinematics(ArmConfig::straight(), geom).tip().translation();
  std::vector<StiffnessRow> rows;
  for (const auto& profile : profiles) {
    const arm::CurrentVector currents = twin::apply_stiffness_profile(profile);
    statics::ChannelStates channels{};
    for (std::size_t n = 0; n < arm::kTendons; ++n) {
      channels[n].current = currents[n];
      channels[n].tension = statics::actuation_force(currents[n], friction);
    }
    statics::SolverOptions options;
    options.extra_moment = [&profile](const ArmConfig& c) { return twin::stiffness_moment(c, profile); };
    const auto eq = statics::solve_equilibrium(std::span(&load, 1), channels, geom, options);
    StiffnessRow row;
    row.profile = profile.name();
    row.config = eq.config;
    row.tip = arm::forward_kinematics(eq.config, geom).tip().translation();
    row.tip_displacement = (row.tip - rest).norm();
    row.converged = eq.converged;
    rows.push_back(row);
  }
  return rows;
}

GapResult run_gap_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Phase {
    const char* name;
    const char* profile;
    double duration;
  };
  const std::array<Phase, 4> phases = {{{"entry", "LLL", cfg.gap_durations[0]},
                                        {"lateral-search", "LHH", cfg.gap_durations[1]},
                                        {"rotational-search", "HLL", cfg.gap_durations[2]},
                                        {"retraction", "LLL", cfg.gap_durations[3]}}};
  std::array<double, 5> edge{};
  for (std::size_t p = 0; p < phases.size(); ++p) edge[p + 1] = edge[p] + phases[p].duration;
  // Phase of a sample time; boundaries belong to the later phase.
  auto phase_at = [&](double t) {
    std::size_t p = 0;
    while (p + 1 < phases.size() && t >= edge[p + 1] - 1e-9) ++p;
    return p;
  };

  std::array<arm::CurrentVector, 4> currents;
  for (std::size_t p = 0; p < phases.size(); ++p) {
    currents[p] = twin::apply_stiffness_profile(cfg.session.profile.with_levels(phases[p].profile));
  }

  const double a = cfg.load.amplitude;
  const double s = cfg.load.arc_length;
  auto load_at = [&](double t) -> ExternalLoad {
    const std::size_t p = phase_at(t);
    const double tau = t - edge[p];
    const double frac = tau / phases[p].duration;
    switch (p) {
      case 0:  // push the tip sideways into the gap
        return {s, Vec3(a * frac, 0.0, 0.0)};
      case 1:  // one horizontal sweep
        return {s, Vec3(a, a * std::sin(kTwoPi * frac), 0.0)};
      case 2:  // up/down/left/right about the held posture
        return {s, Vec3(a, 0.0, 0.0) + 0.5 * a * to_plane(Plane::YZ, shape_pattern(Shape::Circle, 2.0 * frac))};
      default:  // release
        return {s, Vec3(a * std::max(0.0, 1.0 - frac), 0.0, 0.0)};
    }
  };

  GapResult g;
  g.trajectory = drive_and_stream(cfg, edge.back(), load_at, [&](double t) { return currents[phase_at(t)]; });
  const auto& tips = g.trajectory.demo_tip;
  for (std::size_t k = 0; k < tips.size(); ++k) {
    const std::size_t p = phase_at(tips[k].t);
    if (g.log.empty() || g.log.back().phase != phases[p].name) {
      if (!g.log.empty()) {
        g.log.back().end = tips[k].t;
        g.log.back().tip_end = tips[k].position;
      }
      g.log.push_back({phases[p].name, phases[p].profile, tips[k].t, tips[k].t, tips[k].position, tips[k].position});
    }
  }
  if (!g.log.empty()) {
    g.log.back().end = tips.back().t;
    g.log.back().tip_end = tips.back().position;
  }
  for (std::size_t p = 0; p < g.log.size(); ++p) {
    if (p >= phases.size() || g.log[p].profile != phases[p].profile) {
      throw std::logic_error("gap scenario applied its stiffness schedule out of order");
    }
  }
  g.duration = tips.back().t - tips.front().t;
  return g;
}

std::string format_deviation(double value) {
  if (!std::isfinite(value)) return "nan";
  int digits = 2;
  if (value != 0.0) digits = std::max(0, 2 - static_cast<int>(std::floor(std::log10(std::abs(value)))));
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << value;
  return os.str();
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryResult& r) {
  auto out = open_out(path);
  out << "t,demo_x,demo_y,demo_z,exec_x,exec_y,exec_z";
  for (const char* who : {"demo", "exec"}) {
    for (int i = 1; i <= 3; ++i) out << ',' << who << "_theta_" << i << ',' << who << "_phi_" << i;
  }
  out << '\n';
  const std::size_t n = std::min(r.demo_tip.size(), r.exec_tip.size());
  // Executor samples are matched to demonstrator frames by sequence number.
  std::size_t e = 0;
  for (std::size_t k = 0; k < r.demo_tip.size() && e < n; ++k) {
    if (r.frames[k].timestamp_us != static_cast<std::uint64_t>(std::llround(r.exec_tip[e].t * 1e6))) continue;
    const auto& d = r.demo_tip[k];
    const auto& x = r.exec_tip[e];
    out << num(d.t);
    for (int a = 0; a < 3; ++a) out << ',' << num(d.position[a]);
    for (int a = 0; a < 3; ++a) out << ',' << num(x.position[a]);
    for (const ArmConfig* c : {&r.demo_config[k], &r.exec_config[e]}) {
      for (const auto& sec : c->sections) out << ',' << num(sec.bend) << ',' << num(sec.azimuth);
    }
    out << '\n';
    ++e;
  }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<TrajectoryResult>& rows) {
  auto out = open_out(path);
  out << "shape,x,y,z,unit_x,unit_y,unit_z\n";
  for (const auto& r : rows) {
    out << to_string(r.shape);
    for (int a = 0; a < 3; ++a) out << ',' << format_deviation(r.metrics.value[a]);
    for (int a = 0; a < 3; ++a) out << ',' << (r.metrics.absolute[a] ? "m" : "%");
    out << '\n';
  }
}

void write_stiffness_csv(const std::filesystem::path& path, const std::vector<StiffnessRow>& rows) {
  auto out = open_out(path);
  out << "profile,tip_displacement,tip_x,tip_y,tip_z,theta_1,theta_2,theta_3,phi_1,phi_2,phi_3,converged\n";
  for (const auto& r : rows) {
    out << r.profile << ',' << num(r.tip_displacement);
    for (int a = 0; a < 3; ++a) out << ',' << num(r.tip[a]);
    for (const auto& s : r.config.sections) out << ',' << num(s.bend);
    for (const auto& s : r.config.sections) out << ',' << num(s.azimuth);
    out << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

void write_phase_log_csv(const std::filesystem::path& path, const std::vector<PhaseLogEntry>& log) {
  auto out = open_out(path);
  out << "phase,profile,start,end,tip_start_x,tip_start_y,tip_start_z,tip_end_x,tip_end_y,tip_end_z\n";
  for (const auto& e : log) {
    out << e.phase << ',' << e.profile << ',' << num(e.start) << ',' << num(e.end);
    for (int a = 0; a < 3; ++a) out << ',' << num(e.tip_start[a]);
    for (int a = 0; a < 3; ++a) out << ',' << num(e.tip_end[a]);
    out << '\n';
  }
}

}  // namespace twinarm::harness
