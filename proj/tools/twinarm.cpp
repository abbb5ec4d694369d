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

// twinarm: experiment driver and teleoperation endpoints.
//
// Exit codes: 0 success, 2 validation error, 3 transport error, 1 other.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "twinarm/config_file.hpp"
#include "twinarm/console.hpp"
#include "twinarm/harness.hpp"
#include "twinarm/trace.hpp"
#include "twinarm/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace twinarm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitTransport = 3;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct Common {
  std::string config_path;
};

harness::ExperimentConfig load(const Common& common) {
  if (common.config_path.empty()) return {};
  return config::load_config(common.config_path);
}

json config_json(const harness::ExperimentConfig& c) {
  const auto& g = c.demo.geometry;
  const auto& f = c.demo.friction;
  const auto& s = c.session;
  return {
      {"demo",
       {{"length", g.length},
        {"mass", g.mass},
        {"bend_stiffness", g.bend_stiffness},
        {"tip_mass", g.tip_mass},
        {"pitch_radius", g.layout.pitch_radius},
        {"gravity", {g.gravity.x(), g.gravity.y(), g.gravity.z()}},
        {"max_bend", g.max_bend}}},
      {"friction",
       {{"mu_s", f.mu_s},
        {"mu_k", f.mu_k},
        {"alpha", f.alpha},
        {"beta", f.beta},
        {"k_act", f.k_act},
        {"c_act", f.c_act},
        {"k_kf", f.k_kf},
        {"c_kf", f.c_kf}}},
      {"backdrive", {{"mobility", c.demo.backdrive.mobility}, {"max_substep", c.demo.backdrive.max_substep}}},
      {"executor", {{"scale", s.scale.factor}, {"section_scale", s.scale.section_factor}}},
      {"stiffness",
       {{"profile", s.profile.name()},
        {"current_low", s.profile.current_low},
        {"current_high", s.profile.current_high},
        {"k_low", s.profile.stiffness_low},
        {"k_high", s.profile.stiffness_high}}},
      {"tracking",
       {{"deadband", s.tracking.deadband},
        {"rate_limit", s.tracking.rate_limit},
        {"time_constant", s.tracking.time_constant}}},
      {"session", {{"rate_hz", s.rate_hz}, {"endpoint", s.endpoint}}},
      {"load",
       {{"shape", std::string(harness::to_string(c.load.shape))},
        {"plane", std::string(harness::to_string(c.load.plane))},
        {"amplitude", c.load.amplitude},
        {"period", c.load.period},
        {"arc_length", c.load.arc_length},
        {"jitter", c.load_jitter},
        {"bias", {c.load_bias.x(), c.load_bias.y(), c.load_bias.z()}}}},
      {"gap", {{"durations", c.gap_durations}}},
      {"seed", c.seed},
  };
}

json stats_json(const teleop::SessionStats& s) {
  return {{"frames_received", s.frames_received}, {"frames_applied", s.frames_applied},
          {"frames_dropped", s.frames_dropped},   {"stalls", s.stalls},
          {"order_violations", s.order_violations}, {"mean_latency_us", s.mean_latency_us},
          {"transport_failed", s.transport_failed}};
}

void write_manifest(const fs::path& path, const json& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
}

void print_metrics_table(const std::vector<harness::TrajectoryResult>& rows) {
  std::printf("%-10s %8s %8s %8s\n", "shape", "x(%)", "y(%)", "z(%)");
  for (const auto& r : rows) {
    std::printf("%-10s", std::string(harness::to_string(r.shape)).c_str());
    for (int a = 0; a < 3; ++a) {
      std::string v = harness::format_deviation(r.metrics.value[a]);
      if (r.metrics.absolute[a]) v += "m";
      std::printf(" %8s", v.c_str());
    }
    std::printf("\n");
  }
}

int cmd_experiment(const Common& common, const std::string& shape, const std::string& stiffness,
                   std::optional<double> scale, double duration, const std::string& out_dir,
                   std::optional<std::uint64_t> seed) {
  harness::ExperimentConfig cfg = load(common);
  if (!stiffness.empty()) cfg.session.profile = cfg.session.profile.with_levels(stiffness);
  if (scale) cfg.set_scale(*scale);
  if (seed) cfg.seed = *seed;
  cfg.validate();

  std::vector<harness::Shape> shapes;
  if (shape == "all") {
    shapes.assign(harness::kFigureShapes.begin(), harness::kFigureShapes.end());
  } else {
    shapes.push_back(harness::parse_shape(shape));
  }

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  std::vector<harness::TrajectoryResult> rows;
  json outputs = json::array();
  json metrics = json::array();
  for (harness::Shape s : shapes) {
    rows.push_back(harness::run_trajectory_experiment(cfg, s, duration));
    const auto& r = rows.back();
    const std::string name(harness::to_string(s));
    harness::write_trajectory_csv(out / ("trajectory_" + name + ".csv"), r);
    teleop::record_trace(out / ("frames_" + name + ".csv"), r.frames);
    outputs.push_back("trajectory_" + name + ".csv");
    outputs.push_back("frames_" + name + ".csv");
    metrics.push_back({{"shape", name},
                       {"x", r.metrics.value[0]},
                       {"y", r.metrics.value[1]},
                       {"z", r.metrics.value[2]},
                       {"absolute", {r.metrics.absolute[0], r.metrics.absolute[1], r.metrics.absolute[2]}},
                       {"session", stats_json(r.stats)}});
  }
  harness::write_metrics_csv(out / "metrics.csv", rows);
  outputs.push_back("metrics.csv");
  write_manifest(out / "manifest.json", {{"command", "experiment"},
                                         {"duration", duration},
                                         {"config", config_json(cfg)},
                                         {"metrics", metrics},
                                         {"outputs", outputs}});
  print_metrics_table(rows);
  return kExitOk;
}

int cmd_stiffness(const Common& common, const std::vector<std::string>& profiles, const std::vector<double>& force,
                  const std::string& out_dir) {
  harness::ExperimentConfig cfg = load(common);
  std::vector<twin::StiffnessProfile> list;
  for (const auto& name : profiles) list.push_back(cfg.session.profile.with_levels(name));
  statics::ExternalLoad load = harness::default_tip_load(cfg.demo.geometry);
  if (!force.empty()) load.force = arm::Vec3(force[0], force[1], force[2]);
  const auto rows = harness::run_stiffness_experiment(cfg.demo.geometry, cfg.demo.friction, load, list);

  fs::create_directories(out_dir);
  harness::write_stiffness_csv(fs::path(out_dir) / "stiffness.csv", rows);
  json table = json::array();
  std::printf("%-8s %12s %10s %10s %10s\n", "profile", "tip_disp(m)", "theta_1", "theta_2", "theta_3");
  for (const auto& r : rows) {
    std::printf("%-8s %12.6f %10.6f %10.6f %10.6f%s\n", r.profile.c_str(), r.tip_displacement,
                r.config.sections[0].bend, r.config.sections[1].bend, r.config.sections[2].bend,
                r.converged ? "" : "  (not converged)");
    table.push_back({{"profile", r.profile}, {"tip_displacement", r.tip_displacement}, {"converged", r.converged}});
  }
  write_manifest(fs::path(out_dir) / "manifest.json",
                 {{"command", "stiffness"},
                  {"load", {{"s", load.arc_length}, {"force", {load.force.x(), load.force.y(), load.force.z()}}}},
                  {"config", config_json(cfg)},
                  {"rows", table},
                  {"outputs", {"stiffness.csv"}}});
  return kExitOk;
}

int cmd_gap(const Common& common, const std::string& out_dir) {
  const harness::ExperimentConfig cfg = load(common);
  const auto g = harness::run_gap_scenario(cfg);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  harness::write_phase_log_csv(out / "phase_log.csv", g.log);
  harness::write_trajectory_csv(out / "trajectory_gap.csv", g.trajectory);
  teleop::record_trace(out / "frames_gap.csv", g.trajectory.frames);
  json log = json::array();
  std::printf("%-18s %-7s %8s %8s\n", "phase", "profile", "start(s)", "end(s)");
  for (const auto& e : g.log) {
    std::printf("%-18s %-7s %8.2f %8.2f\n", e.phase.c_str(), e.profile.c_str(), e.start, e.end);
    log.push_back({{"phase", e.phase}, {"profile", e.profile}, {"start", e.start}, {"end", e.end}});
  }
  std::printf("total %.2f s\n", g.duration);
  write_manifest(out / "manifest.json", {{"command", "gap-demo"},
                                         {"config", config_json(cfg)},
                                         {"phases", log},
                                         {"duration", g.duration},
                                         {"session", stats_json(g.trajectory.stats)},
                                         {"outputs", {"phase_log.csv", "trajectory_gap.csv", "frames_gap.csv"}}});
  return kExitOk;
}

int cmd_workspace(const Common& common, std::size_t samples) {
  const harness::ExperimentConfig cfg = load(common);
  const auto demo = arm::workspace_extents(cfg.demo.geometry, samples);
  const auto exec = arm::workspace_extents(cfg.executor(), samples);
  std::printf("%-12s %10s %10s\n", "arm", "width(m)", "height(m)");
  std::printf("%-12s %10.4f %10.4f\n", "demonstrator", demo.width, demo.height);
  std::printf("%-12s %10.4f %10.4f\n", "executor", exec.width, exec.height);
  std::printf("ratio        %10.4f %10.4f\n", exec.width / demo.width, exec.height / demo.height);
  return kExitOk;
}

// Executor side of a replay or a network stream: records applied states.
class CsvSink : public teleop::ExecutorSink {
 public:
  explicit CsvSink(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "seq,t_us,applied_us,theta_1,phi_1,theta_2,phi_2,theta_3,phi_3\n";
  }
  void apply(const teleop::ExecutorUpdate& u) override {
    char buf[64];
    out_ << u.frame.sequence << ',' << u.frame.timestamp_us << ',' << u.applied_at_us;
    for (const auto& s : u.config.sections) {
      std::snprintf(buf, sizeof buf, ",%.9g,%.9g", s.bend, s.azimuth);
      out_ << buf;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

void print_stats(const teleop::SessionStats& s) {
  std::printf("received %llu applied %llu dropped %llu stalls %llu mean latency %.1f us\n",
              static_cast<unsigned long long>(s.frames_received), static_cast<unsigned long long>(s.frames_applied),
              static_cast<unsigned long long>(s.frames_dropped), static_cast<unsigned long long>(s.stalls),
              s.mean_latency_us);
}

int cmd_replay(const Common& common, const std::string& trace, std::optional<double> scale, const std::string& out,
               const std::string& send_to) {
  harness::ExperimentConfig cfg = load(common);
  if (scale) cfg.set_scale(*scale);
  cfg.validate();
  teleop::TraceSource source = teleop::replay_trace(trace);

  if (!send_to.empty()) {
    teleop::TcpFrameSender sender(teleop::Endpoint::parse(send_to));
    const auto start = std::chrono::steady_clock::now();
    std::optional<std::uint64_t> t0;
    std::size_t sent = 0;
    while (auto f = source.next()) {
      if (!t0) t0 = f->timestamp_us;
      std::this_thread::sleep_until(start + std::chrono::microseconds(f->timestamp_us - *t0));
      sender.send(*f);
      ++sent;
    }
    sender.close();
    std::printf("sent %zu frames to %s\n", sent, send_to.c_str());
    return kExitOk;
  }

  CsvSink sink(out);
  const auto stats = teleop::run_session(source, sink, cfg.session, teleop::SessionTiming::Simulated);
  print_stats(stats);
  return stats.transport_failed ? kExitTransport : kExitOk;
}

int cmd_receive(const Common& common, std::uint16_t port, std::optional<double> scale, const std::string& out) {
  harness::ExperimentConfig cfg = load(common);
  if (scale) cfg.set_scale(*scale);
  cfg.validate();
  teleop::TcpFrameSource source({"0.0.0.0", port});
  std::printf("listening on port %u\n", static_cast<unsigned>(source.port()));
  std::fflush(stdout);
  CsvSink sink(out);
  const auto stats = teleop::run_session(source, sink, cfg.session, teleop::SessionTiming::RealTime);
  print_stats(stats);
  if (stats.transport_failed) {
    std::fprintf(stderr, "transport error: %s\n", stats.error.c_str());
    return kExitTransport;
  }
  return kExitOk;
}

// Live settings shared between the demonstrator stepper and the console sink.
struct LiveSettings {
  std::mutex mutex;
  twin::StiffnessProfile profile;
  twin::ScaleMapping scale;
};

class ConsoleSink : public teleop::ExecutorSink {
 public:
  ConsoleSink(console::ConsoleServer& server, const harness::ExperimentConfig& cfg, LiveSettings& live)
      : server_(server), cfg_(cfg), live_(live) {}

  void apply(const teleop::ExecutorUpdate& u) override {
    twin::StiffnessProfile profile;
    twin::ScaleMapping scale;
    {
      std::lock_guard lock(live_.mutex);
      profile = live_.profile;
      scale = live_.scale;
    }
    const auto& geom = cfg_.demo.geometry;
    console::StateSnapshot s;
    s.sequence = u.frame.sequence;
    s.t_us = u.frame.timestamp_us;
    s.demo = arm::config_from_tendons(u.frame.displacement_vector(), geom.layout).config;
    s.exec = u.config;
    const arm::Vec3 demo_tip = arm::forward_kinematics(s.demo, geom).tip().translation();
    const arm::Vec3 exec_tip =
        arm::forward_kinematics(s.exec, harness::executor_geometry(geom, scale)).tip().translation() / scale.factor;
    s.deviation = exec_tip - demo_tip;
    s.profile = profile.name();
    s.scale = scale.factor;
    s.held = statics::hold_check(s.demo, u.frame.current_vector(), geom, cfg_.demo.friction).held;
    server_.broadcast(console::state_message(s));
  }

 private:
  console::ConsoleServer& server_;
  const harness::ExperimentConfig& cfg_;
  LiveSettings& live_;
};

int cmd_serve(const Common& common, std::uint16_t port, double duration) {
  harness::ExperimentConfig cfg = load(common);
  cfg.validate();
  const auto& geom = cfg.demo.geometry;
  console::ConsoleServer server({"0.0.0.0", port}, geom.total_length());
  std::printf("console feed on ws://localhost:%u\n", static_cast<unsigned>(server.port()));
  std::fflush(stdout);

  LiveSettings live;
  live.profile = cfg.session.profile;
  live.scale = cfg.session.scale;
  teleop::SessionControl control;
  statics::ArmState state = statics::ArmState::at_rest(arm::ArmConfig::straight(), geom.layout);
  statics::ExternalLoad load{geom.total_length(), arm::Vec3::Zero()};
  const double dt = 1.0 / cfg.session.rate_hz;
  std::uint32_t seq = 0;

  teleop::GeneratorFrameSource source([&]() -> std::optional<teleop::TendonFrame> {
    const double t = seq * dt;
    if (g_interrupted || (duration > 0.0 && t > duration)) return std::nullopt;
    for (auto& c : server.drain()) {
      if (auto* l = std::get_if<console::LoadCommand>(&c)) {
        load = l->load;
      } else if (auto* p = std::get_if<console::ProfileCommand>(&c)) {
        std::lock_guard lock(live.mutex);
        live.profile = live.profile.with_levels(p->name);
      } else if (auto* x = std::get_if<console::ScaleCommand>(&c)) {
        const auto mapping = twin::ScaleMapping::uniform(x->x);
        control.request_scale(mapping);
        std::lock_guard lock(live.mutex);
        live.scale = mapping;
      }
    }
    twin::StiffnessProfile profile;
    {
      std::lock_guard lock(live.mutex);
      profile = live.profile;
    }
    const arm::CurrentVector currents = twin::apply_stiffness_profile(profile);
    if (seq > 0) state = statics::backdrive_step(state, std::span(&load, 1), currents, dt, cfg.demo);
    const auto frame = teleop::TendonFrame::from_state(
        seq, static_cast<std::uint64_t>(std::llround(t * 1e6)), state.displacement(), currents);
    ++seq;
    return frame;
  });

  ConsoleSink sink(server, cfg, live);
  const auto stats = teleop::run_session(source, sink, cfg.session, teleop::SessionTiming::RealTime, &control);
  print_stats(stats);
  return stats.transport_failed ? kExitTransport : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twinarm: twin continuum-arm teleoperation experiments"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "Run configuration file (key = value)")->check(CLI::ExistingFile);

  auto* experiment = app.add_subcommand("experiment", "Trace figures with the demonstrator and compare tips");
  std::string shape = "all";
  std::string stiffness;
  std::optional<double> scale;
  double duration = 60.0;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  experiment->add_option("--shape", shape, "circle|square|triangle|star|all")->capture_default_str();
  experiment->add_option("--stiffness", stiffness, "Stiffness profile LLL..HHH");
  experiment->add_option("--scale", scale, "Executor scale X");
  experiment->add_option("--duration", duration, "Seconds per figure")->capture_default_str();
  experiment->add_option("--out", out_dir, "Output directory")->capture_default_str();
  experiment->add_option("--seed", seed, "Operator-variation seed");

  auto* stiff = app.add_subcommand("stiffness", "Equilibrium deflection per stiffness profile");
  std::vector<std::string> profiles(twin::profile_names().begin(), twin::profile_names().end());
  std::vector<double> force;
  std::string stiff_out = "out";
  stiff->add_option("--profiles", profiles, "Profiles to compare")->capture_default_str();
  stiff->add_option("--force", force, "Tip force fx fy fz (N)")->expected(3);
  stiff->add_option("--out", stiff_out, "Output directory")->capture_default_str();

  auto* gap = app.add_subcommand("gap-demo", "Scripted narrow-gap exploration with stiffness switching");
  std::string gap_out = "out";
  gap->add_option("--out", gap_out, "Output directory")->capture_default_str();

  auto* workspace = app.add_subcommand("workspace", "Reachable tip extents of both arms");
  std::size_t samples = 100000;
  workspace->add_option("--samples", samples, "Sample count (>= 1000)")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Live session with the operator console feed");
  std::uint16_t serve_port = 8765;
  double serve_duration = 0.0;
  serve->add_option("--port", serve_port, "WebSocket port")->capture_default_str();
  serve->add_option("--duration", serve_duration, "Stop after this many seconds (0 = until interrupted)");

  auto* replay = app.add_subcommand("replay", "Replay a recorded trace into the executor");
  std::string trace;
  std::optional<double> replay_scale;
  std::string replay_out = "executor.csv";
  std::string send_to;
  replay->add_option("trace", trace, "Trace CSV")->required()->check(CLI::ExistingFile);
  replay->add_option("--scale", replay_scale, "Executor scale X");
  replay->add_option("--out", replay_out, "Executor state CSV")->capture_default_str();
  replay->add_option("--send", send_to, "Stream to a remote executor at host:port instead");

  auto* receive = app.add_subcommand("receive", "Executor endpoint: receive frames over TCP");
  std::uint16_t receive_port = 7600;
  std::optional<double> receive_scale;
  std::string receive_out = "executor.csv";
  receive->add_option("--port", receive_port, "TCP port")->capture_default_str();
  receive->add_option("--scale", receive_scale, "Executor scale X");
  receive->add_option("--out", receive_out, "Executor state CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    if (*experiment) return cmd_experiment(common, shape, stiffness, scale, duration, out_dir, seed);
    if (*stiff) return cmd_stiffness(common, profiles, force, stiff_out);
    if (*gap) return cmd_gap(common, gap_out);
    if (*workspace) return cmd_workspace(common, samples);
    if (*serve) return cmd_serve(common, serve_port, serve_duration);
    if (*replay) return cmd_replay(common, trace, replay_scale, replay_out, send_to);
    if (*receive) return cmd_receive(common, receive_port, receive_scale, receive_out);
  } catch (const teleop::TransportError& e) {
    std::fprintf(stderr, "transport error: %s\n", e.what());
    return kExitTransport;
  } catch (const std::invalid_argument& e) {  // includes config and message errors
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitValidation;
  } catch (const teleop::TraceError& e) {
    std::fprintf(stderr, "invalid trace: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
