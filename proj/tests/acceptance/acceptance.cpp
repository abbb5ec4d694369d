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

// Acceptance run: one PASS/FAIL line per top-level requirement, each with
// its measured figure and wall time. Exit status is non-zero if any fail.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "twinarm/arm_model.hpp"
#include "twinarm/frame_codec.hpp"
#include "twinarm/harness.hpp"
#include "twinarm/session.hpp"
#include "twinarm/statics.hpp"
#include "twinarm/twin_control.hpp"

namespace {

using namespace twinarm;
using arm::ArmConfig;
using arm::ArmGeometry;
using arm::Vec3;

constexpr double kPi = std::numbers::pi;
constexpr double kX = 0.98 / 0.60;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed check without stopping the remaining ones.
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double wrapped(double a) { return std::abs(std::remainder(a, 2 * kPi)); }

ArmConfig random_config(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> th(lo, hi), ph(0.0, 2 * kPi);
  ArmConfig c;
  for (auto& s : c.sections) s = arm::SectionState::make(th(rng), ph(rng));
  return c;
}

Outcome kinematics() {
  Outcome o;
  std::mt19937_64 rng(2026);
  const ArmGeometry g = ArmGeometry::demonstrator();

  double sum_err = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const auto dl = arm::tendon_lengths(random_config(rng, 0.0, kPi), g.layout);
    for (std::size_t i = 0; i < 3; ++i) sum_err = std::max(sum_err, std::abs(dl(i, 0) + dl(i, 1) + dl(i, 2)));
  }
  o.require(sum_err <= 1e-12, "tendon sum " + fmt("%.3g", sum_err));

  double trip = 0.0;
  for (int n = 0; n < 100; ++n) {
    const ArmConfig c = random_config(rng, 0.05, 2.0);
    const ArmConfig b = arm::config_from_tendons(arm::tendon_lengths(c, g.layout), g.layout).config;
    for (std::size_t i = 0; i < 3; ++i) {
      trip = std::max({trip, std::abs(b.sections[i].bend - c.sections[i].bend),
                       wrapped(b.sections[i].azimuth - c.sections[i].azimuth)});
    }
  }
  o.require(trip < 1e-9, "round trip " + fmt("%.3g", trip));

  double jac = 0.0;
  for (int n = 0; n < 100; ++n) {
    const ArmConfig c = random_config(rng, 0.05, 2.0);
    const auto j = arm::tendon_jacobian(c, g.layout);
    Eigen::Matrix<double, 9, 6> fd;
    const double h = 1e-6;
    for (std::size_t i = 0; i < 3; ++i) {
      for (int k = 0; k < 2; ++k) {
        ArmConfig up = c, dn = c;
        (k == 0 ? up.sections[i].bend : up.sections[i].azimuth) += h;
        (k == 0 ? dn.sections[i].bend : dn.sections[i].azimuth) -= h;
        const auto a = arm::tendon_lengths(up, g.layout), b = arm::tendon_lengths(dn, g.layout);
        for (int r = 0; r < 9; ++r) fd(r, 2 * i + k) = (a[r] - b[r]) / (2 * h);
      }
    }
    jac = std::max(jac, (j - fd).norm() / j.norm());
  }
  o.require(jac < 1e-6, "jacobian rel " + fmt("%.3g", jac));

  // No jump at the straight configuration beyond first-order motion.
  const Vec3 straight = arm::forward_kinematics(ArmConfig::straight(), g).tip().translation();
  const auto j0 = arm::point_jacobian(ArmConfig::straight(), g, g.total_length()).jacobian;
  double cont = 0.0;
  for (double phi : {0.0, 1.0, 2.5, 4.0}) {
    ArmConfig c;
    for (auto& s : c.sections) s = {1e-8, phi};
    cont = std::max(cont, (arm::forward_kinematics(c, g).tip().translation() - straight - j0 * c.cartesian()).norm());
  }
  o.require(cont < 1e-9, "continuity " + fmt("%.3g", cont));

  double fk = 0.0;
  for (int n = 0; n < 50; ++n) {
    const ArmConfig c = random_config(rng, 0.0, kPi);
    std::array<oracle::Section, 3> secs;
    for (std::size_t i = 0; i < 3; ++i) secs[i] = {g.length[i], c.sections[i].bend, c.sections[i].azimuth};
    fk = std::max(fk, (arm::forward_kinematics(c, g).tip().translation() - oracle::integrate_tip(secs, 10000)).norm());
  }
  o.require(fk < 1e-6, "fk vs integration " + fmt("%.3g", fk));

  if (o.pass) {
    o.detail = "sum " + fmt("%.1e", sum_err) + ", round trip " + fmt("%.1e", trip) + " rad, jacobian " +
               fmt("%.1e", jac) + ", continuity " + fmt("%.1e", cont) + " m";
  }
  return o;
}

Outcome statics_oracle() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    oracle::SingleSectionCase c;
    c.length = 0.15 + 0.1 * uni(rng);
    c.stiffness = 0.1 + 0.6 * uni(rng);
    c.mass = 0.05 + 0.1 * uni(rng);
    const double m2 = 0.05 + 0.07 * uni(rng), m3 = 0.04 + 0.06 * uni(rng), tip = 0.05 * uni(rng);
    c.distal = {{0.1, m2}, {0.3, m3}, {0.4, tip}};
    const double tilt = 0.5 * kPi * uni(rng), az = 2 * kPi * uni(rng);
    c.gravity = 9.81 * Vec3(std::sin(tilt) * std::cos(az), std::sin(tilt) * std::sin(az), std::cos(tilt));

    ArmGeometry g = ArmGeometry::demonstrator();
    g.length = {c.length, 0.2, 0.2};
    g.mass = {c.mass, m2, m3};
    g.bend_stiffness = {c.stiffness, 1e6, 1e6};
    g.tip_mass = tip;
    g.gravity = c.gravity;
    const auto r = statics::solve_equilibrium({}, statics::ChannelStates{}, g);
    o.require(r.converged, "case " + std::to_string(n) + " did not converge");
    const auto ref = oracle::minimize_on_grid(c, 2000, 360, kPi);
    worst = std::max(worst, std::abs(r.config.sections[0].bend - ref.bend));
  }
  o.require(worst < 2e-3, "grid mismatch " + fmt("%.3g", worst));

  // Lateral force at the end of a lone section: theta ~ F L / (2k).
  ArmGeometry g = ArmGeometry::demonstrator();
  g.mass = {0, 0, 0};
  g.bend_stiffness = {0.5, 1e6, 1e6};
  g.gravity = Vec3::Zero();
  double lin = 0.0;
  for (double f : {0.05, 0.1, 0.2}) {
    const statics::ExternalLoad load{0.2, Vec3(f, 0, 0)};
    const auto r = statics::solve_equilibrium(std::span(&load, 1), statics::ChannelStates{}, g);
    const double th = r.config.sections[0].bend;
    o.require(th < 0.1, "linear case left the small-angle range");
    lin = std::max(lin, std::abs(th - f * 0.2 / 1.0) / (f * 0.2 / 1.0));
  }
  o.require(lin < 0.05, "linearized " + fmt("%.3g", lin));
  if (o.pass) o.detail = "max |dtheta| " + fmt("%.2e", worst) + " rad over 20 cases, linear " + fmt("%.2f", 100 * lin) + "%";
  return o;
}

Outcome friction_hold() {
  Outcome o;
  std::mt19937_64 rng(11);
  statics::DemonstratorModel model;
  const auto high = arm::CurrentVector::filled(0.6);

  int stuck = 0;
  for (int n = 0; n < 50; ++n) {
    const ArmConfig c = random_config(rng, 0.0, 0.5);
    if (!statics::hold_check(c, high, model.geometry, model.friction).held) continue;
    const auto s0 = statics::ArmState::at_rest(c, model.geometry.layout);
    const auto s1 = statics::backdrive_step(s0, {}, high, 0.05, model);
    const auto s2 = statics::backdrive_step(s1, {}, high, 0.05, model);
    bool same = true;
    for (std::size_t i = 0; i < 3; ++i) {
      same = same && s1.config.sections[i].bend == c.sections[i].bend &&
             s1.config.sections[i].azimuth == c.sections[i].azimuth &&
             s2.config.sections[i].bend == c.sections[i].bend && s2.config.sections[i].azimuth == c.sections[i].azimuth;
    }
    for (std::size_t k = 0; k < 9; ++k) {
      same = same && s1.channels[k].displacement == s0.channels[k].displacement &&
             s2.channels[k].tension == s1.channels[k].tension && s2.channels[k].velocity == 0.0;
    }
    o.require(same, "held state moved");
    ++stuck;
  }
  o.require(stuck >= 10, "too few held samples");

  std::uniform_real_distribution<double> cur(0.0, 0.6), bump(0.0, 0.3);
  int monotone_bad = 0;
  for (int n = 0; n < 50; ++n) {
    const ArmConfig c = random_config(rng, 0.0, 1.5);
    arm::CurrentVector lo;
    for (auto& v : lo.values) v = cur(rng);
    arm::CurrentVector hi = lo;
    for (std::size_t s = 0; s < 3; ++s) {
      const double d = bump(rng);
      for (std::size_t j = 0; j < 3; ++j) hi(s, j) += d;
    }
    const auto a = statics::hold_check(c, lo, model.geometry, model.friction);
    const auto b = statics::hold_check(c, hi, model.geometry, model.friction);
    for (std::size_t s = 0; s < 3; ++s) monotone_bad += b.margin[s] < a.margin[s] - 1e-12;
    monotone_bad += a.held && !b.held;
  }
  o.require(monotone_bad == 0, std::to_string(monotone_bad) + " monotonicity violations");

  statics::DemonstratorModel free_model;
  free_model.geometry.gravity = Vec3(9.81, 0, 0);
  free_model.friction.mu_s = 0.0;
  free_model.friction.mu_k = 0.0;
  const statics::ExternalLoad load{0.6, Vec3(0.0, 0.2, 0.0)};
  auto s = statics::ArmState::at_rest(ArmConfig::straight(), free_model.geometry.layout);
  for (int k = 0; k < 4000; ++k) s = statics::backdrive_step(s, std::span(&load, 1), {}, 0.05, free_model);
  statics::ChannelStates ch{};
  for (auto& c : ch) c.tension = free_model.friction.c_act;
  const auto ref = statics::solve_equilibrium(std::span(&load, 1), ch, free_model.geometry);
  double settle = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    settle = std::max(settle, (s.config.sections[i].cartesian() - ref.config.sections[i].cartesian()).norm());
  }
  o.require(ref.converged && settle < 1e-6, "frictionless settle " + fmt("%.3g", settle));
  if (o.pass) {
    o.detail = std::to_string(stuck) + " held states exact, 50 monotone, settle " + fmt("%.1e", settle) + " rad";
  }
  return o;
}

Outcome stiffness_orderings() {
  Outcome o;
  const ArmGeometry g = ArmGeometry::demonstrator();
  std::vector<twin::StiffnessProfile> profiles;
  for (const char* n : {"LLL", "LHH", "HLL", "HHH"}) profiles.push_back(twin::StiffnessProfile::parse(n));
  const auto rows = harness::run_stiffness_experiment(g, statics::FrictionParams{}, harness::default_tip_load(g), profiles);
  for (const auto& r : rows) o.require(r.converged, r.profile + " did not converge");
  const double lll = rows[0].tip_displacement, hhh = rows[3].tip_displacement;
  const double lhh = rows[1].config.sections[0].bend, hll = rows[2].config.sections[0].bend;
  o.require(hhh < lll, "tip HHH " + fmt("%.4f", hhh) + " !< LLL " + fmt("%.4f", lll));
  o.require(hll < lhh, "theta1 HLL " + fmt("%.4f", hll) + " !< LHH " + fmt("%.4f", lhh));
  if (o.pass) {
    o.detail = "tip HHH " + fmt("%.4f", hhh) + " < LLL " + fmt("%.4f", lll) + " m; theta1 HLL " + fmt("%.4f", hll) +
               " < LHH " + fmt("%.4f", lhh) + " rad";
  }
  return o;
}

std::vector<teleop::TendonFrame> demo_frames(const arm::TendonLayout& layout) {
  std::vector<teleop::TendonFrame> frames;
  for (int k = 0; k <= 1000; ++k) {
    const double t = 0.01 * k;
    ArmConfig c;
    for (std::size_t i = 0; i < 3; ++i) c.sections[i] = arm::SectionState::make(0.7 + 0.5 * std::sin(0.8 * t + i), 1.1 * t + 2.0 * i);
    frames.push_back(teleop::TendonFrame::from_state(k, static_cast<std::uint64_t>(10000) * k,
                                                     arm::tendon_lengths(c, layout), arm::CurrentVector::filled(0.1)));
  }
  return frames;
}

std::vector<ArmConfig> run_ideal(const std::vector<teleop::TendonFrame>& frames, double x) {
  teleop::SessionConfig cfg;
  cfg.scale = twin::ScaleMapping::uniform(x);
  cfg.tracking = twin::TrackingParams::ideal();
  cfg.executor_layout = harness::executor_geometry(ArmGeometry::demonstrator(), cfg.scale).layout;
  teleop::VectorFrameSource src(frames);
  teleop::RecordingSink sink;
  teleop::run_session(src, sink, cfg);
  std::vector<ArmConfig> out;
  for (const auto& u : sink.updates) out.push_back(u.config);
  return out;
}

Outcome mapping_scaling() {
  Outcome o;
  const ArmGeometry demo = ArmGeometry::demonstrator();
  const auto frames = demo_frames(demo.layout);
  const auto one = run_ideal(frames, 1.0);
  const auto big = run_ideal(frames, kX);
  o.require(one.size() == frames.size() && big.size() == frames.size(), "frames lost");
  double worst = 0.0;
  for (std::size_t k = 0; k < std::min(one.size(), big.size()); ++k) {
    const ArmConfig sensed = arm::config_from_tendons(frames[k].displacement_vector(), demo.layout).config;
    for (std::size_t i = 0; i < 3; ++i) {
      worst = std::max({worst, std::abs(one[k].sections[i].bend - big[k].sections[i].bend),
                        wrapped(one[k].sections[i].azimuth - big[k].sections[i].azimuth),
                        std::abs(one[k].sections[i].bend - sensed.sections[i].bend),
                        wrapped(one[k].sections[i].azimuth - sensed.sections[i].azimuth)});
    }
  }
  o.require(worst < 1e-9, "trajectory mismatch " + fmt("%.3g", worst));

  const auto a = arm::workspace_extents(demo, 100000);
  const auto b = arm::workspace_extents(harness::executor_geometry(demo, twin::ScaleMapping::uniform(kX)), 100000);
  const double exact = std::max(std::abs(b.width / a.width - kX), std::abs(b.height / a.height - kX));
  o.require(exact < 1e-12, "extent scaling off by " + fmt("%.3g", exact));
  const double ratio = b.width / a.width;
  const double rel = std::abs(ratio - 142.0 / 88.0) / (142.0 / 88.0);
  o.require(rel < 0.03, "width ratio " + fmt("%.4f", ratio));
  if (o.pass) {
    o.detail = "(theta, phi) match " + fmt("%.1e", worst) + ", extents x" + fmt("%.4f", ratio) + " vs 142/88 (" +
               fmt("%.2f", 100 * rel) + "%)";
  }
  return o;
}

Outcome deviation_fixture() {
  Outcome o;
  twin::TipSeries demo, exec;
  for (int k = 0; k <= 1000; ++k) {
    const double t = 0.01 * k;
    const Vec3 p(0.1 * std::sin(0.5 * t), 0.05 * std::cos(t), 0.02 * t);
    demo.push_back({t, p});
  }
  // Stretch x to exactly 0.2 m of range.
  double lo = 1e9, hi = -1e9;
  for (const auto& s : demo) {
    lo = std::min(lo, s.position.x());
    hi = std::max(hi, s.position.x());
  }
  for (auto& s : demo) s.position.x() = (s.position.x() - lo) * 0.2 / (hi - lo);
  for (const auto& s : demo) exec.push_back({s.t, s.position + Vec3(0.01, 0, 0)});
  const auto m = twin::deviation_metrics(demo, exec);
  const auto z = twin::deviation_metrics(demo, demo);
  o.require(std::abs(m.value[0] - 5.0) < 1e-9 && harness::format_deviation(m.value[0]) == "5.00",
            "offset reports " + fmt("%.6f", m.value[0]));
  o.require(z.value[0] == 0.0 && z.value[1] == 0.0 && z.value[2] == 0.0, "identical not zero");
  if (o.pass) o.detail = "offset " + harness::format_deviation(m.value[0]) + "%, identical 0%";
  return o;
}

Outcome plausibility_band() {
  Outcome o;
  const harness::ExperimentConfig cfg;
  const auto a = harness::run_trajectory_experiment(cfg, harness::Shape::Circle, 60.0);
  const auto b = harness::run_trajectory_experiment(cfg, harness::Shape::Circle, 60.0);
  for (int k = 0; k < 3; ++k) {
    const double v = a.metrics.value[k];
    o.require(!a.metrics.absolute[k] && v > 0.0 && v <= 20.0, std::string(1, "xyz"[k]) + " = " + fmt("%.3f", v));
    o.require(std::bit_cast<std::uint64_t>(v) == std::bit_cast<std::uint64_t>(b.metrics.value[k]), "rerun differs");
  }
  o.require(a.frames == b.frames, "frame stream differs on rerun");
  if (o.pass) {
    o.detail = "circle x " + harness::format_deviation(a.metrics.value[0]) + "%, y " +
               harness::format_deviation(a.metrics.value[1]) + "%, z " + harness::format_deviation(a.metrics.value[2]) +
               "%, seed " + std::to_string(cfg.seed) + " reproducible";
  }
  return o;
}

Outcome protocol() {
  Outcome o;
  std::mt19937_64 rng(99);
  int mismatches = 0;
  teleop::TendonFrame sample;
  for (int n = 0; n < 100000; ++n) {
    teleop::TendonFrame f;
    f.sequence = static_cast<std::uint32_t>(rng());
    f.timestamp_us = rng();
    for (auto& v : f.displacement) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    for (auto& v : f.current) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    const auto bytes = teleop::encode_frame(f);
    const auto r = teleop::decode_frame(bytes);
    if (!std::holds_alternative<teleop::TendonFrame>(r) || teleop::encode_frame(std::get<teleop::TendonFrame>(r)) != bytes) {
      ++mismatches;
    }
    sample = f;
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " round-trip mismatches");

  const auto good = teleop::encode_frame(sample);
  int missed = 0;
  for (std::size_t bit = 0; bit < good.size() * 8; ++bit) {
    auto bad = good;
    bad[bit / 8] ^= static_cast<std::uint8_t>(1U << (bit % 8));
    missed += std::holds_alternative<teleop::TendonFrame>(teleop::decode_frame(bad));
  }
  o.require(missed == 0, std::to_string(missed) + " bit flips undetected");

  std::vector<teleop::TendonFrame> fast;
  for (std::uint32_t k = 0; k <= 10000; ++k) fast.push_back({k, 1000ULL * k, {}, {}});
  teleop::VectorFrameSource src(fast);
  teleop::RecordingSink sink;
  teleop::SessionConfig cfg;
  cfg.rate_hz = 100.0;
  const auto st = teleop::run_session(src, sink, cfg);
  const double drop = static_cast<double>(st.frames_dropped) / static_cast<double>(st.frames_received);
  o.require(std::abs(drop - 0.9) < 0.01, "drop ratio " + fmt("%.4f", drop));
  o.require(st.order_violations == 0, "reordering");
  o.require(st.stalls == 0, "stalls");
  if (o.pass) {
    o.detail = "1e5 frames bit-exact, " + std::to_string(good.size() * 8) + " flips caught, 1000->100 Hz drops " +
               fmt("%.1f", 100 * drop) + "%, 0 reordered";
  }
  return o;
}

Outcome gap_scenario() {
  Outcome o;
  const harness::ExperimentConfig cfg;
  const auto g = harness::run_gap_scenario(cfg);
  const char* profiles[] = {"LLL", "LHH", "HLL", "LLL"};
  const double durations[] = {15, 2, 10, 5};
  o.require(g.log.size() == 4, "log has " + std::to_string(g.log.size()) + " phases");
  std::string seq;
  for (std::size_t p = 0; p < g.log.size() && p < 4; ++p) {
    seq += (p ? "->" : "") + g.log[p].profile;
    o.require(g.log[p].profile == profiles[p], "phase " + std::to_string(p) + " profile " + g.log[p].profile);
    const double d = g.log[p].end - g.log[p].start;
    o.require(std::abs(d - durations[p]) <= 1.0 / cfg.session.rate_hz + 1e-9, "phase " + std::to_string(p) + " lasted " + fmt("%.3f", d));
  }
  o.require(std::abs(g.duration - 32.0) < 1e-9, "total " + fmt("%.3f", g.duration));
  if (o.pass) o.detail = seq + ", 15/2/10/5 s";
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;  // 0: no runtime limit of its own
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"kinematics suite", 5.0, kinematics},
      {"statics oracle", 60.0, statics_oracle},
      {"friction and hold suite", 30.0, friction_hold},
      {"stiffness orderings", 0.0, stiffness_orderings},
      {"mapping and scaling", 0.0, mapping_scaling},
      {"deviation metric fixture", 0.0, deviation_fixture},
      {"plausibility band", 0.0, plausibility_band},
      {"protocol", 30.0, protocol},
      {"gap scenario", 0.0, gap_scenario},
  };
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " (over " + fmt("%.0f", c.budget_s) + " s budget)";
    }
    failed += !o.pass;
    std::printf("%s  %-26s %s  [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = total < 180.0;
  std::printf("%s  %-26s %.1f s\n", in_time ? "PASS" : "FAIL", "total runtime", total);
  return failed == 0 && in_time ? 0 : 1;
}
