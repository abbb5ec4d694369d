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

#include "twinarm/config_file.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <vector>

namespace twinarm::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Value {
 public:
  Value(std::string text, std::size_t line) : text_(std::move(text)), line_(line) {}

  std::vector<double> numbers(std::size_t count) const {
    std::vector<double> out;
    std::size_t start = 0;
    for (;;) {
      const auto comma = text_.find(',', start);
      const std::string item = trim(text_.substr(start, comma == std::string::npos ? comma : comma - start));
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      if (item.empty() || end != item.c_str() + item.size()) throw ConfigError(line_, "not a number: '" + item + "'");
      out.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (out.size() != count) {
      throw ConfigError(line_, "expected " + std::to_string(count) + " value(s), got " + std::to_string(out.size()));
    }
    return out;
  }

  double number() const { return numbers(1)[0]; }

  template <std::size_t N>
  std::array<double, N> array() const {
    const auto v = numbers(N);
    std::array<double, N> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
  }

  arm::Vec3 vec3() const {
    const auto v = numbers(3);
    return {v[0], v[1], v[2]};
  }

  std::uint64_t unsigned_integer() const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text_.data(), text_.data() + text_.size(), v);
    if (ec != std::errc{} || ptr != text_.data() + text_.size()) {
      throw ConfigError(line_, "not an unsigned integer: '" + text_ + "'");
    }
    return v;
  }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::size_t line_;
};

using Setter = std::function<void(harness::ExperimentConfig&, const Value&)>;

const std::map<std::string, Setter>& setters() {
  using C = harness::ExperimentConfig;
  using V = Value;
  static const std::map<std::string, Setter> table = {
      {"demo.length", [](C& c, const V& v) { c.demo.geometry.length = v.array<3>(); }},
      {"demo.mass", [](C& c, const V& v) { c.demo.geometry.mass = v.array<3>(); }},
      {"demo.bend_stiffness", [](C& c, const V& v) { c.demo.geometry.bend_stiffness = v.array<3>(); }},
      {"demo.tip_mass", [](C& c, const V& v) { c.demo.geometry.tip_mass = v.number(); }},
      {"demo.pitch_radius", [](C& c, const V& v) { c.demo.geometry.layout.pitch_radius = v.array<3>(); }},
      {"demo.azimuth_deg",
       [](C& c, const V& v) {
         const auto a = v.array<9>();
         for (std::size_t n = 0; n < 9; ++n) c.demo.geometry.layout.azimuth[n / 3][n % 3] = arm::deg2rad(a[n]);
       }},
      {"demo.gravity", [](C& c, const V& v) { c.demo.geometry.gravity = v.vec3(); }},
      {"demo.max_bend_deg", [](C& c, const V& v) { c.demo.geometry.max_bend = arm::deg2rad(v.number()); }},
      {"friction.mu_s", [](C& c, const V& v) { c.demo.friction.mu_s = v.number(); }},
      {"friction.mu_k", [](C& c, const V& v) { c.demo.friction.mu_k = v.number(); }},
      {"friction.alpha", [](C& c, const V& v) { c.demo.friction.alpha = v.number(); }},
      {"friction.beta", [](C& c, const V& v) { c.demo.friction.beta = v.number(); }},
      {"friction.k_act", [](C& c, const V& v) { c.demo.friction.k_act = v.number(); }},
      {"friction.c_act", [](C& c, const V& v) { c.demo.friction.c_act = v.number(); }},
      {"friction.k_kf", [](C& c, const V& v) { c.demo.friction.k_kf = v.number(); }},
      {"friction.c_kf", [](C& c, const V& v) { c.demo.friction.c_kf = v.number(); }},
      {"backdrive.mobility", [](C& c, const V& v) { c.demo.backdrive.mobility = v.number(); }},
      {"backdrive.max_substep", [](C& c, const V& v) { c.demo.backdrive.max_substep = v.number(); }},
      {"executor.scale", [](C& c, const V& v) { c.session.scale = twin::ScaleMapping::uniform(v.number()); }},
      {"executor.section_scale", [](C& c, const V& v) { c.session.scale.section_factor = v.array<3>(); }},
      {"stiffness.profile", [](C& c, const V& v) { c.session.profile = c.session.profile.with_levels(v.text()); }},
      {"stiffness.current_low", [](C& c, const V& v) { c.session.profile.current_low = v.number(); }},
      {"stiffness.current_high", [](C& c, const V& v) { c.session.profile.current_high = v.number(); }},
      {"stiffness.k_low", [](C& c, const V& v) { c.session.profile.stiffness_low = v.number(); }},
      {"stiffness.k_high", [](C& c, const V& v) { c.session.profile.stiffness_high = v.number(); }},
      {"tracking.deadband", [](C& c, const V& v) { c.session.tracking.deadband = v.number(); }},
      {"tracking.rate_limit", [](C& c, const V& v) { c.session.tracking.rate_limit = v.number(); }},
      {"tracking.time_constant", [](C& c, const V& v) { c.session.tracking.time_constant = v.number(); }},
      {"session.rate_hz", [](C& c, const V& v) { c.session.rate_hz = v.number(); }},
      {"session.endpoint", [](C& c, const V& v) { c.session.endpoint = v.text(); }},
      {"load.shape", [](C& c, const V& v) { c.load.shape = harness::parse_shape(v.text()); }},
      {"load.plane", [](C& c, const V& v) { c.load.plane = harness::parse_plane(v.text()); }},
      {"load.amplitude", [](C& c, const V& v) { c.load.amplitude = v.number(); }},
      {"load.period", [](C& c, const V& v) { c.load.period = v.number(); }},
      {"load.arc_length", [](C& c, const V& v) { c.load.arc_length = v.number(); }},
      {"load.jitter", [](C& c, const V& v) { c.load_jitter = v.number(); }},
      {"load.bias", [](C& c, const V& v) { c.load_bias = v.vec3(); }},
      {"gap.durations", [](C& c, const V& v) { c.gap_durations = v.array<4>(); }},
      {"seed", [](C& c, const V& v) { c.seed = v.unsigned_integer(); }},
  };
  return table;
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& what)
    : std::invalid_argument(line > 0 ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
      line_(line) {}

void apply_config(std::istream& in, harness::ExperimentConfig& cfg) {
  const double old_length = cfg.demo.geometry.total_length();
  const bool load_at_tip = cfg.load.arc_length == old_length;
  bool arc_length_set = false;

  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(lineno, "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(lineno, "missing value for '" + key + "'");
    try {
      it->second(cfg, Value(value, lineno));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(lineno, e.what());
    }
    if (key == "load.arc_length") arc_length_set = true;
  }

  // A tip load follows the tip when lengths change.
  if (load_at_tip && !arc_length_set) cfg.load.arc_length = cfg.demo.geometry.total_length();
  cfg.session.executor_layout = cfg.executor().layout;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
}

harness::ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open " + path.string());
  harness::ExperimentConfig cfg;
  apply_config(in, cfg);
  return cfg;
}

}  // namespace twinarm::config
