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

#include "twinarm/trace.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace twinarm::teleop {

namespace {

constexpr std::size_t kColumns = 2 + 2 * arm::kTendons;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_int(std::string_view s, std::size_t line, const char* field) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw TraceError(line, std::string("invalid ") + field + " '" + std::string(s) + "'");
  }
  return v;
}

// from_chars for floating point is unavailable in this toolchain's libstdc++
// for float on all targets, so go through strtof on a bounded copy.
float parse_float(std::string_view s, std::size_t line) {
  const std::string copy(s);
  char* end = nullptr;
  const float v = std::strtof(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    throw TraceError(line, "invalid number '" + copy + "'");
  }
  return v;
}

}  // namespace

TraceError::TraceError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

std::string trace_header() {
  std::string h = "seq,t_us";
  for (std::size_t n = 1; n <= arm::kTendons; ++n) h += ",dl_" + std::to_string(n);
  for (std::size_t n = 1; n <= arm::kTendons; ++n) h += ",i_" + std::to_string(n);
  return h;
}

void write_trace(std::ostream& out, const std::vector<TendonFrame>& frames) {
  out << trace_header() << '\n';
  char buf[64];
  for (const TendonFrame& f : frames) {
    std::snprintf(buf, sizeof buf, "%" PRIu32 ",%" PRIu64, f.sequence, f.timestamp_us);
    out << buf;
    for (float v : f.displacement) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(v));
      out << buf;
    }
    for (float v : f.current) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
}

void record_trace(const std::filesystem::path& path, const std::vector<TendonFrame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace for writing: " + path.string());
  write_trace(out, frames);
  if (!out) throw std::runtime_error("failed writing trace: " + path.string());
}

std::vector<TendonFrame> read_trace(std::istream& in) {
  std::vector<TendonFrame> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != trace_header()) throw TraceError(1, "unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto cols = split(line);
    if (cols.size() != kColumns) {
      throw TraceError(lineno, "expected " + std::to_string(kColumns) + " columns, got " + std::to_string(cols.size()));
    }
    TendonFrame f;
    f.sequence = parse_int<std::uint32_t>(cols[0], lineno, "sequence");
    f.timestamp_us = parse_int<std::uint64_t>(cols[1], lineno, "timestamp");
    for (std::size_t n = 0; n < arm::kTendons; ++n) {
      f.displacement[n] = parse_float(cols[2 + n], lineno);
      f.current[n] = parse_float(cols[2 + arm::kTendons + n], lineno);
    }
    frames.push_back(f);
  }
  return frames;
}

TraceSource::TraceSource(const std::filesystem::path& path) : inner_({}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace: " + path.string());
  auto frames = read_trace(in);
  count_ = frames.size();
  inner_ = VectorFrameSource(std::move(frames));
}

TraceSource replay_trace(const std::filesystem::path& path) { return TraceSource(path); }

}  // namespace twinarm::teleop
