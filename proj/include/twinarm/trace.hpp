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

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinarm/frame_codec.hpp"
#include "twinarm/session.hpp"

namespace twinarm::teleop {

/// Malformed trace input; line() is 1-based.
class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// `seq,t_us,dl_1,...,dl_9,i_1,...,i_9`
std::string trace_header();

void write_trace(std::ostream& out, const std::vector<TendonFrame>& frames);
void record_trace(const std::filesystem::path& path, const std::vector<TendonFrame>& frames);

/// Parses a whole trace. An empty stream or a header-only stream yields no
/// frames.
std::vector<TendonFrame> read_trace(std::istream& in);

/// Frame producer over a trace file. The file is parsed eagerly so that
/// malformed input is reported before any frame is produced.
class TraceSource : public FrameSource {
 public:
  explicit TraceSource(const std::filesystem::path& path);
  std::optional<TendonFrame> next() override { return inner_.next(); }
  std::size_t size() const { return count_; }

 private:
  std::size_t count_ = 0;
  VectorFrameSource inner_;
};

TraceSource replay_trace(const std::filesystem::path& path);

}  // namespace twinarm::teleop
