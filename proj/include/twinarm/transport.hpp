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

// Arm-to-arm stream transport: each encoded frame travels over TCP behind a
// u16 little-endian length prefix.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "twinarm/frame_codec.hpp"
#include "twinarm/session.hpp"

namespace twinarm::teleop {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7600;

  /// "host:port"; throws std::invalid_argument when malformed.
  static Endpoint parse(const std::string& text);
  std::string to_string() const;
};

/// Connects on construction; every failure raises TransportError.
class TcpFrameSender {
 public:
  explicit TcpFrameSender(const Endpoint& to);
  ~TcpFrameSender();
  TcpFrameSender(const TcpFrameSender&) = delete;
  TcpFrameSender& operator=(const TcpFrameSender&) = delete;

  void send(const TendonFrame& frame);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Listens on construction and accepts a single peer on the first next().
/// Returns nullopt when the peer closes cleanly between frames; truncated,
/// corrupt or oversized messages raise TransportError.
class TcpFrameSource : public FrameSource {
 public:
  explicit TcpFrameSource(const Endpoint& listen_on);
  ~TcpFrameSource() override;
  TcpFrameSource(const TcpFrameSource&) = delete;
  TcpFrameSource& operator=(const TcpFrameSource&) = delete;

  /// Bound port (useful when listening on port 0).
  std::uint16_t port() const;
  std::optional<TendonFrame> next() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace twinarm::teleop
