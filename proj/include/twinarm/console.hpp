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

// Operator console feed: JSON text messages over WebSocket.
//
// Outbound, once per applied frame:
//   {"type":"state","seq":n,"t_us":n,
//    "demo":{"theta":[3],"phi":[3]},"exec":{"theta":[3],"phi":[3]},
//    "deviation":{"x":m,"y":m,"z":m},"profile":"LLL","scale":X,"held":bool}
// deviation is the executor tip divided by X minus the demonstrator tip.
// held reports whether the demonstrator would keep its posture if the
// operator let go.
//
// Inbound:
//   {"type":"load","s":m,"fx":N,"fy":N,"fz":N}
//   {"type":"profile","name":"LHH"}
//   {"type":"scale","x":X}
// Anything else is answered with {"type":"error","message":"..."}.

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "twinarm/arm_model.hpp"
#include "twinarm/statics.hpp"
#include "twinarm/transport.hpp"

namespace twinarm::console {

struct LoadCommand {
  statics::ExternalLoad load;
};
struct ProfileCommand {
  std::string name;
};
struct ScaleCommand {
  double x = 1.0;
};
using Command = std::variant<LoadCommand, ProfileCommand, ScaleCommand>;

class MessageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses and validates one inbound message for an arm of the given length.
Command parse_command(std::string_view text, double arm_length);

struct StateSnapshot {
  std::uint32_t sequence = 0;
  std::uint64_t t_us = 0;
  arm::ArmConfig demo;
  arm::ArmConfig exec;
  arm::Vec3 deviation = arm::Vec3::Zero();
  std::string profile = "LLL";
  double scale = 1.0;
  bool held = false;
};

std::string state_message(const StateSnapshot& s);
std::string error_message(std::string_view what);

/// WebSocket server on its own I/O thread. Inbound commands are queued for
/// drain(); malformed ones are answered with an error message.
class ConsoleServer {
 public:
  ConsoleServer(const teleop::Endpoint& listen_on, double arm_length);
  ~ConsoleServer();
  ConsoleServer(const ConsoleServer&) = delete;
  ConsoleServer& operator=(const ConsoleServer&) = delete;

  std::uint16_t port() const;
  std::size_t clients() const;
  void broadcast(std::string text);
  std::vector<Command> drain();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace twinarm::console
