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

#include "twinarm/console.hpp"

#include <atomic>
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <cmath>
#include <deque>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "twinarm/session.hpp"
#include "twinarm/twin_control.hpp"

namespace twinarm::console {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using asio::ip::tcp;
using nlohmann::json;

namespace {

constexpr std::size_t kMaxQueued = 64;

double finite_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw MessageError(std::string("missing numeric field '") + key + "'");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw MessageError(std::string("field '") + key + "' must be finite");
  return v;
}

json angles(const arm::ArmConfig& c) {
  json theta = json::array();
  json phi = json::array();
  for (const auto& s : c.sections) {
    theta.push_back(s.bend);
    phi.push_back(s.azimuth);
  }
  return {{"theta", theta}, {"phi", phi}};
}

}  // namespace

Command parse_command(std::string_view text, double arm_length) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MessageError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) throw MessageError("message needs a string 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "load") {
    LoadCommand c;
    c.load.arc_length = finite_number(j, "s");
    if (c.load.arc_length < 0.0 || c.load.arc_length > arm_length) {
      throw MessageError("load position s must be within [0, " + std::to_string(arm_length) + "] m");
    }
    c.load.force = arm::Vec3(finite_number(j, "fx"), finite_number(j, "fy"), finite_number(j, "fz"));
    return c;
  }
  if (type == "profile") {
    if (!j.contains("name") || !j["name"].is_string()) throw MessageError("profile message needs a string 'name'");
    const std::string name = j["name"].get<std::string>();
    try {
      twin::StiffnessProfile::parse(name);
    } catch (const std::invalid_argument& e) {
      throw MessageError(e.what());
    }
    return ProfileCommand{name};
  }
  if (type == "scale") {
    const double x = finite_number(j, "x");
    if (x <= 0.0) throw MessageError("scale x must be positive");
    return ScaleCommand{x};
  }
  throw MessageError("unknown message type '" + type + "'");
}

std::string state_message(const StateSnapshot& s) {
  const json j = {{"type", "state"},
                  {"seq", s.sequence},
                  {"t_us", s.t_us},
                  {"demo", angles(s.demo)},
                  {"exec", angles(s.exec)},
                  {"deviation", {{"x", s.deviation.x()}, {"y", s.deviation.y()}, {"z", s.deviation.z()}}},
                  {"profile", s.profile},
                  {"scale", s.scale},
                  {"held", s.held}};
  return j.dump();
}

std::string error_message(std::string_view what) {
  return json{{"type", "error"}, {"message", std::string(what)}}.dump();
}

namespace {

class WsSession;

}  // namespace

struct ConsoleServer::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::thread thread;
  double arm_length = 0.0;
  std::set<std::shared_ptr<WsSession>> sessions;  // I/O thread only
  std::atomic<std::size_t> client_count{0};
  std::mutex command_mutex;
  std::vector<Command> commands;

  void do_accept();
  void handle(const std::string& text, const std::shared_ptr<WsSession>& from);
  void add(const std::shared_ptr<WsSession>& s) {
    sessions.insert(s);
    client_count = sessions.size();
  }
  void remove(const std::shared_ptr<WsSession>& s) {
    sessions.erase(s);
    client_count = sessions.size();
  }
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, ConsoleServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  // Called on the I/O thread.
  void send(std::string text) {
    queue_.push_back(std::move(text));
    // Slow client: drop the oldest queued (not in-flight) message.
    if (queue_.size() > kMaxQueued) queue_.erase(queue_.begin() + 1);
    if (queue_.size() == 1) do_write();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    server_.add(shared_from_this());
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      server_.remove(shared_from_this());
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    server_.handle(text, shared_from_this());
    do_read();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      server_.remove(shared_from_this());
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  ConsoleServer::Impl& server_;
};

}  // namespace

void ConsoleServer::Impl::do_accept() {
  acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<WsSession>(std::move(socket), *this)->start();
    do_accept();
  });
}

void ConsoleServer::Impl::handle(const std::string& text, const std::shared_ptr<WsSession>& from) {
  try {
    Command c = parse_command(text, arm_length);
    std::lock_guard lock(command_mutex);
    commands.push_back(std::move(c));
  } catch (const MessageError& e) {
    from->send(error_message(e.what()));
  }
}

ConsoleServer::ConsoleServer(const teleop::Endpoint& listen_on, double arm_length) : impl_(std::make_unique<Impl>()) {
  impl_->arm_length = arm_length;
  beast::error_code ec;
  const auto address = asio::ip::make_address(listen_on.host, ec);
  if (ec) throw teleop::TransportError("invalid console address " + listen_on.host + ": " + ec.message());
  const tcp::endpoint ep(address, listen_on.port);
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw teleop::TransportError("cannot listen on " + listen_on.to_string() + ": " + ec.message());
  impl_->do_accept();
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

ConsoleServer::~ConsoleServer() {
  impl_->io.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->sessions.clear();
}

std::uint16_t ConsoleServer::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t ConsoleServer::clients() const { return impl_->client_count; }

void ConsoleServer::broadcast(std::string text) {
  asio::post(impl_->io, [impl = impl_.get(), text = std::move(text)] {
    for (const auto& s : impl->sessions) s->send(text);
  });
}

std::vector<Command> ConsoleServer::drain() {
  std::lock_guard lock(impl_->command_mutex);
  std::vector<Command> out;
  out.swap(impl_->commands);
  return out;
}

}  // namespace twinarm::console
