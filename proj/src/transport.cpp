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

#include "twinarm/transport.hpp"

#include <array>
#include <boost/asio.hpp>
#include <charconv>

namespace twinarm::teleop {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

constexpr std::size_t kMaxMessage = 1024;

[[noreturn]] void fail(const std::string& what, const boost::system::error_code& ec) {
  throw TransportError(what + ": " + ec.message());
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("endpoint must be host:port, got '" + text + "'");
  }
  unsigned port = 0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || port > 65535) {
    throw std::invalid_argument("invalid port in endpoint '" + text + "'");
  }
  return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

struct TcpFrameSender::Impl {
  asio::io_context io;
  tcp::socket socket{io};
};

TcpFrameSender::TcpFrameSender(const Endpoint& to) : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  tcp::resolver resolver(impl_->io);
  const auto results = resolver.resolve(to.host, std::to_string(to.port), ec);
  if (ec) fail("cannot resolve " + to.to_string(), ec);
  asio::connect(impl_->socket, results, ec);
  if (ec) fail("cannot connect to " + to.to_string(), ec);
  impl_->socket.set_option(tcp::no_delay(true), ec);
}

TcpFrameSender::~TcpFrameSender() = default;

void TcpFrameSender::send(const TendonFrame& frame) {
  std::array<std::uint8_t, 2 + kFrameSize> msg{};
  msg[0] = static_cast<std::uint8_t>(kFrameSize & 0xFF);
  msg[1] = static_cast<std::uint8_t>(kFrameSize >> 8);
  const EncodedFrame enc = encode_frame(frame);
  std::copy(enc.begin(), enc.end(), msg.begin() + 2);
  boost::system::error_code ec;
  asio::write(impl_->socket, asio::buffer(msg), ec);
  if (ec) fail("send failed", ec);
}

void TcpFrameSender::close() {
  boost::system::error_code ec;
  impl_->socket.shutdown(tcp::socket::shutdown_both, ec);
  impl_->socket.close(ec);
}

struct TcpFrameSource::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  tcp::socket socket{io};
  bool connected = false;
};

TcpFrameSource::TcpFrameSource(const Endpoint& listen_on) : impl_(std::make_unique<Impl>()) {
  boost::system::error_code ec;
  const auto address = asio::ip::make_address(listen_on.host, ec);
  if (ec) fail("invalid listen address " + listen_on.host, ec);
  const tcp::endpoint ep(address, listen_on.port);
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(1, ec);
  if (ec) fail("cannot listen on " + listen_on.to_string(), ec);
}

TcpFrameSource::~TcpFrameSource() = default;

std::uint16_t TcpFrameSource::port() const { return impl_->acceptor.local_endpoint().port(); }

std::optional<TendonFrame> TcpFrameSource::next() {
  boost::system::error_code ec;
  if (!impl_->connected) {
    impl_->acceptor.accept(impl_->socket, ec);
    if (ec) fail("accept failed", ec);
    impl_->connected = true;
  }
  std::array<std::uint8_t, 2> header{};
  asio::read(impl_->socket, asio::buffer(header), ec);
  if (ec == asio::error::eof) return std::nullopt;
  if (ec) fail("receive failed", ec);
  const std::size_t length = header[0] | (static_cast<std::size_t>(header[1]) << 8);
  if (length > kMaxMessage) throw TransportError("oversized message (" + std::to_string(length) + " bytes)");
  std::vector<std::uint8_t> payload(length);
  asio::read(impl_->socket, asio::buffer(payload), ec);
  if (ec) fail("stream ended inside a message", ec);
  const DecodeResult r = decode_frame(payload);
  if (const auto* err = std::get_if<DecodeError>(&r)) throw TransportError("bad frame: " + std::string(to_string(*err)));
  return std::get<TendonFrame>(r);
}

}  // namespace twinarm::teleop
