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

#include "twinarm/frame_codec.hpp"

#include <bit>

namespace twinarm::teleop {

namespace {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t n = 0; n < 256; ++n) {
    std::uint32_t c = n;
    for (int k = 0; k < 8; ++k) c = (c & 1U) ? 0xEDB88320U ^ (c >> 1) : c >> 1;
    table[n] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

arm::TendonVector TendonFrame::displacement_vector() const {
  arm::TendonVector v;
  for (std::size_t n = 0; n < arm::kTendons; ++n) v[n] = displacement[n];
  return v;
}

arm::CurrentVector TendonFrame::current_vector() const {
  arm::CurrentVector v;
  for (std::size_t n = 0; n < arm::kTendons; ++n) v[n] = current[n];
  return v;
}

TendonFrame TendonFrame::from_state(std::uint32_t sequence, std::uint64_t timestamp_us,
                                    const arm::TendonVector& displacement, const arm::CurrentVector& current) {
  TendonFrame f;
  f.sequence = sequence;
  f.timestamp_us = timestamp_us;
  for (std::size_t n = 0; n < arm::kTendons; ++n) {
    f.displacement[n] = static_cast<float>(displacement[n]);
    f.current[n] = static_cast<float>(current[n]);
  }
  return f;
}

std::string_view to_string(DecodeError e) {
  switch (e) {
    case DecodeError::Truncated:
      return "truncated frame";
    case DecodeError::BadMagic:
      return "bad magic";
    case DecodeError::UnsupportedVersion:
      return "unsupported version";
    case DecodeError::CrcMismatch:
      return "CRC mismatch";
  }
  return "unknown";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  std::uint32_t c = 0xFFFFFFFFU;
  for (std::uint8_t b : bytes) c = kCrcTable[(c ^ b) & 0xFFU] ^ (c >> 8);
  return c ^ 0xFFFFFFFFU;
}

EncodedFrame encode_frame(const TendonFrame& frame) {
  EncodedFrame out{};
  out[0] = kMagic0;
  out[1] = kMagic1;
  out[2] = kVersion;
  out[3] = 0x00;
  put_u32(&out[4], frame.sequence);
  put_u64(&out[8], frame.timestamp_us);
  for (std::size_t n = 0; n < arm::kTendons; ++n) {
    put_u32(&out[16 + 4 * n], std::bit_cast<std::uint32_t>(frame.displacement[n]));
    put_u32(&out[52 + 4 * n], std::bit_cast<std::uint32_t>(frame.current[n]));
  }
  // bytes 88..89 stay zero
  put_u32(&out[kCrcOffset], crc32(std::span(out.data(), kCrcOffset)));
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameSize) return DecodeError::Truncated;
  const std::uint8_t* p = bytes.data();
  if (crc32(bytes.first(kCrcOffset)) != get_u32(p + kCrcOffset)) return DecodeError::CrcMismatch;
  if (p[0] != kMagic0 || p[1] != kMagic1) return DecodeError::BadMagic;
  if (p[2] != kVersion) return DecodeError::UnsupportedVersion;

  TendonFrame f;
  f.sequence = get_u32(p + 4);
  f.timestamp_us = get_u64(p + 8);
  for (std::size_t n = 0; n < arm::kTendons; ++n) {
    f.displacement[n] = std::bit_cast<float>(get_u32(p + 16 + 4 * n));
    f.current[n] = std::bit_cast<float>(get_u32(p + 52 + 4 * n));
  }
  return f;
}

}  // namespace twinarm::teleop
