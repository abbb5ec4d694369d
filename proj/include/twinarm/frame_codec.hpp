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

// Tendon frame wire format (all multi-byte fields little-endian):
//
//   offset  size  field
//        0     2  magic 0x54 0x46 ("TF")
//        2     1  version 0x01
//        3     1  reserved, 0x00
//        4     4  sequence number, u32
//        8     8  timestamp, u64 microseconds since session start
//       16    36  9 x f32 tendon displacements (m)
//       52    36  9 x f32 motor currents (A)
//       88     2  reserved, 0x0000
//       90     4  CRC-32 (reflected, poly 0xEDB88320) over bytes 0..89

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>

#include "twinarm/arm_model.hpp"

namespace twinarm::teleop {

inline constexpr std::uint8_t kMagic0 = 0x54;
inline constexpr std::uint8_t kMagic1 = 0x46;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kFrameSize = 94;
inline constexpr std::size_t kCrcOffset = 90;

struct TendonFrame {
  std::uint32_t sequence = 0;
  std::uint64_t timestamp_us = 0;
  std::array<float, arm::kTendons> displacement{};  // m
  std::array<float, arm::kTendons> current{};       // A

  friend bool operator==(const TendonFrame&, const TendonFrame&) = default;

  arm::TendonVector displacement_vector() const;
  arm::CurrentVector current_vector() const;
  static TendonFrame from_state(std::uint32_t sequence, std::uint64_t timestamp_us,
                                const arm::TendonVector& displacement, const arm::CurrentVector& current);
};

enum class DecodeError { Truncated, BadMagic, UnsupportedVersion, CrcMismatch };

std::string_view to_string(DecodeError e);

using EncodedFrame = std::array<std::uint8_t, kFrameSize>;
using DecodeResult = std::variant<TendonFrame, DecodeError>;

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

EncodedFrame encode_frame(const TendonFrame& frame);

/// Decodes the first kFrameSize bytes. The CRC is checked before the magic
/// and version fields, so any corruption of a valid frame reports
/// CrcMismatch.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

}  // namespace twinarm::teleop
