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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinarm/arm_model.hpp"
#include "twinarm/frame_codec.hpp"
#include "twinarm/twin_control.hpp"

namespace twinarm::teleop {

/// Raised by sources and sinks when the underlying transport fails.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  /// Next frame, or nullopt once the source is exhausted. May block.
  virtual std::optional<TendonFrame> next() = 0;
};

class VectorFrameSource : public FrameSource {
 public:
  explicit VectorFrameSource(std::vector<TendonFrame> frames) : frames_(std::move(frames)) {}
  std::optional<TendonFrame> next() override;

 private:
  std::vector<TendonFrame> frames_;
  std::size_t pos_ = 0;
};

/// Pulls frames from a callable until it returns nullopt.
class GeneratorFrameSource : public FrameSource {
 public:
  explicit GeneratorFrameSource(std::function<std::optional<TendonFrame>()> gen) : gen_(std::move(gen)) {}
  std::optional<TendonFrame> next() override { return gen_(); }

 private:
  std::function<std::optional<TendonFrame>()> gen_;
};

struct ExecutorUpdate {
  TendonFrame frame;
  arm::TendonVector commanded;  // after scaling
  arm::TendonVector executed;   // after the tracking servo
  arm::ArmConfig config;        // executor configuration
  std::uint64_t applied_at_us = 0;
};

class ExecutorSink {
 public:
  virtual ~ExecutorSink() = default;
  virtual void apply(const ExecutorUpdate& update) = 0;
};

class RecordingSink : public ExecutorSink {
 public:
  void apply(const ExecutorUpdate& update) override { updates.push_back(update); }
  std::vector<ExecutorUpdate> updates;
};

struct SessionConfig {
  double rate_hz = 100.0;
  twin::ScaleMapping scale;
  twin::StiffnessProfile profile;
  twin::TrackingParams tracking;
  /// Executor tendon layout used to read back its configuration.
  arm::TendonLayout executor_layout = arm::ArmGeometry::demonstrator().layout;
  std::string endpoint = "127.0.0.1:7600";

  void validate() const;
  std::uint64_t period_us() const;
};

/// Bounded FIFO that drops its oldest frame when full. Thread-safe.
class FrameQueue {
 public:
  explicit FrameQueue(std::size_t capacity = 4);

  /// Returns true when an older frame was dropped to make room.
  bool push(const TendonFrame& frame);
  std::optional<TendonFrame> try_pop();
  /// Blocks until a frame is available or the queue is closed and empty.
  std::optional<TendonFrame> wait_pop();
  void close();
  bool closed_and_empty() const;
  std::size_t size() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<TendonFrame> frames_;
  bool closed_ = false;
};

/// Owns the executor's tendon state: scales each frame, runs the tracking
/// servo for one period and reads back the configuration.
class ExecutorTracker {
 public:
  explicit ExecutorTracker(const SessionConfig& cfg);
  ExecutorUpdate apply(const TendonFrame& frame, std::uint64_t now_us);
  void set_scale(const twin::ScaleMapping& scale);
  const arm::TendonVector& tendons() const { return tendons_; }

 private:
  SessionConfig cfg_;
  double dt_;
  arm::TendonVector tendons_;
};

enum class SessionTiming {
  /// Single-threaded event replay on the frame timestamps; deterministic.
  Simulated,
  /// Producer thread paced by wall clock, consumer ticking at the rate.
  RealTime,
};

struct SessionStats {
  std::uint64_t frames_received = 0;
  std::uint64_t frames_applied = 0;
  std::uint64_t frames_dropped = 0;
  /// Consumer ticks that found no frame while the source was still live.
  std::uint64_t stalls = 0;
  /// Applied frames whose sequence did not exceed the previous one.
  std::uint64_t order_violations = 0;
  double mean_latency_us = 0.0;
  bool transport_failed = false;
  std::string error;
};

/// Thread-safe mailbox for changes requested while a session runs. The
/// executor picks a pending change up before applying its next frame.
class SessionControl {
 public:
  void request_scale(const twin::ScaleMapping& scale);
  std::optional<twin::ScaleMapping> take_scale();

 private:
  std::mutex mutex_;
  std::optional<twin::ScaleMapping> scale_;
};

SessionStats run_session(FrameSource& source, ExecutorSink& sink, const SessionConfig& cfg,
                         SessionTiming timing = SessionTiming::Simulated, SessionControl* control = nullptr);

}  // namespace twinarm::teleop
