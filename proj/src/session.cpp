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

#include "twinarm/session.hpp"

#include <cmath>
#include <thread>

namespace twinarm::teleop {

namespace {

using Clock = std::chrono::steady_clock;

// Accumulates per-frame bookkeeping shared by both timing modes.
struct Applier {
  ExecutorTracker tracker;
  ExecutorSink& sink;
  SessionStats& stats;
  SessionControl* control = nullptr;
  double latency_sum = 0.0;
  std::optional<std::uint32_t> last_sequence;

  void apply(const TendonFrame& frame, std::uint64_t now_us, double latency_us) {
    if (control) {
      if (auto scale = control->take_scale()) tracker.set_scale(*scale);
    }
    if (last_sequence && frame.sequence <= *last_sequence) ++stats.order_violations;
    last_sequence = frame.sequence;
    sink.apply(tracker.apply(frame, now_us));
    ++stats.frames_applied;
    latency_sum += latency_us;
  }

  void finish() {
    if (stats.frames_applied > 0) stats.mean_latency_us = latency_sum / static_cast<double>(stats.frames_applied);
  }
};

SessionStats run_simulated(FrameSource& source, Applier& applier, const SessionConfig& cfg) {
  SessionStats& stats = applier.stats;
  FrameQueue queue(4);
  std::optional<TendonFrame> pending;
  bool live = true;
  auto pull = [&] {
    try {
      pending = source.next();
    } catch (const TransportError& e) {
      pending.reset();
      stats.transport_failed = true;
      stats.error = e.what();
    }
    live = pending.has_value();
  };
  pull();
  if (!pending) return stats;

  const std::uint64_t t0 = pending->timestamp_us;
  const double period = 1e6 / cfg.rate_hz;
  for (std::uint64_t k = 0;; ++k) {
    const std::uint64_t tick = t0 + static_cast<std::uint64_t>(std::llround(static_cast<double>(k) * period));
    while (pending && pending->timestamp_us <= tick) {
      ++stats.frames_received;
      if (queue.push(*pending)) ++stats.frames_dropped;
      pull();
    }
    if (auto frame = queue.try_pop()) {
      applier.apply(*frame, tick, static_cast<double>(tick - frame->timestamp_us));
    } else if (live) {
      ++stats.stalls;
    } else {
      break;
    }
  }
  return stats;
}

SessionStats run_real_time(FrameSource& source, Applier& applier, const SessionConfig& cfg) {
  SessionStats& stats = applier.stats;
  FrameQueue queue(4);
  std::mutex stats_mutex;
  const Clock::time_point start = Clock::now();
  std::optional<std::uint64_t> first_ts;

  std::thread producer([&] {
    try {
      while (auto frame = source.next()) {
        if (!first_ts) first_ts = frame->timestamp_us;
        std::this_thread::sleep_until(start + std::chrono::microseconds(frame->timestamp_us - *first_ts));
        const bool dropped = queue.push(*frame);
        std::lock_guard lock(stats_mutex);
        ++stats.frames_received;
        if (dropped) ++stats.frames_dropped;
      }
    } catch (const TransportError& e) {
      std::lock_guard lock(stats_mutex);
      stats.transport_failed = true;
      stats.error = e.what();
    }
    queue.close();
  });

  const auto period = std::chrono::duration<double, std::micro>(1e6 / cfg.rate_hz);
  auto now_us = [&] {
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
  };
  // Anchor the tick schedule on the first frame.
  if (auto first = queue.wait_pop()) {
    const Clock::time_point anchor = Clock::now();
    applier.apply(*first, now_us(), 0.0);
    for (std::uint64_t k = 1;; ++k) {
      std::this_thread::sleep_until(anchor + std::chrono::duration_cast<Clock::duration>(period * static_cast<double>(k)));
      if (auto frame = queue.try_pop()) {
        const std::uint64_t t = now_us();
        const std::uint64_t due = frame->timestamp_us - first->timestamp_us;
        applier.apply(*frame, t, t > due ? static_cast<double>(t - due) : 0.0);
      } else if (queue.closed_and_empty()) {
        break;
      } else {
        std::lock_guard lock(stats_mutex);
        ++stats.stalls;
      }
    }
  }
  producer.join();
  return stats;
}

}  // namespace

std::optional<TendonFrame> VectorFrameSource::next() {
  if (pos_ >= frames_.size()) return std::nullopt;
  return frames_[pos_++];
}

void SessionConfig::validate() const {
  if (!(rate_hz >= 1.0 && rate_hz <= 1000.0)) throw std::invalid_argument("session rate must be in [1, 1000] Hz");
  scale.validate();
  profile.validate();
  tracking.validate();
  executor_layout.validate();
}

std::uint64_t SessionConfig::period_us() const {
  return static_cast<std::uint64_t>(std::llround(1e6 / rate_hz));
}

FrameQueue::FrameQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("frame queue capacity must be positive");
}

bool FrameQueue::push(const TendonFrame& frame) {
  bool dropped = false;
  {
    std::lock_guard lock(mutex_);
    if (frames_.size() == capacity_) {
      frames_.pop_front();
      dropped = true;
    }
    frames_.push_back(frame);
  }
  cv_.notify_one();
  return dropped;
}

std::optional<TendonFrame> FrameQueue::try_pop() {
  std::lock_guard lock(mutex_);
  if (frames_.empty()) return std::nullopt;
  TendonFrame f = frames_.front();
  frames_.pop_front();
  return f;
}

std::optional<TendonFrame> FrameQueue::wait_pop() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !frames_.empty() || closed_; });
  if (frames_.empty()) return std::nullopt;
  TendonFrame f = frames_.front();
  frames_.pop_front();
  return f;
}

void FrameQueue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool FrameQueue::closed_and_empty() const {
  std::lock_guard lock(mutex_);
  return closed_ && frames_.empty();
}

std::size_t FrameQueue::size() const {
  std::lock_guard lock(mutex_);
  return frames_.size();
}

ExecutorTracker::ExecutorTracker(const SessionConfig& cfg) : cfg_(cfg), dt_(1.0 / cfg.rate_hz) {
  cfg_.validate();
}

void ExecutorTracker::set_scale(const twin::ScaleMapping& scale) {
  scale.validate();
  cfg_.scale = scale;
}

ExecutorUpdate ExecutorTracker::apply(const TendonFrame& frame, std::uint64_t now_us) {
  ExecutorUpdate u;
  u.frame = frame;
  u.commanded = twin::map_tendons(frame.displacement_vector(), cfg_.scale);
  tendons_ = twin::executor_track(u.commanded, tendons_, cfg_.tracking, dt_);
  u.executed = tendons_;
  u.config = arm::config_from_tendons(tendons_, cfg_.executor_layout).config;
  u.applied_at_us = now_us;
  return u;
}

void SessionControl::request_scale(const twin::ScaleMapping& scale) {
  scale.validate();
  std::lock_guard lock(mutex_);
  scale_ = scale;
}

std::optional<twin::ScaleMapping> SessionControl::take_scale() {
  std::lock_guard lock(mutex_);
  auto out = scale_;
  scale_.reset();
  return out;
}

SessionStats run_session(FrameSource& source, ExecutorSink& sink, const SessionConfig& cfg, SessionTiming timing,
                         SessionControl* control) {
  cfg.validate();
  SessionStats stats;
  Applier applier{ExecutorTracker(cfg), sink, stats, control, 0.0, std::nullopt};
  if (timing == SessionTiming::Simulated) {
    run_simulated(source, applier, cfg);
  } else {
    run_real_time(source, applier, cfg);
  }
  applier.finish();
  return stats;
}

}  // namespace twinarm::teleop
