// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace ztc {

// Microseconds on a monotonic time line. Every timestamp stored in catalogs,
// event logs and KPI timelines uses this unit.
using TimestampUs = std::int64_t;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimestampUs now_us() const = 0;
  virtual void sleep_for(std::chrono::microseconds d) = 0;
};

// Wall-time backed by std::chrono::steady_clock.
class SteadyClock final : public Clock {
 public:
  SteadyClock();
  TimestampUs now_us() const override;
  void sleep_for(std::chrono::microseconds d) override;

 private:
  std::chrono::steady_clock::time_point origin_;
};

// Simulated time: only advances through sleep_for() or advance(). Reads never
// move the clock, which makes snapshot bytes reproducible.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(TimestampUs start = 0) : now_(start) {}
  TimestampUs now_us() const override { return now_.load(); }
  void sleep_for(std::chrono::microseconds d) override { advance(d); }
  void advance(std::chrono::microseconds d) { now_.fetch_add(d.count()); }

 private:
  std::atomic<TimestampUs> now_;
};

}  // namespace ztc
