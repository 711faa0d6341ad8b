// SPDX-License-Identifier: Apache-2.0

#include "ztc/clock.hpp"

#include <thread>

namespace ztc {

SteadyClock::SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

TimestampUs SteadyClock::now_us() const {
  // Offset by one so that the first reading is strictly positive.
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now() - origin_)
             .count() +
         1;
}

void SteadyClock::sleep_for(std::chrono::microseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

}  // namespace ztc
