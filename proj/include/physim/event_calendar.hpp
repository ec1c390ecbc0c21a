#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "physim/error.hpp"

namespace physim {

// Calendar queue for simulations whose events fall on integer ticks. Events
// scheduled for the same tick are delivered in insertion order. Scheduling
// into the past (before the tick currently being drained) is a fault.
template <typename Event>
class TickCalendar {
 public:
  explicit TickCalendar(std::size_t horizon = 0) : buckets_(horizon) {}

  void schedule(std::int64_t tick, Event e) {
    if (tick < now_) {
      throw simulation_fault("event scheduled at tick " + std::to_string(tick) + " while draining tick " +
                             std::to_string(now_));
    }
    const auto t = static_cast<std::size_t>(tick);
    if (t >= buckets_.size()) buckets_.resize(t + 1);
    buckets_[t].push_back(std::move(e));
    ++pending_;
    if (tick > last_) last_ = tick;
  }

  // Removes and returns every event due at `tick`, advancing the clock.
  std::vector<Event> take(std::int64_t tick) {
    now_ = tick;
    const auto t = static_cast<std::size_t>(tick);
    if (t >= buckets_.size()) return {};
    std::vector<Event> due;
    due.swap(buckets_[t]);
    pending_ -= due.size();
    return due;
  }

  std::size_t pending() const { return pending_; }
  bool empty() const { return pending_ == 0; }
  // Latest tick anything was ever scheduled for, or -1.
  std::int64_t last_tick() const { return last_; }

  void clear() {
    for (auto& b : buckets_) b.clear();
    pending_ = 0;
    now_ = 0;
    last_ = -1;
  }

 private:
  std::vector<std::vector<Event>> buckets_;
  std::size_t pending_ = 0;
  std::int64_t now_ = 0;
  std::int64_t last_ = -1;
};

}  // namespace physim
