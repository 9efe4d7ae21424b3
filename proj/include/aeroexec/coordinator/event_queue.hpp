#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "aeroexec/fsm/event.hpp"

namespace aeroexec::coordinator {

/// Bounded priority queue shared between the coordinator loop and producers.
/// Pops by (priority desc, sequence asc). A pending event with the same name
/// absorbs a newer one, except for tree results. When full, the lowest-priority pending event is dropped.
class EventQueue {
 public:
  static constexpr std::size_t kDefaultCapacity = 256;

  struct Drop {
    fsm::Event event;
    bool rejected_incoming = false;  // the new event itself was the lowest
  };

  explicit EventQueue(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error(Errc::BadConfig, "event queue capacity must be >= 1");
  }

  /// Thread-safe and non-blocking apart from the short critical section.
  bool push(fsm::Event e) {
    {
      std::lock_guard lock(mu_);
      e.seq = next_seq_++;
      if (e.enqueued_wall == std::chrono::steady_clock::time_point{}) e.enqueued_wall = std::chrono::steady_clock::now();
      // Tree results are one per tree run and never coalesce.
      const bool bt_result = e.name == fsm::events::BtSuccess || e.name == fsm::events::BtFailure;
      for (const auto& p : pending_)
        if (!bt_result && p.name == e.name) {
          ++coalesced_;
          return true;
        }
      if (pending_.size() >= capacity_) {
        auto lowest = std::prev(pending_.end());
        if (e.priority <= lowest->priority) {
          drops_.push_back({std::move(e), true});
          return false;
        }
        drops_.push_back({*lowest, false});
        pending_.erase(lowest);
      }
      pending_.insert(std::move(e));
    }
    cv_.notify_all();
    return true;
  }

  std::optional<fsm::Event> pop() {
    std::lock_guard lock(mu_);
    if (pending_.empty()) return std::nullopt;
    auto node = pending_.extract(pending_.begin());
    return std::move(node.value());
  }

  /// Removes pending events matching `pred`; returns how many.
  std::size_t purge_if(const std::function<bool(const fsm::Event&)>& pred) {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (pred(*it)) {
        it = pending_.erase(it);
        ++n;
      } else {
        ++it;
      }
    }
    return n;
  }

  /// Blocks until an event is pending, `deadline` passes or `wake()` is called.
  bool wait_until(std::chrono::steady_clock::time_point deadline) {
    std::unique_lock lock(mu_);
    cv_.wait_until(lock, deadline, [&] { return !pending_.empty() || woken_; });
    woken_ = false;
    return !pending_.empty();
  }

  void wake() {
    {
      std::lock_guard lock(mu_);
      woken_ = true;
    }
    cv_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return pending_.size();
  }
  bool empty() const { return size() == 0; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t coalesced() const {
    std::lock_guard lock(mu_);
    return coalesced_;
  }
  std::vector<Drop> drops() const {
    std::lock_guard lock(mu_);
    return drops_;
  }
  std::vector<fsm::Event> pending() const {
    std::lock_guard lock(mu_);
    return {pending_.begin(), pending_.end()};
  }

 private:
  struct Order {
    bool operator()(const fsm::Event& a, const fsm::Event& b) const {
      if (a.priority != b.priority) return a.priority > b.priority;
      return a.seq < b.seq;
    }
  };

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::set<fsm::Event, Order> pending_;
  std::vector<Drop> drops_;
  std::uint64_t next_seq_ = 0;
  std::size_t coalesced_ = 0;
  bool woken_ = false;
};

}  // namespace aeroexec::coordinator
