#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>

#include "aeroexec/coordinator/mission_runtime.hpp"

namespace aeroexec::coordinator {

/// Paces a MissionRuntime against the wall clock. Each period runs one full
/// cycle; events arriving between ticks are dispatched as soon as they land,
/// without an extra tick.
class RealtimeDriver {
 public:
  using clock = std::chrono::steady_clock;

  struct Stats {
    std::uint64_t cycles = 0;
    std::uint64_t event_wakes = 0;
    double mean_period_ms = 0.0;
  };

  explicit RealtimeDriver(MissionRuntime& runtime, double speed = 1.0) : rt_(runtime) { set_speed(speed); }
  ~RealtimeDriver() { stop(); }

  RealtimeDriver(const RealtimeDriver&) = delete;
  RealtimeDriver& operator=(const RealtimeDriver&) = delete;

  void set_speed(double multiplier) {
    if (!(multiplier >= 0.1 && multiplier <= 100.0)) throw Error(Errc::BadParam, "speed multiplier must lie in [0.1, 100]");
    speed_.store(multiplier);
  }
  double speed() const { return speed_.load(); }

  /// Callback run on the loop thread after every cycle.
  void on_cycle(std::function<void(const CycleReport&)> fn) { after_ = std::move(fn); }
  /// Callback run on the loop thread while paused, every few milliseconds.
  void on_paused(std::function<void()> fn) { idle_ = std::move(fn); }

  void start() {
    if (thread_.joinable()) return;
    running_ = true;
    thread_ = std::thread([this] { loop(); });
  }

  void stop() {
    running_ = false;
    rt_.coordinator().queue().wake();
    if (thread_.joinable()) thread_.join();
  }

  bool running() const { return running_.load(); }
  /// Freezes the simulated clock; queued events wait for resume.
  void set_paused(bool p) { paused_ = p; }
  bool paused() const { return paused_.load(); }
  Stats stats() const {
    Stats s;
    s.cycles = cycles_.load();
    s.event_wakes = wakes_.load();
    s.mean_period_ms = mean_period_ms_.load();
    return s;
  }

  /// Blocks the caller until the loop has finished (mission done or stopped).
  void join() {
    if (thread_.joinable()) thread_.join();
  }

 private:
  void loop() {
    if (!rt_.machine().started()) rt_.start();
    auto& queue = rt_.coordinator().queue();
    auto next = clock::now();
    const auto first = next;
    std::uint64_t n = 0;
    while (running_ && !rt_.done()) {
      if (paused_) {
        if (idle_) idle_();
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        next = clock::now();
        continue;
      }
      auto r = rt_.step();
      ++n;
      cycles_.store(n);
      if (n > 1) mean_period_ms_.store(std::chrono::duration<double, std::milli>(clock::now() - first).count() / (n - 1));
      if (after_) after_(r);
      const auto period = std::chrono::duration_cast<clock::duration>(
          std::chrono::duration<double>(rt_.config().loop.tick_period / speed_.load()));
      next += period;
      if (clock::now() > next + 5 * period) next = clock::now();  // fell far behind; do not burst
      // One early dispatch per period keeps the one-transition-per-cycle rule.
      bool woke = false;
      while (running_ && clock::now() < next) {
        if (woke) {
          std::this_thread::sleep_until(next);
          break;
        }
        if (queue.wait_until(next) && running_ && !rt_.done()) {
          woke = true;
          auto e = rt_.coordinator().process_events(rt_.sim_time());
          ++wakes_;
          if (after_ && (e.transition || !e.popped.empty())) after_(e);
        }
      }
    }
    running_ = false;
  }

  MissionRuntime& rt_;
  std::atomic<double> speed_{1.0};
  std::atomic<bool> running_{false};
  std::atomic<bool> paused_{false};
  std::atomic<std::uint64_t> cycles_{0};
  std::atomic<std::uint64_t> wakes_{0};
  std::atomic<double> mean_period_ms_{0.0};
  std::function<void(const CycleReport&)> after_;
  std::function<void()> idle_;
  std::thread thread_;
};

}  // namespace aeroexec::coordinator
