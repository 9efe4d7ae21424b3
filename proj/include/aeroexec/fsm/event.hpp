#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "aeroexec/bt/blackboard.hpp"

namespace aeroexec::fsm {

enum class EventSource { Internal, External, Health };

constexpr std::string_view to_string(EventSource s) noexcept {
  switch (s) {
    case EventSource::Internal: return "Internal";
    case EventSource::External: return "External";
    case EventSource::Health: return "Health";
  }
  return "?";
}

namespace events {
// BT root status, translated by the coordinator.
inline constexpr std::string_view BtSuccess = "BtSuccess";
inline constexpr std::string_view BtFailure = "BtFailure";
inline constexpr std::string_view Start = "Start";
// Healthguard.
inline constexpr std::string_view StateEstimatorFailure = "StateEstimatorFailure";
inline constexpr std::string_view BatteryLow = "BatteryLow";
inline constexpr std::string_view BatteryCritical = "BatteryCritical";
inline constexpr std::string_view EmergencyBattery = "EmergencyBattery";
inline constexpr std::string_view NoLandingSitesFound = "NoLandingSitesFound";
inline constexpr std::string_view LandingSiteChecks = "LandingSiteChecks";
// Named task events.
inline constexpr std::string_view LandingSiteSearchFailed = "LandingSiteSearchFailed";

inline constexpr std::string_view kHealthEvents[] = {StateEstimatorFailure, BatteryLow,          BatteryCritical,
                                                     EmergencyBattery,      NoLandingSitesFound, LandingSiteChecks};
}  // namespace events

struct Event {
  std::string name;
  EventSource source = EventSource::External;
  int priority = 0;
  std::map<std::string, bt::Value> payload;

  // Set by the queue.
  std::uint64_t seq = 0;
  double sim_time = 0.0;
  std::chrono::steady_clock::time_point enqueued_wall{};
  // State-entry count of the tree that produced a BtSuccess/BtFailure.
  std::uint64_t epoch = 0;
};

/// Event-name priority order, fixed once the coordinator is configured.
/// Higher values preempt lower ones; unknown names get `fallback`.
class EventPriorities {
 public:
  EventPriorities() = default;
  explicit EventPriorities(std::map<std::string, int, std::less<>> table, int fallback = 10)
      : table_(std::move(table)), fallback_(fallback) {}

  static const EventPriorities& defaults() {
    using namespace events;
    static const EventPriorities table({{std::string(EmergencyBattery), 100},
                            {std::string(StateEstimatorFailure), 90},
                            {std::string(BatteryCritical), 80},
                            {std::string(BtFailure), 70},
                            {std::string(NoLandingSitesFound), 60},
                            {std::string(LandingSiteChecks), 60},
                            {std::string(BatteryLow), 50},
                            {std::string(BtSuccess), 40}},
                           10);
    return table;
  }

  int of(std::string_view name) const {
    auto it = table_.find(name);
    return it == table_.end() ? fallback_ : it->second;
  }

  const std::map<std::string, int, std::less<>>& table() const noexcept { return table_; }

 private:
  std::map<std::string, int, std::less<>> table_;
  int fallback_ = 10;
};

inline Event make_event(std::string name, EventSource source, const EventPriorities& priorities = EventPriorities::defaults()) {
  Event e;
  e.priority = priorities.of(name);
  e.name = std::move(name);
  e.source = source;
  return e;
}

}  // namespace aeroexec::fsm
