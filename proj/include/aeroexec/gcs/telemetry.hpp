#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "aeroexec/coordinator/mission_runtime.hpp"

namespace aeroexec::gcs {

enum class Lifecycle { Idle, Running, Paused, Finished };

constexpr std::string_view to_string(Lifecycle l) noexcept {
  switch (l) {
    case Lifecycle::Idle: return "Idle";
    case Lifecycle::Running: return "Running";
    case Lifecycle::Paused: return "Paused";
    case Lifecycle::Finished: return "Finished";
  }
  return "?";
}

struct FrameEvent {
  std::string name;
  std::string source;
  fsm::MissionState state{};
  fsm::MissionState next{};
};

/// Everything a client sees of one tick boundary.
struct TelemetryFrame {
  std::uint64_t frame = 0;  // producer-side counter, shared by all subscribers
  double sim_time = 0.0;
  Lifecycle lifecycle = Lifecycle::Idle;
  sim::VehicleState vehicle;
  double estimator_confidence = 1.0;
  fsm::MissionState fsm_state = fsm::MissionState::Idle;
  std::vector<bt::BehaviorTree::NodeView> bt_snapshot;  // tree bound to fsm_state
  std::vector<FrameEvent> recent_events;
  LandingSiteList landing_sites;
  double speed = 1.0;
};

inline constexpr std::size_t kRecentEvents = 20;

/// Reads a runtime at a tick boundary. Must run on the thread that steps it.
inline TelemetryFrame capture(coordinator::MissionRuntime& rt, Lifecycle lifecycle, std::uint64_t frame, double speed) {
  TelemetryFrame f;
  f.frame = frame;
  f.sim_time = rt.sim_time();
  f.lifecycle = lifecycle;
  f.vehicle = rt.backend().state();
  f.estimator_confidence = rt.backend().health().estimator_confidence;
  f.speed = speed;
  if (rt.machine().started()) {
    f.fsm_state = rt.machine().current();
    if (auto* tree = rt.tree(f.fsm_state)) f.bt_snapshot = tree->snapshot();
  }
  const auto& events = rt.coordinator().events();
  const std::size_t from = events.size() > kRecentEvents ? events.size() - kRecentEvents : 0;
  for (std::size_t i = from; i < events.size(); ++i) {
    const auto& e = events[i];
    f.recent_events.push_back({e.name, std::string(to_string(e.source)), e.state, e.next});
  }
  if (rt.blackboard().contains(behaviors::keys::LandingSites))
    f.landing_sites = rt.blackboard().get<LandingSiteList>(behaviors::keys::LandingSites);
  return f;
}

inline json frame_to_json(const TelemetryFrame& f, std::uint64_t seq) {
  json bt = json::array();
  for (const auto& n : f.bt_snapshot)
    bt.push_back({{"node_id", n.id}, {"kind", to_string(n.kind)}, {"status", to_string(n.lifecycle)}});
  json events = json::array();
  for (const auto& e : f.recent_events)
    events.push_back({{"name", e.name}, {"source", e.source}, {"state", to_string(e.state)}, {"next", to_string(e.next)}});
  json vehicle = sim::to_json_value(f.vehicle);
  vehicle["estimator_confidence"] = f.estimator_confidence;
  return {{"v", 1},
          {"seq", seq},
          {"frame", f.frame},
          {"sim_time", f.sim_time},
          {"lifecycle", to_string(f.lifecycle)},
          {"speed", f.speed},
          {"vehicle", std::move(vehicle)},
          {"fsm_state", to_string(f.fsm_state)},
          {"bt_snapshot", std::move(bt)},
          {"recent_events", std::move(events)},
          {"landing_sites", f.landing_sites}};
}

/// Single-slot handoff of immutable frames: the producer replaces the slot,
/// readers copy the pointer. Readers that fall behind simply see the newest.
class FrameSlot {
 public:
  using Ptr = std::shared_ptr<const TelemetryFrame>;

  void publish(TelemetryFrame f) {
    auto p = std::make_shared<const TelemetryFrame>(std::move(f));
    std::lock_guard lock(mu_);
    latest_ = std::move(p);
  }
  Ptr latest() const {
    std::lock_guard lock(mu_);
    return latest_;
  }

 private:
  mutable std::mutex mu_;
  Ptr latest_ = std::make_shared<const TelemetryFrame>();
};

}  // namespace aeroexec::gcs
