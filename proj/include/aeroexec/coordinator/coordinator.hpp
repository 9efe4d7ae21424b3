#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aeroexec/coordinator/event_queue.hpp"
#include "aeroexec/fsm/state_machine.hpp"

namespace aeroexec::coordinator {

struct LoopConfig {
  double tick_period = 0.02;        // simulated seconds
  std::size_t max_events_per_cycle = 0;  // 0 drains everything

  void validate() const {
    if (!(tick_period > 0.0)) throw Error(Errc::BadConfig, "tick_period must be > 0", "tick_period");
  }
};

struct TransitionRecord {
  std::uint64_t cycle = 0;
  double sim_time = 0.0;
  fsm::MissionState from{};
  std::string event;
  fsm::MissionState to{};
  bool reenter = false;
  double latency_ms = 0.0;  // enqueue to applied, wall clock
};

struct PoppedEvent {
  std::string name;
  fsm::EventSource source{};
  fsm::MissionState state{};  // state the event was dispatched against
  fsm::MissionState next{};   // state after dispatch; equals `state` when absorbed
  bool stale = false;         // Bt result from a tree that is no longer active
};

struct CycleReport {
  std::uint64_t cycle = 0;
  double sim_time = 0.0;
  fsm::MissionState state{};  // after the cycle
  std::vector<PoppedEvent> popped;
  std::optional<TransitionRecord> transition;
  std::optional<bt::NodeStatus> root_status;
};

inline json to_json_value(const TransitionRecord& t) {
  return {{"from", to_string(t.from)}, {"event", t.event}, {"to", to_string(t.to)}, {"reenter", t.reenter},
          {"cycle", t.cycle}, {"sim_time", t.sim_time}};
}

inline json to_json_value(const CycleReport& r) {
  json j{{"cycle", r.cycle}, {"sim_time", r.sim_time}, {"state", to_string(r.state)}};
  json popped = json::array();
  for (const auto& p : r.popped) popped.push_back(p.name);
  j["popped_events"] = std::move(popped);
  if (r.transition) j["transition"] = to_json_value(*r.transition);
  if (r.root_status) j["root_status"] = to_string(*r.root_status);
  return j;
}

/// Main execution loop body. run_cycle and the lifecycle commands belong to a
/// single context; enqueue_event may be called from anywhere.
class Coordinator {
 public:
  using TransitionHook = std::function<void(const TransitionRecord&)>;

  Coordinator(fsm::StateMachine& machine, LoopConfig config = {},
              fsm::EventPriorities priorities = fsm::EventPriorities::defaults(),
              std::size_t queue_capacity = EventQueue::kDefaultCapacity)
      : fsm_(machine), config_(config), priorities_(std::move(priorities)), queue_(queue_capacity) {
    config_.validate();
  }

  void start() {
    fsm_.start();
    tree_done_ = false;
    paused_ = false;
  }

  bool enqueue_event(fsm::Event e) {
    e.priority = priorities_.of(e.name);
    return queue_.push(std::move(e));
  }
  bool enqueue_event(std::string name, fsm::EventSource source = fsm::EventSource::External) {
    return enqueue_event(fsm::make_event(std::move(name), source, priorities_));
  }

  /// Drains events (at most one state change), then ticks the active tree once.
  CycleReport run_cycle(double sim_time) {
    CycleReport r = process_events(sim_time);
    if (auto* tree = fsm_.active_tree(); tree && !tree_done_) {
      if (paused_) {
        if (hold_) hold_();
      } else {
        const auto s = tree->tick(sim_time);
        r.root_status = s;
        if (s != bt::NodeStatus::Running) finish_tree(s, sim_time);
      }
    }
    r.state = fsm_.current();
    if (sink_) sink_(r);
    return r;
  }

  /// Event half of a cycle with no tick. Used on event wake between ticks.
  CycleReport process_events(double sim_time) {
    if (!fsm_.started()) throw Error(Errc::NotInitialized, "coordinator not started");
    CycleReport r;
    r.cycle = ++cycle_;
    r.sim_time = sim_time;
    std::size_t budget = config_.max_events_per_cycle;
    while (!fsm_.is_final()) {
      if (config_.max_events_per_cycle && budget-- == 0) break;
      auto ev = queue_.pop();
      if (!ev) break;
      const auto state = fsm_.current();
      const bool bt_event = ev->name == fsm::events::BtSuccess || ev->name == fsm::events::BtFailure;
      const bool stale = bt_event && ev->source == fsm::EventSource::Internal && ev->epoch != fsm_.epoch();
      r.popped.push_back({ev->name, ev->source, state, state, stale});
      events_.push_back(r.popped.back());
      if (stale) continue;
      const auto d = fsm::dispatch(state, ev->name, fsm_.table());
      if (!d.transitioned) continue;  // absorbed (self-transition)
      apply(*ev, d, sim_time, r);
      r.popped.back().next = events_.back().next = d.next;
      break;
    }
    r.state = fsm_.current();
    return r;
  }

  // BT lifecycle commands against the active tree.
  void execute() {
    require_tree();
    paused_ = false;
  }
  void pause() {
    require_tree();
    paused_ = true;
  }
  void abort(double sim_time = 0.0) {
    auto& tree = require_tree();
    if (tree_done_) return;
    tree.halt();
    finish_tree(bt::NodeStatus::Failure, sim_time);
  }
  void reset() {
    auto& tree = require_tree();
    if (!paused_ && !tree_done_) throw Error(Errc::ResetWhileRunning, "reset needs a paused or finished tree");
    tree.halt();
    tree.reset();
    tree_done_ = false;
  }

  bool paused() const noexcept { return paused_; }
  bool tree_finished() const noexcept { return tree_done_; }
  bool finished() const { return fsm_.started() && fsm_.is_final(); }
  fsm::MissionState state() const { return fsm_.current(); }
  std::uint64_t cycle() const noexcept { return cycle_; }

  fsm::StateMachine& machine() noexcept { return fsm_; }
  const fsm::StateMachine& machine() const noexcept { return fsm_; }
  EventQueue& queue() noexcept { return queue_; }
  const LoopConfig& config() const noexcept { return config_; }
  const fsm::EventPriorities& priorities() const noexcept { return priorities_; }

  const std::vector<TransitionRecord>& transitions() const noexcept { return transitions_; }
  const std::vector<PoppedEvent>& events() const noexcept { return events_; }

  /// Called after each state change, before the new tree's first tick.
  void on_transition(TransitionHook hook) { on_transition_ = std::move(hook); }
  /// Issued every cycle while paused.
  void on_hold(std::function<void()> hold) { hold_ = std::move(hold); }
  void on_cycle(std::function<void(const CycleReport&)> sink) { sink_ = std::move(sink); }

 private:
  bt::BehaviorTree& require_tree() {
    auto* t = fsm_.started() ? fsm_.active_tree() : nullptr;
    if (!t) throw Error(Errc::NoActiveTree, "state " + std::string(to_string(fsm_.current())) + " has no active tree");
    return *t;
  }

  void finish_tree(bt::NodeStatus s, double sim_time) {
    tree_done_ = true;
    auto e = fsm::make_event(std::string(s == bt::NodeStatus::Success ? fsm::events::BtSuccess : fsm::events::BtFailure),
                             fsm::EventSource::Internal, priorities_);
    e.epoch = fsm_.epoch();
    e.sim_time = sim_time;
    queue_.push(std::move(e));
  }

  void apply(const fsm::Event& ev, const fsm::DispatchResult& d, double sim_time, CycleReport& r) {
    TransitionRecord t;
    t.cycle = cycle_;
    t.sim_time = sim_time;
    t.from = fsm_.current();
    t.event = ev.name;
    t.to = d.next;
    t.reenter = d.reenter;
    fsm_.change_state(d.next);
    tree_done_ = false;
    paused_ = false;
    // Results of the old tree must not leak into the new state.
    queue_.purge_if([](const fsm::Event& e) {
      return e.source == fsm::EventSource::Internal &&
             (e.name == fsm::events::BtSuccess || e.name == fsm::events::BtFailure);
    });
    t.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - ev.enqueued_wall).count();
    transitions_.push_back(t);
    r.transition = t;
    if (on_transition_) on_transition_(t);
  }

  fsm::StateMachine& fsm_;
  LoopConfig config_;
  fsm::EventPriorities priorities_;
  EventQueue queue_;
  std::uint64_t cycle_ = 0;
  bool tree_done_ = false;
  bool paused_ = false;
  std::vector<TransitionRecord> transitions_;
  std::vector<PoppedEvent> events_;
  TransitionHook on_transition_;
  std::function<void()> hold_;
  std::function<void(const CycleReport&)> sink_;
};

}  // namespace aeroexec::coordinator
