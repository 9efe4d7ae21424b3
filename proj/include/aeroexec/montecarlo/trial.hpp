#pragma once

#include <string>
#include <vector>

#include "aeroexec/montecarlo/run_config.hpp"

namespace aeroexec::montecarlo {

enum class Classification { Completed, EmergencyLanding, Crash, Timeout };

constexpr std::string_view to_string(Classification c) noexcept {
  switch (c) {
    case Classification::Completed: return "Completed";
    case Classification::EmergencyLanding: return "EmergencyLanding";
    case Classification::Crash: return "Crash";
    case Classification::Timeout: return "Timeout";
  }
  return "?";
}

inline constexpr Classification kClassifications[] = {Classification::Completed, Classification::EmergencyLanding,
                                                       Classification::Crash, Classification::Timeout};

struct TrialSpec {
  std::uint64_t seed = 0;
  coordinator::RunConfig config;
  std::string group;  // free-form tag, e.g. a distance bin
};

struct LoggedTransition {
  fsm::MissionState from{};
  std::string event;
  fsm::MissionState to{};
  std::uint64_t cycle = 0;
  double sim_time = 0.0;
  friend bool operator==(const LoggedTransition&, const LoggedTransition&) = default;
};

struct LoggedEvent {
  std::string name;
  std::string source;
  fsm::MissionState state{};
  fsm::MissionState next{};
  bool stale = false;
  friend bool operator==(const LoggedEvent&, const LoggedEvent&) = default;
};

struct TrialOutcome {
  std::uint64_t seed = 0;
  std::string group;
  fsm::MissionState initial_state = fsm::MissionState::Idle;
  fsm::MissionState terminal_state{};
  Classification classification{};
  bool crashed = false;
  bool timed_out = false;
  std::vector<LoggedTransition> transition_log;
  std::vector<LoggedEvent> event_log;
  double distance_flown = 0.0;
  double planned_distance = 0.0;
  std::size_t waypoints = 0;
  std::size_t tasks_executed = 0;
  double sim_time = 0.0;
  double final_battery = 0.0;
  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

/// Crash comes first, then Timeout; a run that visited EmergencyLand (or ended
/// in Terminate by any path other than Land's success) is an EmergencyLanding.
inline Classification classify(const TrialOutcome& o, const fsm::TransitionTable& table) {
  if (o.crashed) return Classification::Crash;
  if (o.timed_out) return Classification::Timeout;
  if (!table.is_final(o.terminal_state)) return Classification::Crash;
  bool emergency = false;
  for (const auto& t : o.transition_log)
    if (t.to == fsm::MissionState::EmergencyLand) emergency = true;
  if (emergency) return Classification::EmergencyLanding;
  if (!o.transition_log.empty()) {
    const auto& last = o.transition_log.back();
    if (last.from == fsm::MissionState::Land && last.event == fsm::events::BtSuccess) return Classification::Completed;
  }
  return Classification::EmergencyLanding;
}

inline fsm::TransitionTable table_of(const coordinator::RunConfig& c) {
  return c.table ? *c.table : fsm::TransitionTable::canonical();
}

inline TrialOutcome make_outcome(const coordinator::MissionRuntime& rt, const coordinator::RunResult& r,
                                 std::uint64_t seed, std::string group = {}) {
  TrialOutcome o;
  o.seed = seed;
  o.group = std::move(group);
  o.initial_state = rt.machine().table().initial();
  o.terminal_state = r.final_state;
  o.crashed = r.crashed;
  o.timed_out = r.timed_out;
  for (const auto& t : r.transitions) o.transition_log.push_back({t.from, t.event, t.to, t.cycle, t.sim_time});
  for (const auto& e : r.events) o.event_log.push_back({e.name, std::string(to_string(e.source)), e.state, e.next, e.stale});
  o.distance_flown = r.distance_flown;
  o.planned_distance = mission::path_length(rt.config().plan);
  o.waypoints = rt.config().plan.waypoints.size();
  o.tasks_executed = r.tasks.size();
  o.sim_time = r.sim_time;
  o.final_battery = rt.backend().state().battery_fraction;
  o.classification = classify(o, rt.machine().table());
  return o;
}

inline TrialOutcome run_trial(const TrialSpec& spec) {
  auto cfg = spec.config;
  cfg.seed = spec.seed;
  coordinator::MissionRuntime rt(cfg);
  const auto r = rt.run();
  return make_outcome(rt, r, spec.seed, spec.group);
}

struct Verdict {
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

/// Replays every logged (state, event) pair through dispatch and checks that the
/// transition log is a continuous chain ending in the terminal state.
inline Verdict verify_trial(const TrialOutcome& o, const fsm::TransitionTable& table) {
  Verdict v;
  auto bad = [&](std::string s) { v.mismatches.push_back(std::move(s)); };
  auto label = [](fsm::MissionState s) { return std::string(to_string(s)); };

  std::size_t ti = 0;
  for (std::size_t i = 0; i < o.event_log.size(); ++i) {
    const auto& e = o.event_log[i];
    const std::string at = "event[" + std::to_string(i) + "] " + e.name + " in " + label(e.state);
    if (e.stale) {
      if (e.next != e.state) bad(at + ": stale event changed state");
      continue;
    }
    const auto d = fsm::dispatch(e.state, e.name, table);
    if (d.next != e.next || (d.transitioned && ti >= o.transition_log.size())) {
      bad(at + ": logged " + label(e.next) + ", table gives " + label(d.next));
      continue;
    }
    if (d.transitioned) {
      const auto& t = o.transition_log[ti++];
      if (t.from != e.state || t.event != e.name || t.to != e.next) bad(at + ": transition log disagrees with event log");
    }
  }
  if (ti != o.transition_log.size()) bad("transition log has entries without a dispatched event");

  auto state = o.initial_state;
  for (std::size_t i = 0; i < o.transition_log.size(); ++i) {
    const auto& t = o.transition_log[i];
    const std::string at = "transition[" + std::to_string(i) + "] " + label(t.from) + " -" + t.event + "-> " + label(t.to);
    if (t.from != state) bad(at + ": chain broken, expected from " + label(state));
    const auto d = fsm::dispatch(t.from, t.event, table);
    if (!d.transitioned || d.next != t.to) bad(at + ": table gives " + label(d.next));
    state = t.to;
  }
  if (state != o.terminal_state) bad("chain ends in " + label(state) + " but terminal state is " + label(o.terminal_state));
  return v;
}

inline json to_json_value(const LoggedTransition& t) {
  return {{"from", to_string(t.from)}, {"event", t.event}, {"to", to_string(t.to)}, {"cycle", t.cycle}, {"t", t.sim_time}};
}

inline json outcome_to_json(const TrialOutcome& o, const Verdict& v) {
  json tr = json::array();
  for (const auto& t : o.transition_log) tr.push_back(to_json_value(t));
  json ev = json::array();
  for (const auto& e : o.event_log) {
    json j{{"name", e.name}, {"source", e.source}, {"state", to_string(e.state)}, {"next", to_string(e.next)}};
    if (e.stale) j["stale"] = true;
    ev.push_back(std::move(j));
  }
  return {{"v", 1},
          {"seed", o.seed},
          {"group", o.group},
          {"classification", to_string(o.classification)},
          {"terminal_state", to_string(o.terminal_state)},
          {"verified", v.ok()},
          {"mismatches", v.mismatches},
          {"distance_flown", o.distance_flown},
          {"planned_distance", o.planned_distance},
          {"waypoints", o.waypoints},
          {"tasks_executed", o.tasks_executed},
          {"sim_time", o.sim_time},
          {"final_battery", o.final_battery},
          {"transitions", std::move(tr)},
          {"events", std::move(ev)}};
}

}  // namespace aeroexec::montecarlo
