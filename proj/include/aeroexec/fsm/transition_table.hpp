#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aeroexec/core/error.hpp"
#include "aeroexec/core/json.hpp"
#include "aeroexec/fsm/event.hpp"
#include "aeroexec/fsm/mission_state.hpp"

namespace aeroexec::fsm {

struct Transition {
  MissionState to;
  bool reenter = false;
};

/// Deterministic (state, event) -> state map. Pairs without a row resolve to a
/// self-transition.
class TransitionTable {
 public:
  using Key = std::pair<MissionState, std::string>;

  TransitionTable() = default;
  TransitionTable(MissionState initial, std::set<MissionState> finals) : initial_(initial), finals_(std::move(finals)) {}

  TransitionTable& add(MissionState from, std::string_view event, MissionState to, bool reenter = false) {
    rows_.insert_or_assign(Key{from, std::string(event)}, Transition{to, reenter});
    return *this;
  }

  bool remove(MissionState from, std::string_view event) { return rows_.erase(Key{from, std::string(event)}) > 0; }

  /// Removes every row from `from` targeting `to`; returns the count removed.
  std::size_t remove_edges(MissionState from, MissionState to) {
    return std::erase_if(rows_, [&](const auto& kv) { return kv.first.first == from && kv.second.to == to; });
  }

  const Transition* find(MissionState from, std::string_view event) const {
    auto it = rows_.find(Key{from, std::string(event)});
    return it == rows_.end() ? nullptr : &it->second;
  }

  /// True if any row mentions this event name.
  bool knows_event(std::string_view event) const {
    return std::any_of(rows_.begin(), rows_.end(), [&](const auto& kv) { return kv.first.second == event; });
  }

  MissionState initial() const noexcept { return initial_; }
  const std::set<MissionState>& finals() const noexcept { return finals_; }
  bool is_final(MissionState s) const { return finals_.count(s) > 0; }
  const std::map<Key, Transition>& rows() const noexcept { return rows_; }

  void set_initial(MissionState s) { initial_ = s; }
  void set_finals(std::set<MissionState> f) { finals_ = std::move(f); }

  /// The default mission table.
  static TransitionTable canonical() {
    using enum MissionState;
    using namespace events;
    TransitionTable t(Idle, {Terminate});
    t.add(Idle, Start, Init);

    // Nominal chain.
    t.add(Init, BtSuccess, PreChecks);
    t.add(PreChecks, BtSuccess, Takeoff);
    t.add(Takeoff, BtSuccess, Mission);
    t.add(Mission, BtSuccess, Land);
    t.add(Land, BtSuccess, Terminate);
    t.add(EmergencyLand, BtSuccess, Terminate);

    // Tree failures.
    t.add(Init, BtFailure, Terminate);
    t.add(PreChecks, BtFailure, Terminate);
    for (auto s : {Takeoff, Mission, Land}) t.add(s, BtFailure, EmergencyLand);
    t.add(EmergencyLand, BtFailure, Terminate);

    // Health events.
    t.add(Takeoff, BatteryLow, Land);
    t.add(Mission, BatteryLow, Land);
    t.add(Land, BatteryLow, Land);
    for (auto s : {Init, PreChecks, Takeoff, Mission, Land}) {
      t.add(s, BatteryCritical, EmergencyLand);
      t.add(s, EmergencyBattery, EmergencyLand);
      t.add(s, StateEstimatorFailure, EmergencyLand);
    }
    t.add(Land, NoLandingSitesFound, Land, /*reenter=*/true);
    t.add(Land, LandingSiteChecks, EmergencyLand);
    t.add(Land, LandingSiteSearchFailed, EmergencyLand);
    return t;
  }

  json to_json() const {
    json rows = json::array();
    for (const auto& [key, tr] : rows_) {
      json r{{"from", to_string(key.first)}, {"event", key.second}, {"to", to_string(tr.to)}};
      if (tr.reenter) r["reenter"] = true;
      rows.push_back(std::move(r));
    }
    json finals = json::array();
    for (auto f : finals_) finals.push_back(to_string(f));
    return json{{"initial", to_string(initial_)}, {"final", finals}, {"rows", rows}};
  }

  static TransitionTable from_json(const json& j) {
    auto schema = [](const std::string& path, const std::string& what) {
      return Error(Errc::SchemaError, path + ": " + what, path);
    };
    auto state_at = [&](const json& node, const std::string& path) {
      if (!node.is_string()) throw schema(path, "expected a state name");
      auto s = parse_state(node.get<std::string>());
      if (!s) throw schema(path, "unknown state '" + node.get<std::string>() + "'");
      return *s;
    };
    if (!j.is_object()) throw schema("$", "table must be an object");
    if (!j.contains("initial")) throw schema("initial", "missing");
    if (!j.contains("final") || !j["final"].is_array()) throw schema("final", "expected an array");
    if (!j.contains("rows") || !j["rows"].is_array()) throw schema("rows", "expected an array");
    TransitionTable t;
    t.initial_ = state_at(j["initial"], "initial");
    for (std::size_t i = 0; i < j["final"].size(); ++i)
      t.finals_.insert(state_at(j["final"][i], "final[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < j["rows"].size(); ++i) {
      const auto& r = j["rows"][i];
      const std::string p = "rows[" + std::to_string(i) + "]";
      if (!r.is_object()) throw schema(p, "row must be an object");
      if (!r.contains("from")) throw schema(p + ".from", "missing");
      if (!r.contains("to")) throw schema(p + ".to", "missing");
      if (!r.contains("event") || !r["event"].is_string() || r["event"].get<std::string>().empty())
        throw schema(p + ".event", "expected a non-empty string");
      bool reenter = false;
      if (r.contains("reenter")) {
        if (!r["reenter"].is_boolean()) throw schema(p + ".reenter", "expected a boolean");
        reenter = r["reenter"].get<bool>();
      }
      t.add(state_at(r["from"], p + ".from"), r["event"].get<std::string>(), state_at(r["to"], p + ".to"), reenter);
    }
    return t;
  }

 private:
  MissionState initial_ = MissionState::Idle;
  std::set<MissionState> finals_{MissionState::Terminate};
  std::map<Key, Transition> rows_;
};

struct DispatchResult {
  MissionState next;
  bool transitioned = false;  // a row fired that leaves or re-enters the state
  bool reenter = false;
};

/// Pure. A self row without `reenter` is absorbed like a missing row.
inline DispatchResult dispatch(MissionState current, std::string_view event, const TransitionTable& table) {
  const Transition* row = table.find(current, event);
  if (!row) return {current, false, false};
  if (row->to == current) return {current, row->reenter, row->reenter};
  return {row->to, true, row->reenter};
}

struct ValidationReport {
  std::vector<MissionState> unreachable;  // from the initial state via non-self rows
  std::vector<MissionState> no_path;      // cannot reach any final state
  bool pass = false;

  std::string to_text() const {
    auto list = [](const std::vector<MissionState>& v) {
      std::string s = "[";
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::string(to_string(v[i]));
      return s + "]";
    };
    std::ostringstream os;
    os << "verdict: " << (pass ? "pass" : "fail") << '\n'
       << "unreachable: " << list(unreachable) << '\n'
       << "no_path_to_final: " << list(no_path) << '\n';
    return os.str();
  }
};

inline ValidationReport validate_table(const TransitionTable& table, MissionState initial) {
  constexpr std::size_t N = kAllStates.size();
  std::array<std::vector<std::size_t>, N> forward{}, backward{};
  for (const auto& [key, tr] : table.rows()) {
    if (tr.to == key.first) continue;
    forward[index_of(key.first)].push_back(index_of(tr.to));
    backward[index_of(tr.to)].push_back(index_of(key.first));
  }
  auto bfs = [](const std::array<std::vector<std::size_t>, N>& adj, std::vector<std::size_t> seeds) {
    std::array<bool, N> seen{};
    std::deque<std::size_t> queue;
    for (auto s : seeds) {
      seen[s] = true;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop_front();
      for (auto v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
    return seen;
  };
  auto reachable = bfs(forward, {index_of(initial)});
  std::vector<std::size_t> final_seeds;
  for (auto f : table.finals()) final_seeds.push_back(index_of(f));
  auto can_finish = bfs(backward, final_seeds);

  ValidationReport report;
  for (auto s : kAllStates) {
    if (!reachable[index_of(s)]) report.unreachable.push_back(s);
    if (!can_finish[index_of(s)]) report.no_path.push_back(s);
  }
  report.pass = report.unreachable.empty() && report.no_path.empty();
  return report;
}

inline ValidationReport validate_table(const TransitionTable& table) { return validate_table(table, table.initial()); }

}  // namespace aeroexec::fsm
