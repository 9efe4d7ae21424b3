#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aeroexec/coordinator/mission_runtime.hpp"

namespace aeroexec::montecarlo {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::BadConfig, "cannot read " + p.string(), p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::BadConfig, what + ": " + e.what(), what);
  }
}

/// A config value that is either inline JSON or a path (relative to `base`) to a JSON file.
inline json resolve(const json& v, const std::filesystem::path& base) {
  if (!v.is_string()) return v;
  const auto p = base / v.get<std::string>();
  return parse_json_text(read_file(p), p.string());
}

inline fsm::MissionState parse_state_field(const json& j, const std::string& path) {
  if (!j.is_string()) throw Error(Errc::BadConfig, path + " must be a state name", path);
  auto s = fsm::parse_state(j.get<std::string>());
  if (!s) throw Error(Errc::BadConfig, path + ": unknown state '" + j.get<std::string>() + "'", path);
  return *s;
}

inline coordinator::EventInjection event_injection_from_json(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
    throw Error(Errc::BadConfig, path + " needs a string 'name'", path);
  coordinator::EventInjection e;
  e.name = j["name"].get<std::string>();
  if (j.contains("state")) e.state = parse_state_field(j["state"], path + ".state");
  if (j.contains("delay")) {
    if (!j["delay"].is_number() || j["delay"].get<double>() < 0)
      throw Error(Errc::BadConfig, path + ".delay must be a number >= 0", path + ".delay");
    e.delay = j["delay"].get<double>();
  }
  return e;
}

inline json to_json_value(const coordinator::EventInjection& e) {
  json j{{"name", e.name}, {"delay", e.delay}};
  if (e.state) j["state"] = to_string(*e.state);
  return j;
}

inline coordinator::FaultTrigger fault_trigger_from_json(const json& j, const std::string& path) {
  coordinator::FaultTrigger f;
  json body = j;
  if (j.is_object() && j.contains("state")) {
    f.state = parse_state_field(j["state"], path + ".state");
    body.erase("state");
  }
  f.fault = sim::fault_from_json(body, path);
  return f;
}

inline json to_json_value(const coordinator::FaultTrigger& f) {
  json j = sim::fault_to_json(f.fault);
  if (f.state) j["state"] = to_string(*f.state);
  return j;
}

/// Sections shared by run and campaign files: vehicle, behaviors, healthguard,
/// tick_period, table.
inline void apply_sections(coordinator::RunConfig& c, const json& j, const std::filesystem::path& base) {
  if (j.contains("vehicle")) {
    json v = j["vehicle"];
    json h = v.is_object() && v.contains("home") ? v["home"] : json();
    if (!h.is_null()) v.erase("home");
    c.vehicle = sim::PlantConfig::from_parameters(mission::ParameterServer::from_json(v));
    if (!h.is_null()) {
      if (!h.is_array() || h.size() != 3) throw Error(Errc::BadConfig, "vehicle.home must be [x, y, z]", "vehicle.home");
      c.vehicle.home = {h[0].get<double>(), h[1].get<double>(), h[2].get<double>()};
    }
  }
  if (j.contains("behaviors"))
    c.behaviors = behaviors::BehaviorParams::from_parameters(mission::ParameterServer::from_json(j["behaviors"]));
  if (j.contains("healthguard")) c.health = healthguard::ThresholdConfig::from_json(j["healthguard"]);
  if (j.contains("tick_period")) {
    c.loop.tick_period = j["tick_period"].get<double>();
    c.loop.validate();
  }
  if (j.contains("table")) c.table = fsm::TransitionTable::from_json(resolve(j["table"], base));
}

/// `run.json`: {"plan": path|object, "seed"?, "time_limit"?, "faults"?, "events"?, sections...}
inline coordinator::RunConfig run_config_from_json(const json& j, const std::filesystem::path& base = ".") {
  if (!j.is_object()) throw Error(Errc::BadConfig, "run config must be a JSON object");
  if (j.contains("v") && j["v"] != 1) throw Error(Errc::UnsupportedVersion, "run config version must be 1", "v");
  if (!j.contains("plan")) throw Error(Errc::BadConfig, "run config needs 'plan'", "plan");
  coordinator::RunConfig c;
  c.plan = mission::parse_plan(resolve(j["plan"], base).dump());
  apply_sections(c, j, base);
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("time_limit")) c.time_limit = j["time_limit"].get<double>();
  if (j.contains("faults")) {
    if (!j["faults"].is_array()) throw Error(Errc::BadConfig, "faults must be a list", "faults");
    for (std::size_t i = 0; i < j["faults"].size(); ++i)
      c.faults.push_back(fault_trigger_from_json(j["faults"][i], "faults[" + std::to_string(i) + "]"));
  }
  if (j.contains("events")) {
    if (!j["events"].is_array()) throw Error(Errc::BadConfig, "events must be a list", "events");
    for (std::size_t i = 0; i < j["events"].size(); ++i)
      c.events.push_back(event_injection_from_json(j["events"][i], "events[" + std::to_string(i) + "]"));
  }
  return c;
}

inline coordinator::RunConfig load_run_config(const std::filesystem::path& file) {
  return run_config_from_json(parse_json_text(read_file(file), file.string()), file.parent_path());
}

}  // namespace aeroexec::montecarlo
