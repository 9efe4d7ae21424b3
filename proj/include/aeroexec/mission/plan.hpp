#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "aeroexec/core/error.hpp"
#include "aeroexec/core/json.hpp"

namespace aeroexec::mission {

struct ScienceTask {
  double duration_s = 1.0;
  std::string label;
  friend bool operator==(const ScienceTask&, const ScienceTask&) = default;
};

struct LandingSiteSearchTask {
  double extent_m = 20.0;
  double min_confidence = 0.6;
  friend bool operator==(const LandingSiteSearchTask&, const LandingSiteSearchTask&) = default;
};

using Task = std::variant<ScienceTask, LandingSiteSearchTask>;

inline std::string_view task_kind(const Task& t) {
  return std::holds_alternative<ScienceTask>(t) ? "Science" : "LandingSiteSearch";
}

struct Waypoint {
  std::string id;
  Vec3 position;
  std::optional<double> speed;
  std::vector<Task> tasks;
  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct MissionPlan {
  std::string version = "1";
  std::string frame = "local_enu";
  double cruise_altitude = 10.0;
  std::vector<Waypoint> waypoints;
  friend bool operator==(const MissionPlan&, const MissionPlan&) = default;
};

inline constexpr std::string_view kSupportedPlanVersion = "1";

namespace detail {

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw Error(Errc::SchemaError, path + ": " + what, path);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(path.empty() ? key : path + "." + key, "missing");
  return obj[key];
}

inline double finite_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "must be finite");
  return v;
}

inline double positive_number(const json& j, const std::string& path) {
  double v = finite_number(j, path);
  if (!(v > 0.0)) schema_error(path, "must be > 0");
  return v;
}

inline Task parse_task(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "task must be an object");
  const json& kind = require(j, "kind", path);
  if (!kind.is_string()) schema_error(path + ".kind", "expected a string");
  const json params = j.contains("params") ? j["params"] : json::object();
  if (!params.is_object()) schema_error(path + ".params", "expected an object");
  const std::string pp = path + ".params";
  if (kind == "Science") {
    ScienceTask t;
    t.duration_s = positive_number(require(params, "duration_s", pp), pp + ".duration_s");
    const json& label = require(params, "label", pp);
    if (!label.is_string()) schema_error(pp + ".label", "expected a string");
    t.label = label.get<std::string>();
    return t;
  }
  if (kind == "LandingSiteSearch") {
    LandingSiteSearchTask t;
    t.extent_m = positive_number(require(params, "extent_m", pp), pp + ".extent_m");
    t.min_confidence = finite_number(require(params, "min_confidence", pp), pp + ".min_confidence");
    if (t.min_confidence < 0.0 || t.min_confidence > 1.0) schema_error(pp + ".min_confidence", "must lie in [0, 1]");
    return t;
  }
  schema_error(path + ".kind", "unknown task kind '" + kind.get<std::string>() + "'");
}

}  // namespace detail

/// Parses a plan document. Throws SyntaxError, SchemaError (with the offending
/// field path) or UnsupportedVersion.
inline MissionPlan parse_plan(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(Errc::SyntaxError, e.what());
  }
  using detail::require;
  using detail::schema_error;
  if (!doc.is_object()) schema_error("$", "plan must be an object");
  const json& version = require(doc, "version", "");
  if (!version.is_string()) schema_error("version", "expected a string");
  if (version.get<std::string>() != kSupportedPlanVersion)
    throw Error(Errc::UnsupportedVersion, "plan version '" + version.get<std::string>() + "' is not supported", "version");

  MissionPlan plan;
  plan.version = version.get<std::string>();
  const json& frame = require(doc, "frame", "");
  if (!frame.is_string()) schema_error("frame", "expected a string");
  plan.frame = frame.get<std::string>();
  plan.cruise_altitude = detail::positive_number(require(doc, "cruise_altitude", ""), "cruise_altitude");

  const json& wps = require(doc, "waypoints", "");
  if (!wps.is_array()) schema_error("waypoints", "expected an array");
  if (wps.empty()) schema_error("waypoints", "plan needs at least one waypoint");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const std::string path = "waypoints[" + std::to_string(i) + "]";
    const json& w = wps[i];
    if (!w.is_object()) schema_error(path, "waypoint must be an object");
    Waypoint wp;
    const json& id = require(w, "id", path);
    if (!id.is_string() || id.get<std::string>().empty()) schema_error(path + ".id", "expected a non-empty string");
    wp.id = id.get<std::string>();
    if (!ids.insert(wp.id).second) schema_error(path + ".id", "duplicate waypoint id '" + wp.id + "'");
    const json& pos = require(w, "position", path);
    if (!pos.is_array() || pos.size() != 3) schema_error(path + ".position", "expected [x, y, z]");
    for (std::size_t k = 0; k < 3; ++k)
      detail::finite_number(pos[k], path + ".position[" + std::to_string(k) + "]");
    wp.position = pos.get<Vec3>();
    if (w.contains("speed")) wp.speed = detail::positive_number(w["speed"], path + ".speed");
    if (w.contains("tasks")) {
      const json& tasks = w["tasks"];
      if (!tasks.is_array()) schema_error(path + ".tasks", "expected an array");
      for (std::size_t k = 0; k < tasks.size(); ++k)
        wp.tasks.push_back(detail::parse_task(tasks[k], path + ".tasks[" + std::to_string(k) + "]"));
    }
    plan.waypoints.push_back(std::move(wp));
  }
  return plan;
}

inline json plan_to_json(const MissionPlan& plan) {
  json wps = json::array();
  for (const auto& wp : plan.waypoints) {
    json w{{"id", wp.id}, {"position", wp.position}};
    if (wp.speed) w["speed"] = *wp.speed;
    json tasks = json::array();
    for (const auto& t : wp.tasks) {
      if (const auto* s = std::get_if<ScienceTask>(&t)) {
        tasks.push_back({{"kind", "Science"}, {"params", {{"duration_s", s->duration_s}, {"label", s->label}}}});
      } else {
        const auto& l = std::get<LandingSiteSearchTask>(t);
        tasks.push_back(
            {{"kind", "LandingSiteSearch"}, {"params", {{"extent_m", l.extent_m}, {"min_confidence", l.min_confidence}}}});
      }
    }
    w["tasks"] = std::move(tasks);
    wps.push_back(std::move(w));
  }
  return json{{"version", plan.version},
              {"frame", plan.frame},
              {"cruise_altitude", plan.cruise_altitude},
              {"waypoints", std::move(wps)}};
}

inline std::string serialize_plan(const MissionPlan& plan) { return plan_to_json(plan).dump(2); }

/// Polyline length through the waypoints in order.
inline double path_length(const MissionPlan& plan) {
  double total = 0.0;
  for (std::size_t i = 1; i < plan.waypoints.size(); ++i)
    total += distance(plan.waypoints[i - 1].position, plan.waypoints[i].position);
  return total;
}

struct VehicleLimits {
  double max_path_length = 1200.0;  // endurance-derived, meters
  double max_speed = 3.0;           // m/s
};

enum class ViolationKind { ZeroLengthLeg, PathTooLong, SpeedTooHigh };

struct Violation {
  ViolationKind kind;
  std::size_t index = 0;  // waypoint index (leg start for legs)
  std::string message;
  friend bool operator==(const Violation& a, const Violation& b) { return a.kind == b.kind && a.index == b.index; }
};

struct PlanReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline PlanReport validate_plan(const MissionPlan& plan, const VehicleLimits& limits = {}) {
  PlanReport report;
  const auto& wps = plan.waypoints;
  for (std::size_t i = 1; i < wps.size(); ++i) {
    if (distance(wps[i - 1].position, wps[i].position) <= 0.0) {
      report.violations.push_back({ViolationKind::ZeroLengthLeg, i - 1,
                                   "zero-length leg between waypoints[" + std::to_string(i - 1) + "] and waypoints[" +
                                       std::to_string(i) + "]"});
    }
  }
  for (std::size_t i = 0; i < wps.size(); ++i) {
    if (wps[i].speed && *wps[i].speed > limits.max_speed) {
      report.violations.push_back({ViolationKind::SpeedTooHigh, i,
                                   "waypoints[" + std::to_string(i) + "].speed " + std::to_string(*wps[i].speed) +
                                       " exceeds max " + std::to_string(limits.max_speed)});
    }
  }
  const double length = path_length(plan);
  if (length > limits.max_path_length) {
    report.violations.push_back({ViolationKind::PathTooLong, 0,
                                 "path length " + std::to_string(length) + " m exceeds limit " +
                                     std::to_string(limits.max_path_length) + " m"});
  }
  return report;
}

/// Position in a plan: the index of the most recently yielded waypoint, or
/// none before the first.
struct PlanCursor {
  std::optional<std::size_t> position;
  friend bool operator==(const PlanCursor&, const PlanCursor&) = default;

  std::string serialize() const { return position ? std::to_string(*position) : std::string("-"); }
  static PlanCursor parse(std::string_view s) {
    if (s == "-") return {};
    std::size_t value = 0;
    if (s.empty()) throw Error(Errc::InvalidCursor, "empty cursor");
    for (char c : s) {
      if (c < '0' || c > '9') throw Error(Errc::InvalidCursor, "malformed cursor '" + std::string(s) + "'");
      value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    return PlanCursor{value};
  }
};

struct CursorStep {
  const Waypoint* waypoint = nullptr;  // null when done
  PlanCursor cursor;
  bool done() const { return waypoint == nullptr; }
};

inline CursorStep cursor_next(const MissionPlan& plan, PlanCursor cursor) {
  if (cursor.position && *cursor.position >= plan.waypoints.size())
    throw Error(Errc::InvalidCursor, "cursor " + cursor.serialize() + " outside plan of " +
                                         std::to_string(plan.waypoints.size()) + " waypoints");
  const std::size_t next = cursor.position ? *cursor.position + 1 : 0;
  if (next >= plan.waypoints.size()) return {nullptr, cursor};
  return {&plan.waypoints[next], PlanCursor{next}};
}

}  // namespace aeroexec::mission
