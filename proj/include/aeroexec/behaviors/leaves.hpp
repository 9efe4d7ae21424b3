#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "aeroexec/behaviors/geometry.hpp"
#include "aeroexec/behaviors/params.hpp"
#include "aeroexec/behaviors/state_trees.hpp"
#include "aeroexec/bt/factory.hpp"
#include "aeroexec/fsm/event.hpp"
#include "aeroexec/mission/plan.hpp"
#include "aeroexec/sim/connector.hpp"

namespace aeroexec::behaviors {

namespace keys {
inline constexpr const char* VehiclePosition = "vehicle.position";
inline constexpr const char* VehicleVelocity = "vehicle.velocity";
inline constexpr const char* VehicleBattery = "vehicle.battery";
inline constexpr const char* VehicleArmed = "vehicle.armed";
inline constexpr const char* VehicleOnGround = "vehicle.on_ground";
inline constexpr const char* EstimatorConfidence = "estimator.confidence";
inline constexpr const char* PlanLoaded = "mission.plan_loaded";
inline constexpr const char* CruiseAltitude = "mission.cruise_altitude";
inline constexpr const char* WaypointIndex = "mission.waypoint_index";
inline constexpr const char* Home = "home.position";
inline constexpr const char* TakeoffTarget = "takeoff.target";
inline constexpr const char* LandingSites = "landing.sites";
inline constexpr const char* LandingTarget = "landing.target";
inline constexpr const char* SearchDone = "landing.search_done";
inline constexpr const char* EmergencyTrigger = "emergency.trigger";
}  // namespace keys

struct TaskRecord {
  std::size_t waypoint = 0;
  std::string waypoint_id;
  std::string kind;
  std::string label;
  double started = 0.0;
  double finished = 0.0;
};

/// What the mission leaves are wired to. Owned by the runtime; outlives the trees.
struct BehaviorContext {
  sim::Session* vehicle = nullptr;
  const mission::MissionPlan* plan = nullptr;
  BehaviorParams params;
  std::function<void(std::string_view)> emit;  // internal event toward the coordinator
  std::vector<TaskRecord> tasks;

  sim::Session& link() const {
    if (!vehicle || !vehicle->bound()) throw Error(Errc::WiringError, "behaviors have no vehicle session");
    return *vehicle;
  }
  const mission::MissionPlan& mission_plan() const {
    if (!plan) throw Error(Errc::WiringError, "behaviors have no mission plan");
    return *plan;
  }
};

namespace detail {

using bt::NodeStatus;

inline double cruise_altitude(const BehaviorContext& c) { return c.plan ? c.plan->cruise_altitude : 10.0; }

inline LandingSiteList cached_sites(const bt::Blackboard& bb) {
  return bb.contains(keys::LandingSites) ? bb.get<LandingSiteList>(keys::LandingSites) : LandingSiteList{};
}

inline Vec3 home_of(const bt::Blackboard& bb, const sim::VehicleState& s) {
  return bb.contains(keys::Home) ? bb.get<Vec3>(keys::Home) : s.position;
}

inline Vec3 takeoff_target(const BehaviorContext& c, const bt::Blackboard& bb, const sim::VehicleState& s) {
  Vec3 home = home_of(bb, s);
  return {home.x, home.y, home.z + cruise_altitude(c)};
}

inline NodeStatus from_bool(bool ok) { return ok ? NodeStatus::Success : NodeStatus::Failure; }

/// Vertical descent at `speed` until `until_altitude` (or the ground).
inline NodeStatus descend(sim::Session& v, double speed, double until_altitude) {
  auto s = v.state();
  if (s.on_ground || s.position.z <= until_altitude) return NodeStatus::Success;
  if (!s.armed) return NodeStatus::Running;  // unpowered, nothing to command
  if (!v.send(sim::VehicleCommand::velocity({0, 0, -speed}))) return NodeStatus::Failure;
  return NodeStatus::Running;
}

class TouchDownLeaf final : public bt::Leaf {
 public:
  explicit TouchDownLeaf(BehaviorContext& c) : c_(c) {}
  NodeStatus tick(bt::LeafContext&) override {
    auto& v = c_.link();
    auto s = v.state();
    if (s.on_ground) return NodeStatus::Success;
    if (!s.armed) return NodeStatus::Running;
    const double speed = s.position.z > c_.params.touchdown_altitude ? c_.params.descent_speed : c_.params.touchdown_speed;
    return v.send(sim::VehicleCommand::velocity({0, 0, -speed})) ? NodeStatus::Running : NodeStatus::Failure;
  }

 private:
  BehaviorContext& c_;
};

class ForEachTaskLeaf final : public bt::Leaf {
 public:
  ForEachTaskLeaf(BehaviorContext& c, std::size_t index) : c_(c), index_(index) {}

  NodeStatus tick(bt::LeafContext& ctx) override {
    const auto& wp = waypoint();
    if (ctx.first_tick) {
      next_ = 0;
      task_started_.reset();
    }
    auto& v = c_.link();
    while (next_ < wp.tasks.size()) {
      const auto& task = wp.tasks[next_];
      if (!task_started_) {
        task_started_ = ctx.now;
        if (std::holds_alternative<mission::LandingSiteSearchTask>(task)) v.enable_detector(true);
      }
      if (!v.send(sim::VehicleCommand::position(wp.position))) return NodeStatus::Failure;
      const double elapsed = ctx.now - *task_started_;
      std::string label;
      if (const auto* s = std::get_if<mission::ScienceTask>(&task)) {
        if (elapsed < s->duration_s) return NodeStatus::Running;
        label = s->label;
        ctx.blackboard.set("science." + s->label, Timestamp{ctx.now});
      } else {
        if (elapsed < c_.params.search_dwell) return NodeStatus::Running;
        v.enable_detector(false);
        label = "search";
        ctx.blackboard.set(keys::SearchDone, true);
      }
      c_.tasks.push_back({index_, wp.id, std::string(mission::task_kind(task)), label, *task_started_, ctx.now});
      task_started_.reset();
      ++next_;
    }
    return NodeStatus::Success;
  }

  void halt() override { stop(); }
  void reset() override { stop(); }

 private:
  const mission::Waypoint& waypoint() const {
    const auto& plan = c_.mission_plan();
    if (index_ >= plan.waypoints.size()) throw Error(Errc::BadParam, "ForEachTask index outside plan");
    return plan.waypoints[index_];
  }
  void stop() {
    if (task_started_ && c_.vehicle && c_.vehicle->bound()) c_.vehicle->enable_detector(false);
    task_started_.reset();
    next_ = 0;
  }

  BehaviorContext& c_;
  std::size_t index_;
  std::size_t next_ = 0;
  std::optional<double> task_started_;
};

class FlySearchPatternLeaf final : public bt::Leaf {
 public:
  explicit FlySearchPatternLeaf(BehaviorContext& c) : c_(c) {}

  NodeStatus tick(bt::LeafContext& ctx) override {
    auto& v = c_.link();
    auto s = v.state();
    if (ctx.first_tick) {
      const auto& p = c_.params;
      const double altitude = std::max(2.0, cruise_altitude(c_) - p.search_altitude_offset);
      pattern_ = generate_search_pattern({s.position.x, s.position.y, 0.0}, p.search_extent, p.search_spacing, altitude);
      next_ = 0;
      v.enable_detector(true);
      active_ = true;
    }
    while (next_ < pattern_.waypoints.size() &&
           distance(s.position, pattern_.waypoints[next_]) < c_.params.waypoint_tolerance)
      ++next_;
    if (next_ >= pattern_.waypoints.size()) {
      finish();
      ctx.blackboard.set(keys::SearchDone, true);
      return NodeStatus::Success;
    }
    if (!v.send(sim::VehicleCommand::position(pattern_.waypoints[next_]))) {
      finish();
      return NodeStatus::Failure;
    }
    return NodeStatus::Running;
  }

  void halt() override { finish(); }
  void reset() override { finish(); }

 private:
  void finish() {
    if (active_ && c_.vehicle && c_.vehicle->bound()) c_.vehicle->enable_detector(false);
    active_ = false;
  }

  BehaviorContext& c_;
  SearchPattern pattern_;
  std::size_t next_ = 0;
  bool active_ = false;
};

}  // namespace detail

/// Registers every leaf and duration provider used by the canonical state trees.
inline void register_behaviors(bt::NodeRegistry& reg, BehaviorContext& c) {
  using bt::LeafContext;
  using bt::LeafKind;
  using bt::NodeStatus;
  using detail::from_bool;
  const BehaviorParams& p = c.params;

  // Init
  reg.register_action("LoadPlan", [&c](LeafContext& ctx) {
    if (!c.plan || c.plan->waypoints.empty()) return NodeStatus::Failure;
    ctx.blackboard.set(keys::PlanLoaded, true);
    ctx.blackboard.set(keys::CruiseAltitude, c.plan->cruise_altitude);
    return NodeStatus::Success;
  });
  reg.register_action("ConnectVehicle", [&c, &p](LeafContext& ctx) {
    if (c.link().ready()) return NodeStatus::Success;
    return ctx.elapsed() > p.connect_timeout ? NodeStatus::Failure : NodeStatus::Running;
  });
  reg.register_action("ZeroOdometry", [&c](LeafContext& ctx) {
    ctx.blackboard.set(keys::Home, c.link().state().position);
    return NodeStatus::Success;
  });

  // PreChecks
  reg.register_condition("PlanLoaded", [](LeafContext& ctx) {
    return ctx.blackboard.contains(keys::PlanLoaded) && ctx.blackboard.get<bool>(keys::PlanLoaded);
  });
  reg.register_condition("BatteryAboveMinimum",
                         [&c, &p](LeafContext&) { return c.link().health().battery_fraction >= p.min_battery; });
  reg.register_condition("EstimatorConfident",
                         [&c, &p](LeafContext&) { return c.link().health().estimator_confidence >= p.estimator_floor; });
  reg.register_condition("HomeRecorded", [](LeafContext& ctx) { return ctx.blackboard.contains(keys::Home); });

  // Takeoff
  reg.register_condition("HealthOK", [&c, &p](LeafContext&) {
    auto h = c.link().health();
    return h.battery_fraction >= p.health_battery && h.estimator_confidence >= p.estimator_floor && h.actuators_ok;
  });
  reg.register_action("SetModeOffboard", [&c](LeafContext&) {
    return from_bool(c.link().send(sim::VehicleCommand::set_mode(sim::FlightMode::Offboard)).accepted);
  });
  reg.register_action("Arm", [&c](LeafContext&) { return from_bool(c.link().send(sim::VehicleCommand::arm()).accepted); });
  reg.register_action("AscendTo", [&c, &p](LeafContext& ctx) {
    auto& v = c.link();
    auto s = v.state();
    if (ctx.first_tick) ctx.blackboard.set(keys::TakeoffTarget, detail::takeoff_target(c, ctx.blackboard, s));
    const Vec3 target = ctx.blackboard.get<Vec3>(keys::TakeoffTarget);
    if (std::abs(s.position.z - target.z) < 0.3 && s.velocity.norm() < 0.3) return NodeStatus::Success;
    return v.send(sim::VehicleCommand::position(target, p.ascent_speed)) ? NodeStatus::Running : NodeStatus::Failure;
  });
  reg.register_duration(names::TakeoffTimeout, [&c, &p](const bt::Blackboard& bb, double) {
    auto s = c.link().state();
    const double d = distance(detail::takeoff_target(c, bb, s), s.position);
    return compute_takeoff_timeout(d, p.ascent_speed, p.takeoff_margin, p.takeoff_floor);
  });
  reg.register_action("Descend", [&c, &p](LeafContext&) {
    return detail::descend(c.link(), p.descent_speed, p.touchdown_altitude);
  });
  reg.register_leaf("Land", LeafKind::Action,
                    [&c](const json&, bt::Blackboard&) { return std::make_unique<detail::TouchDownLeaf>(c); });
  reg.register_leaf("TouchDown", LeafKind::Action,
                    [&c](const json&, bt::Blackboard&) { return std::make_unique<detail::TouchDownLeaf>(c); });
  reg.register_action("Disarm", [&c](LeafContext& ctx) {
    auto& v = c.link();
    if (!v.state().armed) return NodeStatus::Success;
    const bool emergency = ctx.params.value("emergency", false);
    return from_bool(v.send(sim::VehicleCommand::disarm(emergency)).accepted);
  });

  // Mission
  reg.register_action("GoToWaypoint", [&c, &p](LeafContext& ctx) {
    const auto& plan = c.mission_plan();
    const std::size_t i = ctx.params.at("index").get<std::size_t>();
    if (i >= plan.waypoints.size()) throw Error(Errc::BadParam, "GoToWaypoint index outside plan");
    const auto& wp = plan.waypoints[i];
    auto& v = c.link();
    if (distance(v.state().position, wp.position) < p.waypoint_tolerance) {
      ctx.blackboard.set(keys::WaypointIndex, static_cast<double>(i));
      return NodeStatus::Success;
    }
    return v.send(sim::VehicleCommand::position(wp.position, wp.speed.value_or(0.0))) ? NodeStatus::Running
                                                                                      : NodeStatus::Failure;
  });
  reg.register_leaf("ForEachTask", LeafKind::Action, [&c](const json& params, bt::Blackboard&) {
    return std::make_unique<detail::ForEachTaskLeaf>(c, params.at("index").get<std::size_t>());
  });

  // Land
  reg.register_condition("HaveSite", [&c, &p](LeafContext& ctx) {
    auto site = select_landing_site(detail::cached_sites(ctx.blackboard), c.link().state().position,
                                    SitePolicy::Closest, p.min_confidence);
    if (site) ctx.blackboard.set(keys::LandingTarget, site->position);
    return site.has_value();
  });
  reg.register_leaf("FlySearchPattern", LeafKind::Action,
                    [&c](const json&, bt::Blackboard&) { return std::make_unique<detail::FlySearchPatternLeaf>(c); });
  reg.register_condition("SitesFound", [&c, &p](LeafContext& ctx) {
    auto site = select_landing_site(detail::cached_sites(ctx.blackboard), c.link().state().position,
                                    SitePolicy::MostConfident, p.min_confidence);
    if (site) ctx.blackboard.set(keys::LandingTarget, site->position);
    return site.has_value();
  });
  reg.register_action("GoToSite", [&c, &p](LeafContext& ctx) {
    auto& v = c.link();
    auto s = v.state();
    const Vec3 site = ctx.blackboard.get<Vec3>(keys::LandingTarget);
    if (horizontal_distance(s.position, site) < p.waypoint_tolerance) return NodeStatus::Success;
    const double altitude = std::max(s.position.z, p.touchdown_altitude);
    return v.send(sim::VehicleCommand::position({site.x, site.y, altitude})) ? NodeStatus::Running : NodeStatus::Failure;
  });
  reg.register_action("FinalChecks", [&c, &p](LeafContext& ctx) {
    auto h = c.link().health();
    if (!ctx.blackboard.contains(keys::LandingTarget)) return NodeStatus::Failure;
    const Vec3 target = ctx.blackboard.get<Vec3>(keys::LandingTarget);
    bool site_ok = false;
    for (const auto& s : detail::cached_sites(ctx.blackboard))
      if (s.position == target && s.confidence >= p.min_confidence) site_ok = true;
    return from_bool(site_ok && h.estimator_confidence >= p.estimator_floor && h.actuators_ok);
  });
  reg.register_action("EmitEvent", [&c](LeafContext& ctx) {
    if (ctx.first_tick && c.emit) c.emit(ctx.params.at("event").get<std::string>());
    auto result = bt::parse_status(ctx.params.value("result", std::string("Running")));
    return result ? *result : NodeStatus::Running;
  });

  // EmergencyLand
  reg.register_action("RapidDescend", [&c, &p](LeafContext& ctx) {
    const bool battery = ctx.blackboard.contains(keys::EmergencyTrigger) &&
                         ctx.blackboard.get<std::string>(keys::EmergencyTrigger) == fsm::events::EmergencyBattery;
    return detail::descend(c.link(), battery ? p.emergency_battery_descent_speed : p.rapid_descent_speed,
                           p.touchdown_altitude);
  });
}

}  // namespace aeroexec::behaviors
