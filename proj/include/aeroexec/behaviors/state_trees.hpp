#pragma once

#include <string>

#include "aeroexec/bt/factory.hpp"
#include "aeroexec/fsm/mission_state.hpp"
#include "aeroexec/mission/plan.hpp"

namespace aeroexec::behaviors {

namespace names {
inline constexpr const char* TakeoffTimeout = "TakeoffTimeout";
}  // namespace names

/// Canonical tree spec for a mission phase. The Mission tree is generated from
/// the plan, one Sequence per waypoint. Idle and Terminate carry no tree.
inline json build_state_tree(fsm::MissionState state, const mission::MissionPlan* plan = nullptr) {
  using namespace bt::spec;
  using enum fsm::MissionState;
  switch (state) {
    case Init:
      return sequence("init", {action("load_plan", "LoadPlan"), action("connect_vehicle", "ConnectVehicle"),
                               action("zero_odometry", "ZeroOdometry")});
    case PreChecks:
      return sequence("prechecks",
                      {condition("plan_loaded", "PlanLoaded"), condition("battery_above_minimum", "BatteryAboveMinimum"),
                       condition("estimator_confident", "EstimatorConfident"), condition("home_recorded", "HomeRecorded")});
    case Takeoff:
      return sequence(
          "takeoff",
          {condition("health_ok", "HealthOK"),
           fallback("takeoff_or_recover",
                    {sequence("nominal_takeoff",
                              {action("set_mode_offboard", "SetModeOffboard"), action("arm", "Arm"),
                               dynamic_timeout("ascend_timeout", names::TakeoffTimeout, action("ascend", "AscendTo"))}),
                     sequence("recovery", {action("descend", "Descend"), action("recovery_land", "Land"),
                                           action("recovery_disarm", "Disarm")})})});
    case Mission: {
      if (!plan || plan->waypoints.empty()) throw Error(Errc::BadParam, "the Mission tree needs a plan with waypoints");
      json legs = json::array();
      for (std::size_t i = 0; i < plan->waypoints.size(); ++i) {
        const std::string n = std::to_string(i);
        legs.push_back(sequence("wp" + n, {action("goto_wp" + n, "GoToWaypoint", {{"index", i}}),
                                           action("tasks_wp" + n, "ForEachTask", {{"index", i}})}));
      }
      return sequence("mission", std::move(legs));
    }
    case Land:
      return sequence(
          "land",
          {fallback("find_site", {condition("have_site", "HaveSite"),
                                  sequence("search", {action("fly_search_pattern", "FlySearchPattern"),
                                                      condition("sites_found", "SitesFound")})}),
           fallback("land_or_report",
                    {sequence("land_at_site", {action("goto_site", "GoToSite"), action("final_checks", "FinalChecks"),
                                               action("touch_down", "TouchDown"), action("disarm", "Disarm")}),
                     action("report_checks", "EmitEvent", {{"event", "LandingSiteChecks"}})})});
    case EmergencyLand:
      return sequence("emergency_land", {action("rapid_descend", "RapidDescend"), action("touch_down", "TouchDown"),
                                         action("disarm", "Disarm", {{"emergency", true}})});
    case Idle:  // waits for Start; nothing to tick
    case Terminate:
      break;
  }
  throw Error(Errc::NoTreeForState, "state " + std::string(to_string(state)) + " has no behavior tree");
}

}  // namespace aeroexec::behaviors
