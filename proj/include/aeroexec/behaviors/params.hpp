#pragma once

#include "aeroexec/mission/parameter_server.hpp"

namespace aeroexec::behaviors {

struct BehaviorParams {
  double takeoff_margin = 2.0;
  double takeoff_floor = 5.0;  // s
  double ascent_speed = 1.0;   // m/s
  double descent_speed = 1.0;
  double rapid_descent_speed = 1.2;
  double emergency_battery_descent_speed = 1.4;
  double touchdown_speed = 0.5;
  double touchdown_altitude = 2.0;  // switch to touchdown speed below this
  double waypoint_tolerance = 1.0;  // m
  double search_extent = 40.0;
  double search_spacing = 8.0;
  double search_altitude_offset = 5.0;  // below cruise
  double min_confidence = 0.6;
  double search_dwell = 3.0;      // s, LandingSiteSearch task
  double min_battery = 0.5;       // PreChecks
  double estimator_floor = 0.3;   // PreChecks / FinalChecks
  double health_battery = 0.15;   // HealthOK
  double connect_timeout = 30.0;  // s

  static BehaviorParams from_parameters(const mission::ParameterServer& p) {
    BehaviorParams b;
    b.takeoff_margin = p.number_or("takeoff_margin", b.takeoff_margin);
    b.takeoff_floor = p.number_or("takeoff_floor", b.takeoff_floor);
    b.ascent_speed = p.number_or("ascent_speed", b.ascent_speed);
    b.descent_speed = p.number_or("descent_speed", b.descent_speed);
    b.rapid_descent_speed = p.number_or("rapid_descent_speed", b.rapid_descent_speed);
    b.emergency_battery_descent_speed = p.number_or("emergency_battery_descent_speed", b.emergency_battery_descent_speed);
    b.touchdown_speed = p.number_or("touchdown_speed", b.touchdown_speed);
    b.touchdown_altitude = p.number_or("touchdown_altitude", b.touchdown_altitude);
    b.waypoint_tolerance = p.number_or("waypoint_tolerance", b.waypoint_tolerance);
    b.search_extent = p.number_or("search_extent", b.search_extent);
    b.search_spacing = p.number_or("search_spacing", b.search_spacing);
    b.search_altitude_offset = p.number_or("search_altitude_offset", b.search_altitude_offset);
    b.min_confidence = p.number_or("min_confidence", b.min_confidence);
    b.search_dwell = p.number_or("search_dwell", b.search_dwell);
    b.min_battery = p.number_or("min_battery", b.min_battery);
    b.estimator_floor = p.number_or("estimator_floor", b.estimator_floor);
    b.health_battery = p.number_or("health_battery", b.health_battery);
    b.connect_timeout = p.number_or("connect_timeout", b.connect_timeout);
    return b;
  }
};

}  // namespace aeroexec::behaviors
