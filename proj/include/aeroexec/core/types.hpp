#pragma once

#include <compare>
#include <vector>

#include "aeroexec/core/vec3.hpp"

namespace aeroexec {

/// Simulated time in seconds. Kept distinct from plain numbers on the blackboard.
struct Timestamp {
  double seconds = 0.0;
  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
};

struct LandingSite {
  Vec3 position;
  double confidence = 0.0;  // [0, 1]
  double radius = 1.0;      // meters, > 0
  Timestamp detected_at;

  friend bool operator==(const LandingSite&, const LandingSite&) = default;
};

using LandingSiteList = std::vector<LandingSite>;

/// One health observation as seen by the monitor.
struct HealthSample {
  double timestamp = 0.0;
  double battery_fraction = 1.0;
  double battery_voltage = 16.8;
  double estimator_confidence = 1.0;
  bool actuators_ok = true;
  int landing_sites_cached = 0;
  bool site_required = false;  // a landing site is currently needed
};

}  // namespace aeroexec
