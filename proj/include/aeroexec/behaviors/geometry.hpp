#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "aeroexec/core/error.hpp"
#include "aeroexec/core/types.hpp"

namespace aeroexec::behaviors {

/// max(floor, margin * distance / speed + floor)
inline double compute_takeoff_timeout(double distance, double ascent_speed, double margin_factor = 2.0,
                                      double floor = 5.0) {
  if (!(ascent_speed > 0.0)) throw Error(Errc::NonPositiveSpeed, "ascent speed must be > 0");
  if (!(distance >= 0.0) || !(margin_factor >= 1.0) || !(floor > 0.0))
    throw Error(Errc::BadParam, "takeoff timeout needs distance >= 0, margin >= 1, floor > 0");
  return std::max(floor, margin_factor * distance / ascent_speed + floor);
}

enum class SitePolicy { Closest, MostConfident };

/// Filters by confidence and picks by policy with a total tie-break, so the
/// result does not depend on input order.
inline std::optional<LandingSite> select_landing_site(const LandingSiteList& sites, Vec3 vehicle, SitePolicy policy,
                                                      double min_confidence) {
  const LandingSite* best = nullptr;
  double best_d = 0.0;
  for (const auto& s : sites) {
    if (s.confidence < min_confidence) continue;
    const double d = distance(s.position, vehicle);
    if (!best) {
      best = &s;
      best_d = d;
      continue;
    }
    bool better = false;
    if (policy == SitePolicy::Closest) {
      if (d != best_d) better = d < best_d;
      else if (s.confidence != best->confidence) better = s.confidence > best->confidence;
      else better = s.position < best->position;
    } else {
      if (s.confidence != best->confidence) better = s.confidence > best->confidence;
      else if (d != best_d) better = d < best_d;
      else better = s.position < best->position;
    }
    if (better) {
      best = &s;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

struct SearchPattern {
  std::vector<Vec3> waypoints;
  double altitude = 0.0;
  double leg_spacing = 0.0;
};

/// Lawnmower sweep over the square of side `extent` centered on `center`. Legs
/// run along y, spaced along x and centered in the square.
inline SearchPattern generate_search_pattern(Vec3 center, double extent, double leg_spacing, double altitude) {
  if (!(extent > 0.0) || !(leg_spacing > 0.0) || !(altitude > 0.0))
    throw Error(Errc::BadGeometry, "search pattern needs extent, spacing and altitude > 0");
  const int legs = static_cast<int>(std::floor(extent / leg_spacing)) + 1;
  const double offset = (extent - (legs - 1) * leg_spacing) / 2.0;
  const double x0 = center.x - extent / 2.0 + offset;
  const double y_lo = center.y - extent / 2.0, y_hi = center.y + extent / 2.0;
  SearchPattern p;
  p.altitude = altitude;
  p.leg_spacing = leg_spacing;
  for (int k = 0; k < legs; ++k) {
    const double x = x0 + k * leg_spacing;
    const bool up = k % 2 == 0;
    p.waypoints.push_back({x, up ? y_lo : y_hi, altitude});
    p.waypoints.push_back({x, up ? y_hi : y_lo, altitude});
  }
  return p;
}

}  // namespace aeroexec::behaviors
