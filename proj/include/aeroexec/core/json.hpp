#pragma once

#include <json.hpp>

#include "aeroexec/core/types.hpp"

namespace aeroexec {

using json = nlohmann::json;

inline void to_json(json& j, const Vec3& v) { j = json::array({v.x, v.y, v.z}); }

inline void from_json(const json& j, Vec3& v) {
  if (!j.is_array() || j.size() != 3) throw json::type_error::create(302, "vector-3 must be an array of 3 numbers", &j);
  v = {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline void to_json(json& j, const LandingSite& s) {
  j = json{{"position", s.position}, {"confidence", s.confidence}, {"radius", s.radius},
           {"detected_at", s.detected_at.seconds}};
}

inline void from_json(const json& j, LandingSite& s) {
  s.position = j.at("position").get<Vec3>();
  s.confidence = j.at("confidence").get<double>();
  s.radius = j.at("radius").get<double>();
  s.detected_at = Timestamp{j.value("detected_at", 0.0)};
}

}  // namespace aeroexec
