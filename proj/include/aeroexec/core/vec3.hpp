#pragma once

#include <cmath>
#include <compare>

namespace aeroexec {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
  friend constexpr auto operator<=>(Vec3, Vec3) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double horizontal_norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(Vec3 a, Vec3 b) { return (a - b).norm(); }
inline double horizontal_distance(Vec3 a, Vec3 b) { return (a - b).horizontal_norm(); }

}  // namespace aeroexec
