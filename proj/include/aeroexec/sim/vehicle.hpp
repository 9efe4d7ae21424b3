#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "aeroexec/core/error.hpp"
#include "aeroexec/core/json.hpp"
#include "aeroexec/core/types.hpp"

namespace aeroexec::sim {

enum class FlightMode { Manual, Offboard };

inline std::string_view to_string(FlightMode m) { return m == FlightMode::Offboard ? "offboard" : "manual"; }

enum class CommandKind { SetMode, Arm, Disarm, PositionSetpoint, VelocitySetpoint, Hold };

struct VehicleCommand {
  CommandKind kind = CommandKind::Hold;
  FlightMode mode = FlightMode::Manual;  // SetMode
  Vec3 target;                           // setpoints
  double yaw = 0.0;
  double speed_limit = 0.0;  // PositionSetpoint; 0 = plant maximum
  bool emergency = false;    // Disarm

  static VehicleCommand set_mode(FlightMode m) { return {CommandKind::SetMode, m}; }
  static VehicleCommand arm() { return {CommandKind::Arm}; }
  static VehicleCommand disarm(bool emergency = false) {
    VehicleCommand c{CommandKind::Disarm};
    c.emergency = emergency;
    return c;
  }
  static VehicleCommand position(Vec3 p, double speed_limit = 0.0, double yaw = 0.0) {
    VehicleCommand c{CommandKind::PositionSetpoint};
    c.target = p;
    c.speed_limit = speed_limit;
    c.yaw = yaw;
    return c;
  }
  static VehicleCommand velocity(Vec3 v) {
    VehicleCommand c{CommandKind::VelocitySetpoint};
    c.target = v;
    return c;
  }
  static VehicleCommand hold() { return {CommandKind::Hold}; }
};

enum class Reject { None, ModeNotOffboard, NotArmed, Airborne, NonFinite, NotReady, Refused };

inline std::string_view to_string(Reject r) {
  switch (r) {
    case Reject::None: return "None";
    case Reject::ModeNotOffboard: return "ModeNotOffboard";
    case Reject::NotArmed: return "NotArmed";
    case Reject::Airborne: return "Airborne";
    case Reject::NonFinite: return "NonFinite";
    case Reject::NotReady: return "NotReady";
    case Reject::Refused: return "Refused";
  }
  return "?";
}

struct CommandResult {
  bool accepted = true;
  Reject reason = Reject::None;
  explicit operator bool() const { return accepted; }
  static CommandResult ok() { return {}; }
  static CommandResult rejected(Reject r) { return {false, r}; }
};

struct VehicleState {
  double time = 0.0;
  Vec3 position;
  Vec3 velocity;
  bool armed = false;
  FlightMode mode = FlightMode::Manual;
  double battery_fraction = 1.0;
  bool on_ground = true;
};

inline json to_json_value(const VehicleState& s) {
  return json{{"t", s.time},
              {"position", s.position},
              {"velocity", s.velocity},
              {"armed", s.armed},
              {"mode", to_string(s.mode)},
              {"battery", s.battery_fraction},
              {"on_ground", s.on_ground}};
}

enum class FaultKind { EstimatorDropout, BatteryDrainMultiplier, ActuatorStuck, DetectorBlind };

inline std::string_view to_string(FaultKind k) {
  switch (k) {
    case FaultKind::EstimatorDropout: return "EstimatorDropout";
    case FaultKind::BatteryDrainMultiplier: return "BatteryDrainMultiplier";
    case FaultKind::ActuatorStuck: return "ActuatorStuck";
    case FaultKind::DetectorBlind: return "DetectorBlind";
  }
  return "?";
}

inline std::optional<FaultKind> parse_fault_kind(std::string_view s) {
  for (auto k : {FaultKind::EstimatorDropout, FaultKind::BatteryDrainMultiplier, FaultKind::ActuatorStuck,
                 FaultKind::DetectorBlind})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct FaultInjection {
  FaultKind kind = FaultKind::DetectorBlind;
  double start = 0.0;
  std::optional<double> duration;  // none = permanent
  double factor = 1.0;             // BatteryDrainMultiplier k > 1

  // Tolerates accumulated clock rounding at the edges.
  bool active_at(double t) const {
    constexpr double eps = 1e-9;
    return t >= start - eps && (!duration || t < start + *duration - eps);
  }
};

inline json fault_to_json(const FaultInjection& f) {
  json j{{"kind", to_string(f.kind)}, {"start", f.start}};
  if (f.duration) j["duration"] = *f.duration;
  if (f.kind == FaultKind::BatteryDrainMultiplier) j["factor"] = f.factor;
  return j;
}

inline FaultInjection fault_from_json(const json& j, const std::string& path = "fault") {
  auto bad = [&](const std::string& field, const std::string& what) {
    return Error(Errc::BadConfig, path + "." + field + ": " + what, path + "." + field);
  };
  if (!j.is_object()) throw Error(Errc::BadConfig, path + ": expected an object", path);
  if (!j.contains("kind") || !j["kind"].is_string()) throw bad("kind", "expected a string");
  auto kind = parse_fault_kind(j["kind"].get<std::string>());
  if (!kind) throw bad("kind", "unknown fault kind");
  FaultInjection f;
  f.kind = *kind;
  if (!j.contains("start") || !j["start"].is_number()) throw bad("start", "expected a number");
  f.start = j["start"].get<double>();
  if (j.contains("duration")) {
    if (!j["duration"].is_number()) throw bad("duration", "expected a number");
    f.duration = j["duration"].get<double>();
  }
  if (j.contains("factor")) {
    if (!j["factor"].is_number()) throw bad("factor", "expected a number");
    f.factor = j["factor"].get<double>();
  }
  return f;
}

/// Abstract vehicle contract seen by the autonomy side.
class VehicleBackend {
 public:
  virtual ~VehicleBackend() = default;

  virtual CommandResult apply_command(const VehicleCommand& cmd) = 0;
  /// Advances the plant; returns sites detected during the step.
  virtual LandingSiteList step(double dt) = 0;
  virtual VehicleState state() const = 0;
  virtual HealthSample health() const = 0;
  virtual void inject_fault(const FaultInjection& fault) = 0;
  virtual void enable_detector(bool on) = 0;
  /// Connection established and telemetry valid.
  virtual bool ready() const = 0;
  /// Ground impact above the vertical speed limit has occurred.
  virtual bool crashed() const = 0;
  virtual double max_speed() const = 0;
};

}  // namespace aeroexec::sim
