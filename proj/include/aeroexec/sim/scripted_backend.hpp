#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "aeroexec/sim/vehicle.hpp"

namespace aeroexec::sim {

struct BackendScript {
  std::set<CommandKind> refuse;  // commands always rejected with Reject::Refused
  double speed = 2.0;
  double drain_per_second = 0.001;
  double ready_at = 0.0;
  LandingSiteList sites;  // reported once each when the detector is on
};

/// Test backend with ideal kinematics and scriptable refusals and detections.
class ScriptedBackend final : public VehicleBackend {
 public:
  using Script = BackendScript;

  explicit ScriptedBackend(Script script = {}) : script_(std::move(script)) {}

  CommandResult apply_command(const VehicleCommand& cmd) override {
    log_.push_back(cmd.kind);
    if (script_.refuse.count(cmd.kind)) return CommandResult::rejected(Reject::Refused);
    switch (cmd.kind) {
      case CommandKind::SetMode:
        state_.mode = cmd.mode;
        return CommandResult::ok();
      case CommandKind::Arm:
        if (!ready()) return CommandResult::rejected(Reject::NotReady);
        if (state_.mode != FlightMode::Offboard) return CommandResult::rejected(Reject::ModeNotOffboard);
        if (!state_.on_ground && !state_.armed) return CommandResult::rejected(Reject::Airborne);
        state_.armed = true;
        target_ = state_.position;
        return CommandResult::ok();
      case CommandKind::Disarm:
        if (!state_.on_ground && !cmd.emergency) return CommandResult::rejected(Reject::Airborne);
        state_.armed = false;
        return CommandResult::ok();
      case CommandKind::PositionSetpoint:
      case CommandKind::VelocitySetpoint:
        if (!cmd.target.finite()) return CommandResult::rejected(Reject::NonFinite);
        if (!state_.armed) return CommandResult::rejected(Reject::NotArmed);
        if (state_.mode != FlightMode::Offboard) return CommandResult::rejected(Reject::ModeNotOffboard);
        velocity_mode_ = cmd.kind == CommandKind::VelocitySetpoint;
        target_ = cmd.target;
        return CommandResult::ok();
      case CommandKind::Hold:
        velocity_mode_ = false;
        target_ = state_.position;
        return CommandResult::ok();
    }
    return CommandResult::rejected(Reject::Refused);
  }

  LandingSiteList step(double dt) override {
    if (!(dt > 0.0)) throw Error(Errc::BadParam, "step dt must be > 0");
    Vec3 v;
    if (state_.armed) {
      if (velocity_mode_) {
        v = target_;
      } else {
        Vec3 d = target_ - state_.position;
        v = d.norm() > 0 ? d * (std::min(script_.speed, d.norm() / dt) / d.norm()) : Vec3{};
      }
      if (v.norm() > script_.speed) v = v * (script_.speed / v.norm());
      state_.battery_fraction = std::max(0.0, state_.battery_fraction - script_.drain_per_second * dt);
    }
    state_.position = state_.position + v * dt;
    if (state_.position.z <= 0.0) {
      state_.position.z = 0.0;
      if (v.z < 0) v.z = 0;
    }
    state_.velocity = v;
    state_.time += dt;
    state_.on_ground = state_.position.z <= 0.05;
    LandingSiteList out;
    if (detector_ && next_site_ < script_.sites.size()) {
      out.push_back(script_.sites[next_site_++]);
      out.back().detected_at = Timestamp{state_.time};
    }
    return out;
  }

  VehicleState state() const override { return state_; }
  HealthSample health() const override {
    HealthSample h;
    h.timestamp = state_.time;
    h.battery_fraction = state_.battery_fraction;
    return h;
  }
  void inject_fault(const FaultInjection& f) override {
    if (f.start < state_.time) throw Error(Errc::BadSchedule, "fault start lies in the past");
  }
  void enable_detector(bool on) override { detector_ = on; }
  bool ready() const override { return state_.time >= script_.ready_at; }
  bool crashed() const override { return false; }
  double max_speed() const override { return script_.speed; }

  const std::vector<CommandKind>& command_log() const noexcept { return log_; }

 private:
  Script script_;
  VehicleState state_;
  Vec3 target_;
  bool velocity_mode_ = false;
  bool detector_ = false;
  std::size_t next_site_ = 0;
  std::vector<CommandKind> log_;
};

}  // namespace aeroexec::sim
