#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "aeroexec/mission/parameter_server.hpp"
#include "aeroexec/sim/vehicle.hpp"

namespace aeroexec::sim {

struct PlantConfig {
  double v_max = 3.0;          // m/s
  double tau = 0.5;            // velocity tracking time constant, s
  double position_gain = 1.0;  // 1/s
  double p_hover = 1.0;        // power units
  double k_v = 0.1;            // power units per m/s
  double e_capacity = 900.0;   // energy units; ~15 min hover
  double initial_battery = 1.0;
  double boot_time = 3.0;  // s until the link reports ready
  double crash_vz = 1.5;   // m/s vertical impact limit
  double ground_epsilon = 0.05;
  double gravity = 9.81;
  double confidence_tau = 1.0;  // estimator decay during dropout
  double detector_rate = 1.0;   // Hz
  double detector_footprint = 20.0;
  double detector_min_altitude = 1.0;
  double site_conf_mean = 0.75;
  double site_conf_sigma = 0.15;
  bool allow_air_arm = false;
  Vec3 home;

  static PlantConfig from_parameters(const mission::ParameterServer& p) {
    PlantConfig c;
    c.v_max = p.number_or("v_max", c.v_max);
    c.tau = p.number_or("tau", c.tau);
    c.position_gain = p.number_or("position_gain", c.position_gain);
    c.p_hover = p.number_or("p_hover", c.p_hover);
    c.k_v = p.number_or("k_v", c.k_v);
    c.e_capacity = p.number_or("e_capacity", c.e_capacity);
    c.initial_battery = p.number_or("initial_battery", c.initial_battery);
    c.boot_time = p.number_or("boot_time", c.boot_time);
    c.crash_vz = p.number_or("crash_vz", c.crash_vz);
    c.confidence_tau = p.number_or("confidence_tau", c.confidence_tau);
    c.detector_rate = p.number_or("detector_rate", c.detector_rate);
    c.detector_footprint = p.number_or("detector_footprint", c.detector_footprint);
    c.site_conf_mean = p.number_or("site_conf_mean", c.site_conf_mean);
    c.site_conf_sigma = p.number_or("site_conf_sigma", c.site_conf_sigma);
    c.allow_air_arm = p.boolean_or("allow_air_arm", c.allow_air_arm);
    if (!(c.v_max > 0) || !(c.tau >= 0) || !(c.e_capacity > 0) || !(c.detector_rate > 0) || c.initial_battery < 0 ||
        c.initial_battery > 1)
      throw Error(Errc::BadConfig, "vehicle parameters out of range");
    return c;
  }
};

/// Point-mass multirotor stand-in: first-order velocity tracking, linear-in-speed
/// battery drain, a stochastic landing-site detector and an estimator-confidence
/// model. Flat ground at z = 0.
class SimVehicle final : public VehicleBackend {
 public:
  explicit SimVehicle(PlantConfig config = {}, std::uint64_t seed = 1) : cfg_(config), rng_(seed) {
    state_.position = cfg_.home;
    state_.battery_fraction = cfg_.initial_battery;
    state_.on_ground = state_.position.z <= cfg_.ground_epsilon;
  }

  const PlantConfig& config() const noexcept { return cfg_; }

  CommandResult apply_command(const VehicleCommand& cmd) override {
    switch (cmd.kind) {
      case CommandKind::SetMode:
        state_.mode = cmd.mode;
        if (cmd.mode != FlightMode::Offboard) latch_hold();
        return CommandResult::ok();
      case CommandKind::Arm:
        if (!ready()) return CommandResult::rejected(Reject::NotReady);
        if (state_.mode != FlightMode::Offboard) return CommandResult::rejected(Reject::ModeNotOffboard);
        if (!state_.on_ground && !state_.armed && !cfg_.allow_air_arm) return CommandResult::rejected(Reject::Airborne);
        if (!state_.armed) {
          state_.armed = true;
          latch_hold();
        }
        return CommandResult::ok();
      case CommandKind::Disarm:
        if (!state_.on_ground && !cmd.emergency) return CommandResult::rejected(Reject::Airborne);
        state_.armed = false;
        setpoint_ = Setpoint{};
        return CommandResult::ok();
      case CommandKind::PositionSetpoint:
      case CommandKind::VelocitySetpoint:
        if (!cmd.target.finite() || !std::isfinite(cmd.speed_limit)) return CommandResult::rejected(Reject::NonFinite);
        if (!state_.armed) return CommandResult::rejected(Reject::NotArmed);
        if (state_.mode != FlightMode::Offboard) return CommandResult::rejected(Reject::ModeNotOffboard);
        setpoint_.kind = cmd.kind;
        setpoint_.target = cmd.target;
        setpoint_.speed_limit = cmd.speed_limit;
        return CommandResult::ok();
      case CommandKind::Hold:
        if (setpoint_.kind != CommandKind::Hold) latch_hold();
        return CommandResult::ok();
    }
    return CommandResult::rejected(Reject::Refused);
  }

  LandingSiteList step(double dt) override {
    if (!(dt > 0.0)) throw Error(Errc::BadParam, "step dt must be > 0");
    const double t0 = state_.time;
    const Vec3 v0 = state_.velocity;

    Vec3 v1 = v0;
    if (state_.armed && state_.battery_fraction > 0.0) {
      Vec3 desired = actuators_stuck(t0) ? stuck_velocity_ : desired_velocity();
      if (!actuators_stuck(t0)) stuck_velocity_ = desired;
      const double alpha = cfg_.tau > 0 ? 1.0 - std::exp(-dt / cfg_.tau) : 1.0;
      v1 = v0 + (desired - v0) * alpha;
      v1 = clamp_norm(v1, cfg_.v_max);
    } else if (!state_.on_ground) {
      // Unpowered: ballistic fall.
      v1 = {v0.x, v0.y, v0.z - cfg_.gravity * dt};
    } else {
      v1 = {};
    }

    Vec3 p = state_.position + (v0 + v1) * (0.5 * dt);
    if (p.z <= 0.0) {
      const double impact = std::min(v0.z, v1.z);
      if (!state_.on_ground && impact < -cfg_.crash_vz) crashed_ = true;
      p.z = 0.0;
      v1.z = std::max(v1.z, 0.0);
      if (!state_.armed) v1 = {};
    }

    if (state_.armed) {
      const double speed = 0.5 * (v0.norm() + v1.norm());
      const double drain = (cfg_.p_hover + cfg_.k_v * speed) * dt / cfg_.e_capacity * drain_multiplier(t0);
      state_.battery_fraction = std::max(0.0, state_.battery_fraction - drain);
    }

    state_.position = p;
    state_.velocity = v1;
    state_.time = t0 + dt;
    state_.on_ground = p.z <= cfg_.ground_epsilon;

    if (fault_active(FaultKind::EstimatorDropout, t0)) {
      confidence_ *= std::exp(-dt / cfg_.confidence_tau);
    } else {
      confidence_ += (1.0 - confidence_) * (1.0 - std::exp(-dt / cfg_.confidence_tau));
    }
    return detect(t0);
  }

  VehicleState state() const override { return state_; }

  HealthSample health() const override {
    HealthSample h;
    h.timestamp = state_.time;
    h.battery_fraction = state_.battery_fraction;
    h.battery_voltage = 13.2 + 3.6 * state_.battery_fraction;
    h.estimator_confidence = confidence_;
    h.actuators_ok = !actuators_stuck(state_.time);
    return h;
  }

  void inject_fault(const FaultInjection& f) override {
    if (f.start < state_.time) throw Error(Errc::BadSchedule, "fault start lies in the past");
    if (f.duration && !(*f.duration > 0.0)) throw Error(Errc::BadSchedule, "fault duration must be > 0");
    if (f.kind == FaultKind::BatteryDrainMultiplier && !(f.factor > 1.0))
      throw Error(Errc::BadSchedule, "drain multiplier must exceed 1");
    faults_.push_back(f);
  }

  void enable_detector(bool on) override { detector_on_ = on; }
  bool detector_enabled() const noexcept { return detector_on_; }
  bool ready() const override { return state_.time >= cfg_.boot_time; }
  bool crashed() const override { return crashed_; }
  double max_speed() const override { return cfg_.v_max; }
  double estimator_confidence() const noexcept { return confidence_; }
  const std::vector<FaultInjection>& faults() const noexcept { return faults_; }

 private:
  struct Setpoint {
    CommandKind kind = CommandKind::Hold;
    Vec3 target;
    double speed_limit = 0.0;
  };

  static Vec3 clamp_norm(Vec3 v, double limit) {
    const double n = v.norm();
    return n > limit && n > 0 ? v * (limit / n) : v;
  }

  void latch_hold() {
    setpoint_.kind = CommandKind::Hold;
    setpoint_.target = state_.position;
    setpoint_.speed_limit = 0.0;
  }

  Vec3 desired_velocity() const {
    if (state_.mode != FlightMode::Offboard && setpoint_.kind != CommandKind::Hold) return {};
    if (setpoint_.kind == CommandKind::VelocitySetpoint) return clamp_norm(setpoint_.target, cfg_.v_max);
    const double limit = setpoint_.speed_limit > 0 ? std::min(setpoint_.speed_limit, cfg_.v_max) : cfg_.v_max;
    return clamp_norm((setpoint_.target - state_.position) * cfg_.position_gain, limit);
  }

  bool fault_active(FaultKind k, double t) const {
    return std::any_of(faults_.begin(), faults_.end(), [&](const auto& f) { return f.kind == k && f.active_at(t); });
  }
  bool actuators_stuck(double t) const { return fault_active(FaultKind::ActuatorStuck, t); }

  double drain_multiplier(double t) const {
    double m = 1.0;
    for (const auto& f : faults_)
      if (f.kind == FaultKind::BatteryDrainMultiplier && f.active_at(t)) m *= f.factor;
    return m;
  }

  LandingSiteList detect(double t0) {
    LandingSiteList out;
    const double period = 1.0 / cfg_.detector_rate;
    if (!detector_on_) {
      next_scan_ = std::nullopt;
      return out;
    }
    if (!next_scan_) next_scan_ = t0 + period;
    while (*next_scan_ <= state_.time + 1e-9) {
      const double when = *next_scan_;
      *next_scan_ += period;
      if (fault_active(FaultKind::DetectorBlind, when) || state_.position.z < cfg_.detector_min_altitude) continue;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> conf(cfg_.site_conf_mean, cfg_.site_conf_sigma);
      const double r = cfg_.detector_footprint * std::sqrt(unit(rng_));
      const double a = 2.0 * M_PI * unit(rng_);
      LandingSite s;
      s.position = {state_.position.x + r * std::cos(a), state_.position.y + r * std::sin(a), 0.0};
      s.confidence = std::clamp(conf(rng_), 0.0, 1.0);
      s.radius = 2.0 + 4.0 * unit(rng_);
      s.detected_at = Timestamp{when};
      out.push_back(s);
    }
    return out;
  }

  PlantConfig cfg_;
  std::mt19937_64 rng_;
  VehicleState state_;
  Setpoint setpoint_;
  Vec3 stuck_velocity_;
  double confidence_ = 1.0;
  bool detector_on_ = false;
  std::optional<double> next_scan_;
  bool crashed_ = false;
  std::vector<FaultInjection> faults_;
};

}  // namespace aeroexec::sim
