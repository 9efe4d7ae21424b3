#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "aeroexec/core/error.hpp"
#include "aeroexec/core/json.hpp"
#include "aeroexec/core/types.hpp"
#include "aeroexec/fsm/event.hpp"

namespace aeroexec::healthguard {

struct ThresholdConfig {
  double battery_low = 0.30;
  double battery_critical = 0.15;
  double battery_emergency = 0.07;
  double estimator_floor = 0.30;
  int debounce_n = 3;
  double hysteresis = 0.02;
  double rate_hz = 10.0;

  void validate() const {
    if (!(0.0 < battery_emergency && battery_emergency < battery_critical && battery_critical < battery_low &&
          battery_low < 1.0))
      throw Error(Errc::BadThresholdOrder, "battery thresholds must satisfy 0 < emergency < critical < low < 1");
    if (debounce_n < 1) throw Error(Errc::BadThresholdOrder, "debounce_n must be >= 1");
    if (!(estimator_floor > 0.0 && estimator_floor < 1.0))
      throw Error(Errc::BadThresholdOrder, "estimator_floor must lie in (0, 1)");
    if (!(hysteresis >= 0.0)) throw Error(Errc::BadThresholdOrder, "hysteresis must be >= 0");
    if (!(rate_hz > 0.0)) throw Error(Errc::BadThresholdOrder, "rate_hz must be > 0");
  }

  static ThresholdConfig from_json(const json& j) {
    ThresholdConfig c;
    if (!j.is_object()) throw Error(Errc::BadConfig, "healthguard section must be an object", "healthguard");
    for (const auto& [k, v] : j.items()) {
      if (k == "debounce_n") {
        if (!v.is_number_integer()) throw Error(Errc::BadConfig, "healthguard.debounce_n must be an integer", "healthguard.debounce_n");
        c.debounce_n = v.get<int>();
        continue;
      }
      if (!v.is_number()) throw Error(Errc::BadConfig, "healthguard." + k + " must be a number", "healthguard." + k);
      const double x = v.get<double>();
      if (k == "battery_low") c.battery_low = x;
      else if (k == "battery_critical") c.battery_critical = x;
      else if (k == "battery_emergency") c.battery_emergency = x;
      else if (k == "estimator_floor") c.estimator_floor = x;
      else if (k == "hysteresis") c.hysteresis = x;
      else if (k == "rate_hz") c.rate_hz = x;
      else throw Error(Errc::BadConfig, "unknown healthguard key '" + k + "'", "healthguard." + k);
    }
    c.validate();
    return c;
  }
};

struct HealthEvent {
  double t = 0.0;
  std::string event;
  double trigger_value = 0.0;
  friend bool operator==(const HealthEvent&, const HealthEvent&) = default;
};

inline json to_json_value(const HealthEvent& e) { return json{{"t", e.t}, {"event", e.event}, {"trigger_value", e.trigger_value}}; }

/// Threshold monitor turning health samples into external events. Each monitor
/// debounces over consecutive samples and latches until the signal recovers past
/// threshold + hysteresis.
class Healthguard {
 public:
  explicit Healthguard(ThresholdConfig cfg = {}) { configure(cfg); }

  void configure(const ThresholdConfig& cfg) {
    cfg.validate();
    cfg_ = cfg;
    monitors_ = {};
  }

  const ThresholdConfig& config() const noexcept { return cfg_; }

  std::vector<HealthEvent> ingest(const HealthSample& s) {
    if (last_t_ && !(s.timestamp > *last_t_))
      throw Error(Errc::NonMonotonicTimestamp, "health sample at t=" + std::to_string(s.timestamp) +
                                                   " does not follow t=" + std::to_string(*last_t_));
    last_t_ = s.timestamp;
    std::vector<HealthEvent> out;
    auto threshold = [&](Slot slot, std::string_view name, double value, double limit) {
      step(monitors_[slot], name, value, value < limit, value >= limit + cfg_.hysteresis, s.timestamp, out);
    };
    // Escalation order within one sample: least severe first.
    threshold(kLow, fsm::events::BatteryLow, s.battery_fraction, cfg_.battery_low);
    threshold(kCritical, fsm::events::BatteryCritical, s.battery_fraction, cfg_.battery_critical);
    threshold(kEmergency, fsm::events::EmergencyBattery, s.battery_fraction, cfg_.battery_emergency);
    threshold(kEstimator, fsm::events::StateEstimatorFailure, s.estimator_confidence, cfg_.estimator_floor);
    const bool no_sites = s.site_required && s.landing_sites_cached == 0;
    step(monitors_[kSites], fsm::events::NoLandingSitesFound, s.landing_sites_cached, no_sites, !no_sites, s.timestamp,
         out);
    log_.insert(log_.end(), out.begin(), out.end());
    return out;
  }

  const std::vector<HealthEvent>& log() const noexcept { return log_; }
  bool latched(std::string_view event) const {
    for (std::size_t i = 0; i < kNames.size(); ++i)
      if (kNames[i] == event) return monitors_[i].latched;
    return false;
  }

 private:
  enum Slot { kLow, kCritical, kEmergency, kEstimator, kSites, kSlots };
  static constexpr std::array<std::string_view, kSlots> kNames = {
      fsm::events::BatteryLow, fsm::events::BatteryCritical, fsm::events::EmergencyBattery,
      fsm::events::StateEstimatorFailure, fsm::events::NoLandingSitesFound};

  struct Monitor {
    int count = 0;
    bool latched = false;
  };

  void step(Monitor& m, std::string_view name, double value, bool violated, bool recovered, double t,
            std::vector<HealthEvent>& out) const {
    m.count = violated ? m.count + 1 : 0;
    if (m.latched) {
      if (recovered) m.latched = false;
      return;
    }
    if (m.count >= cfg_.debounce_n) {
      m.latched = true;
      out.push_back({t, std::string(name), value});
    }
  }

  ThresholdConfig cfg_;
  std::array<Monitor, kSlots> monitors_{};
  std::optional<double> last_t_;
  std::vector<HealthEvent> log_;
};

// ---- detection accuracy ----

struct InjectedFault {
  double t = 0.0;  // ground-truth onset
  std::string event;
};

struct AccuracyReport {
  std::size_t injected = 0;
  std::size_t detected = 0;
  std::size_t emitted = 0;
  std::size_t false_positives = 0;
  double true_positive_rate = 0.0;
  double false_positive_rate = 0.0;  // false positives / emitted events
  double mean_latency = 0.0;
};

/// Matches each injected fault to the earliest unused emitted event of the same
/// name in [t, t + tolerance]. An emitted event is a false positive when no
/// injected fault of its name lies in [t - tolerance, t].
inline AccuracyReport measure_accuracy(std::vector<InjectedFault> injected, const std::vector<HealthEvent>& emitted,
                                       double tolerance) {
  std::sort(injected.begin(), injected.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  std::vector<std::size_t> order(emitted.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return emitted[a].t < emitted[b].t; });

  AccuracyReport r;
  r.injected = injected.size();
  r.emitted = emitted.size();
  std::vector<bool> used(emitted.size(), false);
  double latency_sum = 0.0;
  constexpr double eps = 1e-9;
  for (const auto& f : injected) {
    for (auto i : order) {
      const auto& e = emitted[i];
      if (used[i] || e.event != f.event) continue;
      if (e.t + eps < f.t) continue;
      if (e.t > f.t + tolerance + eps) break;
      used[i] = true;
      ++r.detected;
      latency_sum += e.t - f.t;
      break;
    }
  }
  for (const auto& e : emitted) {
    bool explained = std::any_of(injected.begin(), injected.end(), [&](const auto& f) {
      return f.event == e.event && f.t <= e.t + eps && e.t <= f.t + tolerance + eps;
    });
    if (!explained) ++r.false_positives;
  }
  r.true_positive_rate = r.injected ? double(r.detected) / double(r.injected) : 0.0;
  r.false_positive_rate = r.emitted ? double(r.false_positives) / double(r.emitted) : 0.0;
  r.mean_latency = r.detected ? latency_sum / double(r.detected) : 0.0;
  return r;
}

}  // namespace aeroexec::healthguard
