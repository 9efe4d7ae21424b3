#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "aeroexec/healthguard/healthguard.hpp"

namespace aeroexec::healthguard {

/// A generated health stream with known threshold crossings.
struct SyntheticStream {
  std::vector<HealthSample> clean;
  std::vector<HealthSample> noisy;
  std::vector<InjectedFault> truth;  // downward crossings of the clean signals
};

/// Builds excursions of the battery and estimator signals below their thresholds
/// until at least `min_crossings` crossings exist. `sigma` is additive Gaussian
/// noise on both signals (their range is [0, 1]).
inline SyntheticStream synthetic_crossings(std::uint64_t seed, std::size_t min_crossings, double sigma,
                                           const ThresholdConfig& cfg = {}) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::normal_distribution<double> noise(0.0, sigma);
  const double dt = 1.0 / cfg.rate_hz;

  SyntheticStream out;
  double t = 0.0;
  double battery = 0.45, confidence = 0.95;
  auto emit = [&] {
    t += dt;
    HealthSample s;
    s.timestamp = t;
    s.battery_fraction = battery;
    s.estimator_confidence = confidence;
    out.clean.push_back(s);
    s.battery_fraction = std::clamp(battery + noise(rng), 0.0, 1.0);
    s.estimator_confidence = std::clamp(confidence + noise(rng), 0.0, 1.0);
    out.noisy.push_back(s);
  };
  auto hold = [&](double seconds) {
    for (double e = 0; e < seconds; e += dt) emit();
  };
  auto ramp = [&](double& signal, double target, double slope) {
    const double dir = target < signal ? -1.0 : 1.0;
    while ((target - signal) * dir > 0) {
      signal += dir * std::min(slope * dt, std::abs(target - signal));
      emit();
    }
  };

  auto count_crossings = [&](std::size_t from) {
    const std::pair<double, std::string_view> battery_thresholds[] = {{cfg.battery_low, fsm::events::BatteryLow},
                                                                      {cfg.battery_critical, fsm::events::BatteryCritical},
                                                                      {cfg.battery_emergency, fsm::events::EmergencyBattery}};
    for (std::size_t i = std::max<std::size_t>(from, 1); i < out.clean.size(); ++i) {
      const auto& a = out.clean[i - 1];
      const auto& b = out.clean[i];
      for (auto [thr, name] : battery_thresholds)
        if (a.battery_fraction >= thr && b.battery_fraction < thr) out.truth.push_back({b.timestamp, std::string(name)});
      if (a.estimator_confidence >= cfg.estimator_floor && b.estimator_confidence < cfg.estimator_floor)
        out.truth.push_back({b.timestamp, std::string(fsm::events::StateEstimatorFailure)});
    }
  };

  hold(2.0);
  while (out.truth.size() < min_crossings) {
    const std::size_t first = out.clean.size();
    const double slope = uni(0.05, 0.2);
    switch (rng() % 4) {
      case 0: ramp(battery, uni(cfg.battery_critical + 0.03, cfg.battery_low - 0.05), slope); break;
      case 1: ramp(battery, uni(cfg.battery_emergency + 0.03, cfg.battery_critical - 0.03), slope); break;
      case 2: ramp(battery, uni(0.0, cfg.battery_emergency - 0.03), slope); break;
      default: ramp(confidence, uni(0.05, cfg.estimator_floor - 0.05), slope); break;
    }
    hold(uni(2.0, 4.0));
    ramp(battery, 0.45, slope);
    ramp(confidence, 0.95, slope);
    hold(uni(1.5, 3.0));
    count_crossings(first);
  }
  return out;
}

}  // namespace aeroexec::healthguard
