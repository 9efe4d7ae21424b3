#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "aeroexec/montecarlo/trial.hpp"

namespace aeroexec::montecarlo {

/// Ranges for randomized trials. Every draw for a trial comes from an RNG
/// seeded by that trial's seed alone.
struct GeneratorParams {
  int min_waypoints = 5;
  int max_waypoints = 15;
  double min_distance = 200.0;
  double max_distance = 1200.0;
  double cruise_altitude = 10.0;
  double science_probability = 0.4;
  double min_science_s = 2.0;
  double max_science_s = 6.0;
  double min_battery = 0.8;  // initial charge
  double max_battery = 1.0;
  // Battery degradation: a permanent drain multiplier that starts during Mission.
  double degradation_probability = 0.6;
  double min_drain_factor = 1.0;
  double max_drain_factor = 2.5;
  double max_degradation_onset = 60.0;  // s after Mission entry
  // Estimator degradation: short dropouts the healthguard must ride through,
  // plus rare long ones that it must not.
  double dropout_rate = 0.02;         // per second of Mission
  double min_dropout_s = 0.3;
  double max_dropout_s = 0.9;
  double failure_rate = 0.0001;       // long dropouts per second of Mission
  double failure_duration_s = 3.0;

  static GeneratorParams from_json(const json& j) {
    GeneratorParams g;
    if (!j.is_object()) throw Error(Errc::BadConfig, "generator must be an object", "generator");
    auto num = [&](const char* k, double& out) {
      if (!j.contains(k)) return;
      if (!j[k].is_number()) throw Error(Errc::BadConfig, std::string("generator.") + k + " must be a number", k);
      out = j[k].get<double>();
    };
    auto integer = [&](const char* k, int& out) {
      if (!j.contains(k)) return;
      if (!j[k].is_number_integer()) throw Error(Errc::BadConfig, std::string("generator.") + k + " must be an integer", k);
      out = j[k].get<int>();
    };
    integer("min_waypoints", g.min_waypoints);
    integer("max_waypoints", g.max_waypoints);
    num("min_distance", g.min_distance);
    num("max_distance", g.max_distance);
    num("cruise_altitude", g.cruise_altitude);
    num("science_probability", g.science_probability);
    num("min_science_s", g.min_science_s);
    num("max_science_s", g.max_science_s);
    num("min_battery", g.min_battery);
    num("max_battery", g.max_battery);
    num("degradation_probability", g.degradation_probability);
    num("min_drain_factor", g.min_drain_factor);
    num("max_drain_factor", g.max_drain_factor);
    num("max_degradation_onset", g.max_degradation_onset);
    num("dropout_rate", g.dropout_rate);
    num("min_dropout_s", g.min_dropout_s);
    num("max_dropout_s", g.max_dropout_s);
    num("failure_rate", g.failure_rate);
    num("failure_duration_s", g.failure_duration_s);
    g.validate();
    return g;
  }

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(Errc::BadConfig, "generator: " + m, "generator"); };
    if (min_waypoints < 2 || max_waypoints < min_waypoints) bad("waypoint range must satisfy 2 <= min <= max");
    if (!(min_distance > 0) || max_distance < min_distance) bad("distance range must satisfy 0 < min <= max");
    if (!(cruise_altitude > 0)) bad("cruise_altitude must be > 0");
    if (min_battery <= 0 || max_battery > 1 || max_battery < min_battery) bad("battery range must lie in (0, 1]");
    if (min_drain_factor < 1 || max_drain_factor < min_drain_factor) bad("drain factors must satisfy 1 <= min <= max");
    if (min_dropout_s <= 0 || max_dropout_s < min_dropout_s) bad("dropout durations must satisfy 0 < min <= max");
    if (dropout_rate < 0 || failure_rate < 0) bad("rates must be >= 0");
  }
};

inline std::mt19937_64 trial_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d6f6e74u};
  return std::mt19937_64(seq);
}

/// A plan whose waypoint polyline has exactly `length` meters, starting above home.
inline mission::MissionPlan random_plan(std::mt19937_64& rng, int waypoints, double length, const GeneratorParams& g,
                                        const Vec3& home = {}) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  mission::MissionPlan plan;
  plan.cruise_altitude = g.cruise_altitude;
  const double z = home.z + g.cruise_altitude;

  std::vector<double> legs(static_cast<std::size_t>(waypoints - 1));
  double sum = 0.0;
  for (auto& l : legs) sum += (l = uni(0.5, 1.5));
  for (auto& l : legs) l *= length / sum;

  Vec3 p{home.x, home.y, z};
  double heading = uni(0.0, 2.0 * std::numbers::pi);
  plan.waypoints.push_back({"wp0", p, std::nullopt, {}});
  for (std::size_t i = 0; i < legs.size(); ++i) {
    heading += uni(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    p = {p.x + legs[i] * std::cos(heading), p.y + legs[i] * std::sin(heading), z};
    mission::Waypoint wp{"wp" + std::to_string(i + 1), p, std::nullopt, {}};
    const bool last = i + 1 == legs.size();
    if (last) {
      wp.tasks.emplace_back(mission::LandingSiteSearchTask{20.0, 0.6});
    } else if (uni(0.0, 1.0) < g.science_probability) {
      wp.tasks.emplace_back(mission::ScienceTask{uni(g.min_science_s, g.max_science_s), "sample" + std::to_string(i + 1)});
    }
    plan.waypoints.push_back(std::move(wp));
  }
  return plan;
}

/// Draws plan, initial charge and fault schedule for one trial.
inline TrialSpec random_trial(std::uint64_t seed, const GeneratorParams& g, const coordinator::RunConfig& base) {
  auto rng = trial_rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto chance = [&](double p) { return uni(0.0, 1.0) < p; };

  TrialSpec spec;
  spec.seed = seed;
  spec.config = base;
  auto& cfg = spec.config;
  const int n = std::uniform_int_distribution<int>(g.min_waypoints, g.max_waypoints)(rng);
  const double length = uni(g.min_distance, g.max_distance);
  cfg.plan = random_plan(rng, n, length, g, cfg.vehicle.home);
  cfg.vehicle.initial_battery = uni(g.min_battery, g.max_battery);
  cfg.faults.clear();
  cfg.events.clear();

  const double horizon = coordinator::estimate_mission_time(cfg.plan, cfg.vehicle, cfg.behaviors);
  if (chance(g.degradation_probability)) {
    sim::FaultInjection f;
    f.kind = sim::FaultKind::BatteryDrainMultiplier;
    f.start = uni(0.0, std::min(g.max_degradation_onset, horizon));
    f.factor = uni(g.min_drain_factor, g.max_drain_factor);
    cfg.faults.push_back({f, fsm::MissionState::Mission});
  }
  // Poisson arrivals over the expected Mission time. Consecutive dropouts are
  // separated by a recovery gap so short ones never merge into a long one.
  constexpr double recovery_gap = 3.0;
  std::vector<sim::FaultInjection> failures, dropouts;
  auto arrivals = [&](double rate, double lo, double hi, std::vector<sim::FaultInjection>& out) {
    if (rate <= 0) return;
    std::exponential_distribution<double> gap(rate);
    for (double t = gap(rng); t < horizon;) {
      sim::FaultInjection f;
      f.kind = sim::FaultKind::EstimatorDropout;
      f.start = t;
      f.duration = lo == hi ? lo : uni(lo, hi);
      out.push_back(f);
      t = f.start + *f.duration + recovery_gap + gap(rng);
    }
  };
  arrivals(g.failure_rate, g.failure_duration_s, g.failure_duration_s, failures);
  arrivals(g.dropout_rate, g.min_dropout_s, g.max_dropout_s, dropouts);
  auto clear_of = [&](const sim::FaultInjection& d) {
    for (const auto& f : failures)
      if (d.start < f.start + *f.duration + recovery_gap && f.start < d.start + *d.duration + recovery_gap) return false;
    return true;
  };
  for (const auto& f : failures) cfg.faults.push_back({f, fsm::MissionState::Mission});
  for (const auto& d : dropouts)
    if (clear_of(d)) cfg.faults.push_back({d, fsm::MissionState::Mission});
  return spec;
}

}  // namespace aeroexec::montecarlo
