#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <random>

#include "aeroexec/sim/connector.hpp"
#include "aeroexec/sim/scripted_backend.hpp"
#include "aeroexec/sim/sim_vehicle.hpp"

using namespace aeroexec;
using namespace aeroexec::sim;

namespace {

constexpr double kDt = 0.02;

PlantConfig airborne_config() {
  PlantConfig c;
  c.home = {0, 0, 10};
  c.allow_air_arm = true;
  c.boot_time = 0.0;
  return c;
}

void arm_offboard(VehicleBackend& v) {
  ASSERT_TRUE(v.apply_command(VehicleCommand::set_mode(FlightMode::Offboard)));
  ASSERT_TRUE(v.apply_command(VehicleCommand::arm()));
}

void run(VehicleBackend& v, double seconds) {
  const int n = static_cast<int>(std::lround(seconds / kDt));
  for (int i = 0; i < n; ++i) v.step(kDt);
}

}  // namespace

TEST(SimVehicle, HoverDrainIsClosedForm) {
  auto c = airborne_config();
  c.e_capacity = 1000.0;
  SimVehicle v(c);
  arm_offboard(v);
  v.apply_command(VehicleCommand::hold());
  run(v, 10.0);
  EXPECT_NEAR(v.state().battery_fraction, 1.0 - 0.01, 1e-12);
  EXPECT_NEAR(v.state().position.z, 10.0, 1e-12);
}

TEST(SimVehicle, VelocityTrackingKinematics) {
  auto c = airborne_config();
  c.tau = 0.05;
  SimVehicle v(c);
  arm_offboard(v);
  v.apply_command(VehicleCommand::velocity({1, 0, 0}));
  run(v, 10.0);
  EXPECT_NEAR(v.state().position.x, 10.0, 0.2);
}

TEST(SimVehicle, EstimatorDropoutDecaysExponentially) {
  SimVehicle v(airborne_config());
  v.inject_fault({FaultKind::EstimatorDropout, 5.0, std::nullopt});
  const double crossing = 5.0 + std::log(1.0 / 0.3);  // conf = exp(-(t-5)/tau)
  double seen = -1;
  for (int i = 0; i < 500 && seen < 0; ++i) {
    v.step(kDt);
    if (v.health().estimator_confidence < 0.3) seen = v.state().time;
  }
  EXPECT_NEAR(seen, crossing, kDt);
}

TEST(SimVehicle, CommandInterlocks) {
  SimVehicle ground(PlantConfig{.boot_time = 0.0});
  auto r = ground.apply_command(VehicleCommand::arm());
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, Reject::ModeNotOffboard);
  r = ground.apply_command(VehicleCommand::position({0, 0, 5}));
  EXPECT_EQ(r.reason, Reject::NotArmed);

  SimVehicle air(airborne_config());
  arm_offboard(air);
  r = air.apply_command(VehicleCommand::disarm());
  EXPECT_EQ(r.reason, Reject::Airborne);
  EXPECT_TRUE(air.apply_command(VehicleCommand::disarm(true)));

  SimVehicle booting;
  booting.apply_command(VehicleCommand::set_mode(FlightMode::Offboard));
  EXPECT_EQ(booting.apply_command(VehicleCommand::arm()).reason, Reject::NotReady);
}

TEST(SimVehicle, DrainMultiplierDepletesFaster) {
  SimVehicle base(airborne_config()), faulty(airborne_config());
  arm_offboard(base);
  arm_offboard(faulty);
  faulty.inject_fault({FaultKind::BatteryDrainMultiplier, 0.0, std::nullopt, 5.0});
  run(base, 20);
  run(faulty, 20);
  EXPECT_NEAR(1.0 - faulty.state().battery_fraction, 5.0 * (1.0 - base.state().battery_fraction), 1e-9);
  EXPECT_THROW(faulty.inject_fault({FaultKind::BatteryDrainMultiplier, 30.0, std::nullopt, 0.5}), Error);
}

TEST(SimVehicle, DetectorRateAndBlindness) {
  SimVehicle v(airborne_config(), 9);
  arm_offboard(v);
  v.enable_detector(true);
  LandingSiteList sites;
  for (int i = 0; i < 500; ++i) {
    auto s = v.step(kDt);
    sites.insert(sites.end(), s.begin(), s.end());
  }
  EXPECT_EQ(sites.size(), 10u);
  for (const auto& s : sites) {
    EXPECT_LE(horizontal_distance(s.position, v.state().position), 20.0 + 1e-9);
    EXPECT_GE(s.confidence, 0.0);
    EXPECT_LE(s.confidence, 1.0);
  }
  v.inject_fault({FaultKind::DetectorBlind, v.state().time, std::nullopt});
  int blind = 0;
  for (int i = 0; i < 500; ++i) blind += static_cast<int>(v.step(kDt).size());
  EXPECT_EQ(blind, 0);
}

TEST(SimVehicle, PastFaultIsBadSchedule) {
  SimVehicle v(airborne_config());
  run(v, 1.0);
  try {
    v.inject_fault({FaultKind::DetectorBlind, 0.5, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadSchedule);
  }
}

TEST(SimVehicle, EnergyBookkeepingMatchesTrapezoid) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-40, 40);
  auto c = airborne_config();
  SimVehicle v(c);
  arm_offboard(v);
  double energy = 0;
  double prev_speed = 0;
  for (int leg = 0; leg < 20; ++leg) {
    v.apply_command(VehicleCommand::position({u(rng), u(rng), 10 + u(rng) / 8}));
    for (int i = 0; i < 400; ++i) {
      v.step(kDt);
      double speed = v.state().velocity.norm();
      energy += (c.p_hover + c.k_v * 0.5 * (prev_speed + speed)) * kDt;
      prev_speed = speed;
    }
  }
  const double expected = 1.0 - energy / c.e_capacity;
  EXPECT_NEAR(v.state().battery_fraction, expected, 0.001 * expected);
}

TEST(SimVehicle, SeededRunsAreBitwiseIdenticalAndNeverTeleport) {
  auto trace = [](std::uint64_t seed) {
    SimVehicle v(airborne_config(), seed);
    arm_offboard(v);
    v.enable_detector(true);
    std::vector<double> out;
    Vec3 last = v.state().position;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 3000; ++i) {
      if (i % 300 == 0) v.apply_command(VehicleCommand::position({double(rng() % 90), double(rng() % 90), 12}));
      for (const auto& s : v.step(kDt)) out.push_back(s.confidence);
      auto p = v.state().position;
      EXPECT_LE(distance(p, last), v.config().v_max * kDt + 1e-9);
      last = p;
      out.push_back(p.x);
      out.push_back(p.y);
      out.push_back(v.state().battery_fraction);
    }
    return out;
  };
  auto a = trace(5), b = trace(5);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), a.size() * sizeof(double)));
}

TEST(SimVehicle, HardImpactIsACrash) {
  SimVehicle v(airborne_config());
  arm_offboard(v);
  v.apply_command(VehicleCommand::disarm(true));
  run(v, 3.0);
  EXPECT_TRUE(v.crashed());

  SimVehicle soft(airborne_config());
  arm_offboard(soft);
  soft.apply_command(VehicleCommand::velocity({0, 0, -0.5}));
  run(soft, 25.0);
  EXPECT_TRUE(soft.state().on_ground);
  EXPECT_FALSE(soft.crashed());
}

TEST(Connector, SingleSessionAtATime) {
  SimVehicle v;
  Connector c(v);
  {
    auto s = c.bind();
    EXPECT_TRUE(s.bound());
    try {
      c.bind();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::AlreadyBound);
    }
  }
  EXPECT_FALSE(c.bound());
  auto again = c.bind();
  EXPECT_TRUE(again.bound());
}

// Contract suite: every backend honors the same command/telemetry rules.
template <class B>
class BackendContract : public ::testing::Test {
 protected:
  std::unique_ptr<VehicleBackend> make() {
    if constexpr (std::is_same_v<B, SimVehicle>) {
      return std::make_unique<SimVehicle>(PlantConfig{.boot_time = 0.0});
    } else {
      return std::make_unique<ScriptedBackend>();
    }
  }
};

using Backends = ::testing::Types<SimVehicle, ScriptedBackend>;
TYPED_TEST_SUITE(BackendContract, Backends);

TYPED_TEST(BackendContract, ArmNeedsOffboard) {
  auto v = this->make();
  EXPECT_EQ(v->apply_command(VehicleCommand::arm()).reason, Reject::ModeNotOffboard);
  EXPECT_TRUE(v->apply_command(VehicleCommand::set_mode(FlightMode::Offboard)));
  EXPECT_TRUE(v->apply_command(VehicleCommand::arm()));
  EXPECT_TRUE(v->state().armed);
}

TYPED_TEST(BackendContract, SetpointsNeedArming) {
  auto v = this->make();
  v->apply_command(VehicleCommand::set_mode(FlightMode::Offboard));
  EXPECT_EQ(v->apply_command(VehicleCommand::position({0, 0, 5})).reason, Reject::NotArmed);
  EXPECT_EQ(v->apply_command(VehicleCommand::velocity({0, 0, 1})).reason, Reject::NotArmed);
}

TYPED_TEST(BackendContract, ClimbThenAirborneDisarmRefused) {
  auto v = this->make();
  v->apply_command(VehicleCommand::set_mode(FlightMode::Offboard));
  v->apply_command(VehicleCommand::arm());
  EXPECT_TRUE(v->apply_command(VehicleCommand::position({0, 0, 5})));
  double battery = v->state().battery_fraction;
  Vec3 last = v->state().position;
  for (int i = 0; i < 500; ++i) {
    v->step(kDt);
    EXPECT_LE(v->state().battery_fraction, battery);
    battery = v->state().battery_fraction;
    EXPECT_LE(distance(v->state().position, last), v->max_speed() * kDt + 1e-9);
    last = v->state().position;
  }
  EXPECT_NEAR(v->state().position.z, 5.0, 0.1);
  EXPECT_FALSE(v->state().on_ground);
  EXPECT_EQ(v->apply_command(VehicleCommand::disarm()).reason, Reject::Airborne);
  EXPECT_FALSE(v->crashed());
}

TYPED_TEST(BackendContract, ConnectorSessionForwards) {
  auto v = this->make();
  Connector c(*v);
  auto s = c.bind();
  EXPECT_TRUE(s.ready());
  EXPECT_TRUE(s.send(VehicleCommand::set_mode(FlightMode::Offboard)));
  EXPECT_EQ(s.state().mode, FlightMode::Offboard);
}

TEST(ScriptedBackend, RefusesScriptedCommands) {
  ScriptedBackend b({.refuse = {CommandKind::Arm}});
  b.apply_command(VehicleCommand::set_mode(FlightMode::Offboard));
  EXPECT_EQ(b.apply_command(VehicleCommand::arm()).reason, Reject::Refused);
  EXPECT_FALSE(b.state().armed);
}
