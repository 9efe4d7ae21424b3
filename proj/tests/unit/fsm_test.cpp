#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "aeroexec/fsm/state_machine.hpp"
#include "support/table_oracle.hpp"

using namespace aeroexec;
using namespace aeroexec::fsm;
using enum MissionState;

namespace {

std::set<MissionState> as_set(const std::vector<MissionState>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Dispatch, NominalSuccessAdvances) {
  auto t = TransitionTable::canonical();
  auto r = dispatch(Mission, events::BtSuccess, t);
  EXPECT_EQ(r.next, Land);
  EXPECT_TRUE(r.transitioned);
}

TEST(Dispatch, BatteryCriticalInMissionEmergencyLands) {
  auto r = dispatch(Mission, events::BatteryCritical, TransitionTable::canonical());
  EXPECT_EQ(r.next, EmergencyLand);
  EXPECT_TRUE(r.transitioned);
}

TEST(Dispatch, UnmappedEventIsSelfTransition) {
  auto r = dispatch(Takeoff, "Unmapped", TransitionTable::canonical());
  EXPECT_EQ(r.next, Takeoff);
  EXPECT_FALSE(r.transitioned);
}

TEST(Dispatch, BatteryLowInMissionLands) {
  auto r = dispatch(Mission, events::BatteryLow, TransitionTable::canonical());
  EXPECT_EQ(r.next, Land);
  EXPECT_TRUE(r.transitioned);
}

TEST(Dispatch, ExplicitSelfRows) {
  auto t = TransitionTable::canonical();
  auto absorbed = dispatch(Land, events::BatteryLow, t);
  EXPECT_EQ(absorbed.next, Land);
  EXPECT_FALSE(absorbed.transitioned);
  auto reentry = dispatch(Land, events::NoLandingSitesFound, t);
  EXPECT_EQ(reentry.next, Land);
  EXPECT_TRUE(reentry.transitioned);
  EXPECT_TRUE(reentry.reenter);
}

TEST(Dispatch, DecidedRows) {
  auto t = TransitionTable::canonical();
  EXPECT_EQ(dispatch(Idle, events::Start, t).next, Init);
  EXPECT_EQ(dispatch(Idle, events::BtSuccess, t).next, Idle);
  EXPECT_EQ(dispatch(Idle, events::BatteryCritical, t).next, Idle);
  EXPECT_EQ(dispatch(Init, events::BtFailure, t).next, Terminate);
  EXPECT_EQ(dispatch(PreChecks, events::BtFailure, t).next, Terminate);
  EXPECT_EQ(dispatch(Takeoff, events::BtFailure, t).next, EmergencyLand);
  EXPECT_EQ(dispatch(EmergencyLand, events::BtFailure, t).next, Terminate);
  EXPECT_EQ(dispatch(Takeoff, events::BatteryLow, t).next, Land);
  EXPECT_EQ(dispatch(Init, events::StateEstimatorFailure, t).next, EmergencyLand);
  EXPECT_EQ(dispatch(PreChecks, events::EmergencyBattery, t).next, EmergencyLand);
  EXPECT_EQ(dispatch(Land, events::LandingSiteChecks, t).next, EmergencyLand);
  EXPECT_EQ(dispatch(Mission, events::LandingSiteChecks, t).next, Mission);
  EXPECT_EQ(dispatch(EmergencyLand, events::BatteryCritical, t).next, EmergencyLand);
}

TEST(Dispatch, TotalAndReferentiallyTransparent) {
  auto t = TransitionTable::canonical();
  std::mt19937_64 rng(5);
  std::vector<std::string> names = {"BtSuccess", "BtFailure", "BatteryLow", "Zap", "", "Start", "LandingSiteChecks"};
  std::uniform_int_distribution<int> chr('A', 'z');
  for (int i = 0; i < 5000; ++i) {
    std::string ev;
    if (i % 2) {
      ev = names[i % names.size()];
    } else {
      for (int k = 0; k < 6; ++k) ev.push_back(static_cast<char>(chr(rng)));
    }
    auto s = kAllStates[rng() % kAllStates.size()];
    auto a = dispatch(s, ev, t);
    auto b = dispatch(s, ev, t);
    EXPECT_EQ(a.next, b.next);
    EXPECT_EQ(a.transitioned, b.transitioned);
    if (!t.find(s, ev)) EXPECT_EQ(a.next, s);
  }
}

TEST(Validate, CanonicalTablePasses) {
  auto t = TransitionTable::canonical();
  auto oracle = testing_support::table_oracle(t);
  ASSERT_TRUE(oracle.unreachable.empty());
  ASSERT_TRUE(oracle.no_path.empty());
  auto report = validate_table(t, Idle);
  EXPECT_TRUE(report.pass);
  EXPECT_TRUE(report.unreachable.empty());
  EXPECT_TRUE(report.no_path.empty());
}

TEST(Validate, UnreachablePreChecks) {
  auto t = testing_support::table_without_prechecks_entry();
  auto oracle = testing_support::table_oracle(t);
  ASSERT_EQ(oracle.unreachable, (std::set<MissionState>{PreChecks}));
  auto report = validate_table(t, Idle);
  EXPECT_FALSE(report.pass);
  EXPECT_EQ(as_set(report.unreachable), oracle.unreachable);
  EXPECT_EQ(as_set(report.no_path), oracle.no_path);
}

TEST(Validate, EmergencyLandWithoutFinalPath) {
  auto t = testing_support::table_without_emergency_exit();
  auto oracle = testing_support::table_oracle(t);
  ASSERT_EQ(oracle.no_path, (std::set<MissionState>{EmergencyLand}));
  auto report = validate_table(t, Idle);
  EXPECT_FALSE(report.pass);
  EXPECT_EQ(as_set(report.no_path), oracle.no_path);
  EXPECT_TRUE(report.unreachable.empty());
}

TEST(Validate, RandomTablesMatchOracleAndAreSound) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  int passing = 0;
  for (int c = 0; c < 3000; ++c) {
    TransitionTable t(kAllStates[rng() % 8], {kAllStates[rng() % 8]});
    if (rng() % 3 == 0) t.set_finals({kAllStates[rng() % 8], Terminate});
    const int rows = static_cast<int>(rng() % 24);
    for (int r = 0; r < rows; ++r)
      t.add(kAllStates[rng() % 8], alphabet[rng() % alphabet.size()], kAllStates[rng() % 8], rng() % 5 == 0);
    auto report = validate_table(t);
    auto oracle = testing_support::table_oracle(t);
    ASSERT_EQ(as_set(report.unreachable), oracle.unreachable);
    ASSERT_EQ(as_set(report.no_path), oracle.no_path);
    if (!report.pass) continue;
    ++passing;
    // Soundness: exhaustive search over event sequences from every state.
    for (auto s : kAllStates) {
      std::set<MissionState> seen{s};
      std::vector<MissionState> stack{s};
      bool found = t.is_final(s);
      while (!stack.empty() && !found) {
        auto u = stack.back();
        stack.pop_back();
        for (const auto& ev : alphabet) {
          auto v = dispatch(u, ev, t).next;
          if (t.is_final(v)) found = true;
          if (seen.insert(v).second) stack.push_back(v);
        }
      }
      ASSERT_TRUE(found) << "state " << to_string(s) << " has no event path to a final state";
    }
  }
  EXPECT_GT(passing, 10);
}

TEST(TableJson, RoundTripAndSchemaErrors) {
  auto t = TransitionTable::canonical();
  auto back = TransitionTable::from_json(t.to_json());
  EXPECT_EQ(back.to_json(), t.to_json());
  EXPECT_TRUE(back.find(Land, events::NoLandingSitesFound)->reenter);

  json bad = t.to_json();
  bad["rows"][3]["to"] = "Orbit";
  try {
    TransitionTable::from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaError);
    EXPECT_EQ(e.path(), "rows[3].to");
  }
}

namespace {

struct Machine {
  bt::NodeRegistry registry;
  bt::Blackboard bb;
  std::vector<std::string> trace;
  int land_ticks = 0;

  Machine() {
    registry.register_action("Work", [](bt::LeafContext& ctx) {
      return ctx.elapsed() >= 1.0 ? bt::NodeStatus::Success : bt::NodeStatus::Running;
    });
    registry.register_action("LandWork", [this](bt::LeafContext& ctx) {
      trace.push_back(ctx.first_tick ? "land:first" : "land:tick");
      ++land_ticks;
      return bt::NodeStatus::Running;
    }, [this] { trace.push_back("land:halt"); });
  }
};

}  // namespace

TEST(BindState, FinalStateRejected) {
  Machine m;
  StateMachine sm(TransitionTable::canonical(), m.registry, m.bb);
  try {
    sm.bind_state(Terminate, bt::spec::action("w", "Work"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BindToFinal);
  }
}

TEST(BindState, StructuralViolationPropagates) {
  Machine m;
  StateMachine sm(TransitionTable::canonical(), m.registry, m.bb);
  try {
    sm.bind_state(Takeoff, json{{"kind", "Sequence"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StructuralViolation);
  }
}

TEST(BindState, EnteredStateTreeTicksToTerminalStatus) {
  Machine m;
  StateMachine sm(TransitionTable::canonical(), m.registry, m.bb);
  sm.bind_state(Takeoff, bt::spec::sequence("takeoff", {bt::spec::action("w", "Work")}));
  sm.start();
  sm.change_state(Takeoff);
  ASSERT_NE(sm.active_tree(), nullptr);
  bt::NodeStatus s = bt::NodeStatus::Running;
  double t = 0.0;
  int ticks = 0;
  while (s == bt::NodeStatus::Running && ticks < 100) {
    s = sm.active_tree()->tick(t);
    t += 0.25;
    ++ticks;
  }
  EXPECT_EQ(s, bt::NodeStatus::Success);
  EXPECT_EQ(ticks, 5);
  EXPECT_EQ(sm.published(), Takeoff);
}

TEST(BindState, ReentryResetsBeforeFirstTick) {
  Machine m;
  StateMachine sm(TransitionTable::canonical(), m.registry, m.bb);
  sm.bind_state(Land, bt::spec::sequence("land", {bt::spec::action("w", "LandWork")}),
                {[&] { m.trace.push_back("enter"); }, [&] { m.trace.push_back("exit"); }});
  sm.start();
  sm.change_state(Land);
  sm.active_tree()->tick(0.0);
  sm.active_tree()->tick(0.1);
  auto change = sm.change_state(Land);
  EXPECT_EQ(change.halted, (std::vector<std::string>{"w", "land"}));
  sm.active_tree()->tick(0.2);
  EXPECT_EQ(m.trace, (std::vector<std::string>{"enter", "land:first", "land:tick", "land:halt", "exit", "enter",
                                               "land:first"}));
  EXPECT_EQ(sm.active_tree()->lifecycle("w"), bt::Lifecycle::Running);
}

TEST(BindState, InvalidTableCannotStart) {
  Machine m;
  StateMachine sm(testing_support::table_without_emergency_exit(), m.registry, m.bb);
  try {
    sm.start();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidTable);
  }
}
