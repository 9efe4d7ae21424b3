#include <gtest/gtest.h>

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "aeroexec/bt/factory.hpp"
#include "support/random_trees.hpp"
#include "support/reference_bt.hpp"

using namespace aeroexec;
using namespace aeroexec::bt;

namespace {

// Leaf returning a fixed script of statuses; records executions and halts.
struct Probe {
  std::vector<NodeStatus> script;
  int executions = 0;
  int halts = 0;
};

struct Fixture {
  NodeRegistry registry;
  Blackboard bb;
  std::map<std::string, std::shared_ptr<Probe>> probes;
  std::vector<std::string> halt_order;

  void probe(const std::string& name, std::vector<NodeStatus> script, LeafKind kind = LeafKind::Action) {
    auto p = std::make_shared<Probe>();
    p->script = std::move(script);
    probes[name] = p;
    registry.register_leaf(name, kind, [p, name, this](const json&, Blackboard&) {
      return std::make_unique<FunctionLeaf>(
          [p](LeafContext&) {
            auto k = static_cast<std::size_t>(p->executions++);
            return p->script[std::min(k, p->script.size() - 1)];
          },
          [p, name, this] {
            ++p->halts;
            halt_order.push_back(name);
          });
    });
  }

  BehaviorTree build(const json& spec) { return build_tree(spec, registry, bb); }
};

constexpr auto S = NodeStatus::Success;
constexpr auto F = NodeStatus::Failure;
constexpr auto R = NodeStatus::Running;

Errc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected aeroexec::Error";
  return Errc::BadConfig;
}

}  // namespace

TEST(BuildTree, MinimalSequenceHasThreeNodes) {
  Fixture f;
  f.probe("HealthOK", {S}, LeafKind::Condition);
  f.probe("Arm", {S});
  auto tree = f.build(spec::sequence("root", {spec::condition("c", "HealthOK"), spec::action("a", "Arm")}));
  EXPECT_EQ(tree.size(), 3u);
  for (const auto& n : tree.snapshot()) EXPECT_EQ(n.lifecycle, Lifecycle::Idle);
}

TEST(BuildTree, UnknownLeafName) {
  Fixture f;
  EXPECT_EQ(error_code_of([&] { f.build(spec::sequence("r", {spec::action("a", "Flarp")})); }), Errc::UnknownLeafName);
}

TEST(BuildTree, StructuralViolations) {
  Fixture f;
  f.probe("A", {S});
  // control node with no children
  EXPECT_EQ(error_code_of([&] { f.build(json{{"kind", "Sequence"}}); }), Errc::StructuralViolation);
  // decorator with two children
  EXPECT_EQ(error_code_of([&] {
              f.build(spec::node("Inverter", "i", {spec::action("a", "A"), spec::action("b", "A")}));
            }),
            Errc::StructuralViolation);
  // leaf with a child
  EXPECT_EQ(error_code_of([&] {
              json leaf = spec::action("a", "A");
              leaf["children"] = json::array({spec::action("b", "A")});
              f.build(leaf);
            }),
            Errc::StructuralViolation);
  // duplicate id
  EXPECT_EQ(error_code_of([&] { f.build(spec::sequence("r", {spec::action("a", "A"), spec::action("a", "A")})); }),
            Errc::StructuralViolation);
  // unknown kind
  EXPECT_EQ(error_code_of([&] { f.build(json{{"kind", "Selector"}}); }), Errc::StructuralViolation);
  // action name registered as condition
  f.probe("C", {S}, LeafKind::Condition);
  EXPECT_EQ(error_code_of([&] { f.build(spec::action("a", "C")); }), Errc::StructuralViolation);
}

TEST(BuildTree, BadParams) {
  Fixture f;
  f.probe("A", {S});
  EXPECT_EQ(error_code_of([&] { f.build(spec::retry("r", 0, spec::action("a", "A"))); }), Errc::BadParam);
  EXPECT_EQ(error_code_of([&] { f.build(spec::timeout("t", 0.0, spec::action("a", "A"))); }), Errc::BadParam);
  EXPECT_EQ(error_code_of([&] { f.build(spec::dynamic_timeout("t", "Nope", spec::action("a", "A"))); }),
            Errc::BadParam);
  EXPECT_EQ(error_code_of([&] {
              f.build(spec::node("Parallel", "p", {spec::action("a", "A")}, {{"success_threshold", 2}}));
            }),
            Errc::BadParam);
  EXPECT_EQ(error_code_of([&] { f.build(json{{"kind", "Action"}}); }), Errc::BadParam);
}

TEST(BuildTree, OmittedIdsUsePreorderOrdinals) {
  Fixture f;
  f.probe("A", {S});
  json spec = {{"kind", "Sequence"},
               {"children",
                {{{"kind", "Inverter"}, {"children", {{{"kind", "Action"}, {"params", {{"name", "A"}}}}}}},
                 {{"kind", "Action"}, {"params", {{"name", "A"}}}}}}};
  auto tree = f.build(spec);
  EXPECT_EQ(tree.root_id(), "n0");
  EXPECT_EQ(tree.children("n0"), (std::vector<std::string>{"n1", "n3"}));
  EXPECT_EQ(tree.children("n1"), (std::vector<std::string>{"n2"}));
}

TEST(Registry, DuplicateRegistrationRejected) {
  NodeRegistry reg;
  reg.register_action("A", [](LeafContext&) { return S; });
  EXPECT_EQ(error_code_of([&] { reg.register_action("A", [](LeafContext&) { return S; }); }),
            Errc::DuplicateRegistration);
}

TEST(Tick, SequenceResumesAtRunningChild) {
  Fixture f;
  f.probe("one", {S});
  f.probe("two", {R, S});
  auto tree = f.build(spec::sequence("seq", {spec::action("a", "one"), spec::action("b", "two")}));
  EXPECT_EQ(tree.tick(0.0), R);
  EXPECT_EQ(tree.tick(0.1), S);
  EXPECT_EQ(f.probes["one"]->executions, 1);  // not restarted
  EXPECT_EQ(f.probes["two"]->executions, 2);
}

TEST(Tick, FallbackSucceedsOnSecondChild) {
  Fixture f;
  f.probe("bad", {F});
  f.probe("good", {S});
  auto tree = f.build(spec::fallback("fb", {spec::action("a", "bad"), spec::action("b", "good")}));
  EXPECT_EQ(tree.tick(0.0), S);
}

TEST(Tick, FallbackResumesAtRunningChild) {
  Fixture f;
  f.probe("bad", {F});
  f.probe("slow", {R, R, F});
  auto tree = f.build(spec::fallback("fb", {spec::action("a", "bad"), spec::action("b", "slow")}));
  EXPECT_EQ(tree.tick(0.0), R);
  EXPECT_EQ(tree.tick(0.1), R);
  EXPECT_EQ(tree.tick(0.2), F);
  EXPECT_EQ(f.probes["bad"]->executions, 1);
}

TEST(Tick, InverterSwapsTerminalStatus) {
  Fixture f;
  f.probe("bad", {F});
  f.probe("slow", {R});
  EXPECT_EQ(f.build(spec::inverter("i", spec::action("a", "bad"))).tick(0.0), S);
  EXPECT_EQ(f.build(spec::inverter("j", spec::action("b", "slow"))).tick(0.0), R);
}

TEST(Tick, RetrySucceedsOnThirdAttemptWithinOneTick) {
  // Expected outcome computed with the reference interpreter.
  json tree_spec = spec::retry("retry", 3, spec::action("leaf", "flaky"));
  reference::Interpreter ref(tree_spec, {{"flaky", {reference::St::Failure, reference::St::Failure, reference::St::Success}}});
  ASSERT_EQ(ref.tick(0.0), reference::St::Success);
  ASSERT_EQ(ref.executions("leaf"), 3);

  Fixture f;
  f.probe("flaky", {F, F, S});
  auto tree = f.build(tree_spec);
  EXPECT_EQ(tree.tick(0.0), S);
  EXPECT_EQ(f.probes["flaky"]->executions, 3);
  EXPECT_EQ(tree.attempts("retry"), 2);
}

TEST(Tick, RetryExhaustsAttempts) {
  Fixture f;
  f.probe("broken", {F});
  auto tree = f.build(spec::retry("retry", 3, spec::action("leaf", "broken")));
  EXPECT_EQ(tree.tick(0.0), F);
  EXPECT_EQ(f.probes["broken"]->executions, 3);
}

TEST(Tick, TimeoutFailsAtDeadlineAndHaltsChild) {
  json tree_spec = spec::timeout("to", 2.0, spec::action("leaf", "stuck"));
  reference::Interpreter ref(tree_spec, {{"stuck", {reference::St::Running}}});
  std::vector<reference::St> expected;
  for (int k = 0; k <= 6; ++k) expected.push_back(ref.tick(0.5 * k));
  // Reference: Running for t < 2 s, Failure at t = 2 s.
  ASSERT_EQ(expected[3], reference::St::Running);
  ASSERT_EQ(expected[4], reference::St::Failure);

  Fixture f;
  f.probe("stuck", {R});
  auto tree = f.build(tree_spec);
  for (int k = 0; k <= 4; ++k) {
    EXPECT_EQ(tree.tick(0.5 * k), testing_support::to_engine(expected[k])) << "t=" << 0.5 * k;
  }
  EXPECT_EQ(f.probes["stuck"]->halts, 1);
  EXPECT_EQ(f.probes["stuck"]->executions, 4);  // not ticked at the deadline
  EXPECT_EQ(tree.lifecycle("leaf"), Lifecycle::Idle);
}

TEST(Tick, DynamicTimeoutEvaluatedAtChildStart) {
  Fixture f;
  f.probe("stuck", {R});
  f.bb.set("limit", 1.0);
  f.registry.register_duration("from_bb", [](const Blackboard& bb, double) { return bb.get<double>("limit"); });
  auto tree = f.build(spec::dynamic_timeout("to", "from_bb", spec::action("leaf", "stuck")));
  EXPECT_EQ(tree.tick(0.0), R);
  f.bb.set("limit", 100.0);  // only read at start
  EXPECT_EQ(tree.tick(0.5), R);
  EXPECT_EQ(tree.tick(1.0), F);
}

TEST(Tick, ParallelThreshold) {
  Fixture f;
  f.probe("ok", {S});
  f.probe("slow", {R, R, S});
  f.probe("bad", {F});
  // 2-of-3: ok + slow succeed eventually
  auto tree = f.build(spec::node("Parallel", "p",
                                 {spec::action("a", "ok"), spec::action("b", "slow"), spec::action("c", "bad")},
                                 {{"success_threshold", 2}}));
  EXPECT_EQ(tree.tick(0.0), R);
  EXPECT_EQ(tree.tick(0.1), R);
  EXPECT_EQ(tree.tick(0.2), S);
  EXPECT_EQ(f.probes["ok"]->executions, 1);  // completed children are not re-ticked

  // default M = N fails as soon as one child fails
  Fixture g;
  g.probe("ok", {S});
  g.probe("slow", {R});
  g.probe("bad", {F});
  auto all = g.build(spec::node("Parallel", "p",
                                {spec::action("a", "ok"), spec::action("b", "slow"), spec::action("c", "bad")}));
  EXPECT_EQ(all.tick(0.0), F);
  EXPECT_EQ(g.probes["slow"]->halts, 1);
}

TEST(Tick, LeafPanicBecomesFailure) {
  Fixture f;
  f.registry.register_action("panic", [](LeafContext&) -> NodeStatus { throw std::runtime_error("boom"); });
  auto tree = f.build(spec::sequence("s", {spec::action("p", "panic")}));
  EXPECT_EQ(tree.tick(0.0), F);
  ASSERT_EQ(tree.leaf_faults().size(), 1u);
  EXPECT_EQ(tree.leaf_faults()[0].node_id, "p");
  EXPECT_NE(tree.leaf_faults()[0].what.find("boom"), std::string::npos);
}

TEST(Tick, ConditionMayNotReturnRunning) {
  Fixture f;
  f.probe("weird", {R}, LeafKind::Condition);
  auto tree = f.build(spec::condition("c", "weird"));
  EXPECT_EQ(tree.tick(0.0), F);
  EXPECT_EQ(tree.leaf_faults().size(), 1u);
}

TEST(Halt, SingleRunningActionHookRunsOnce) {
  Fixture f;
  f.probe("slow", {R});
  auto tree = f.build(spec::sequence("s", {spec::action("a", "slow")}));
  tree.tick(0.0);
  auto report = tree.halt();
  EXPECT_EQ(f.probes["slow"]->halts, 1);
  EXPECT_EQ(report.halted, (std::vector<std::string>{"a", "s"}));
  EXPECT_TRUE(tree.halt().halted.empty());  // idempotent
  EXPECT_EQ(f.probes["slow"]->halts, 1);
}

TEST(Halt, NeverTickedTreeRunsNoHooks) {
  Fixture f;
  f.probe("slow", {R});
  auto tree = f.build(spec::sequence("s", {spec::action("a", "slow")}));
  EXPECT_TRUE(tree.halt().halted.empty());
  EXPECT_EQ(f.probes["slow"]->halts, 0);
}

TEST(Halt, DeepChainLeafToRootOrder) {
  Fixture f;
  f.probe("slow", {R});
  auto tree = f.build(spec::sequence("seq", {spec::retry("retry", 2, spec::action("act", "slow"))}));
  tree.tick(0.0);
  auto report = tree.halt();
  EXPECT_EQ(report.halted, (std::vector<std::string>{"act", "retry", "seq"}));
  EXPECT_EQ(tree.lifecycle("seq"), Lifecycle::Halted);
}

TEST(Halt, NoExecutionsUntilReset) {
  Fixture f;
  f.probe("slow", {R});
  auto tree = f.build(spec::sequence("s", {spec::action("a", "slow")}));
  tree.tick(0.0);
  tree.halt();
  EXPECT_EQ(error_code_of([&] { tree.tick(0.1); }), Errc::TreeHalted);
  EXPECT_EQ(f.probes["slow"]->executions, 1);
  tree.reset();
  EXPECT_EQ(tree.tick(0.2), R);
  EXPECT_EQ(f.probes["slow"]->executions, 2);
}

TEST(Reset, AfterSuccessReexecutesFromFirstChild) {
  Fixture f;
  f.probe("one", {S});
  f.probe("two", {S});
  auto tree = f.build(spec::sequence("s", {spec::action("a", "one"), spec::action("b", "two")}));
  EXPECT_EQ(tree.tick(0.0), S);
  tree.reset();
  EXPECT_EQ(tree.tick(0.1), S);
  EXPECT_EQ(f.probes["one"]->executions, 2);
}

TEST(Reset, ClearsRetryCounter) {
  Fixture f;
  f.probe("flaky", {F, F, S});
  auto tree = f.build(spec::retry("retry", 3, spec::action("leaf", "flaky")));
  tree.tick(0.0);
  EXPECT_EQ(tree.attempts("retry"), 2);
  tree.reset();
  EXPECT_EQ(tree.attempts("retry"), 0);
}

TEST(Reset, WhileRunningWithoutHaltRejected) {
  Fixture f;
  f.probe("slow", {R});
  auto tree = f.build(spec::sequence("s", {spec::action("a", "slow")}));
  tree.tick(0.0);
  EXPECT_EQ(error_code_of([&] { tree.reset(); }), Errc::ResetWhileRunning);
}

TEST(Skip, SkippedNodeCountsAsSuccessWithoutExecuting) {
  Fixture f;
  f.probe("fly", {S});
  f.probe("science", {F});
  auto tree = f.build(spec::sequence("s", {spec::action("fly", "fly"), spec::action("ScienceTask", "science")}));
  tree.set_skip("ScienceTask", true);
  EXPECT_EQ(tree.tick(0.0), S);
  EXPECT_EQ(f.probes["science"]->executions, 0);
  EXPECT_FALSE(tree.skip_flag("ScienceTask"));  // auto-cleared
  EXPECT_EQ(tree.tick(0.1), F);                  // next tick executes normally
}

TEST(Skip, CancelBeforeNextTick) {
  Fixture f;
  f.probe("science", {S});
  auto tree = f.build(spec::sequence("s", {spec::action("ScienceTask", "science")}));
  tree.set_skip("ScienceTask", true);
  tree.set_skip("ScienceTask", false);
  tree.tick(0.0);
  EXPECT_EQ(f.probes["science"]->executions, 1);
}

TEST(Skip, UnknownNodeId) {
  Fixture f;
  f.probe("a", {S});
  auto tree = f.build(spec::action("a", "a"));
  EXPECT_EQ(error_code_of([&] { tree.set_skip("nonexistent", true); }), Errc::UnknownNodeId);
}

TEST(Skip, SkippingRunningNodeHaltsIt) {
  Fixture f;
  f.probe("slow", {R});
  auto tree = f.build(spec::sequence("s", {spec::action("a", "slow")}));
  EXPECT_EQ(tree.tick(0.0), R);
  tree.set_skip("a", true);
  EXPECT_EQ(tree.tick(0.1), S);
  EXPECT_EQ(f.probes["slow"]->halts, 1);
}

TEST(Blackboard, AbsentAndMistypedReadsAreErrors) {
  Blackboard bb;
  EXPECT_EQ(error_code_of([&] { bb.get<double>("missing"); }), Errc::MissingKey);
  bb.set("alt", 10.0);
  EXPECT_EQ(error_code_of([&] { bb.get<std::string>("alt"); }), Errc::TypeMismatch);
  bb.set("alt", 12.0);  // last writer wins
  EXPECT_DOUBLE_EQ(bb.get<double>("alt"), 12.0);
  auto snap = bb.snapshot();
  bb.set("alt", 1.0);
  EXPECT_DOUBLE_EQ(std::get<double>(snap->at("alt")), 12.0);
}

TEST(TickLog, CsvFormat) {
  Fixture f;
  f.probe("one", {S});
  auto tree = f.build(spec::sequence("s", {spec::action("a", "one")}));
  tree.enable_tick_log(true);
  tree.tick(0.0);
  EXPECT_EQ(tree.tick_log_csv(), "tick_index,node_id,status\n1,a,Success\n1,s,Success\n");
}

TEST(Properties, DeterministicTickLogs) {
  testing_support::TreeGenerator gen_a(7), gen_b(7);
  for (int c = 0; c < 200; ++c) {
    auto ta = gen_a.make();
    auto tb = gen_b.make();
    std::string logs[2];
    const testing_support::RandomTree* trees[2] = {&ta, &tb};
    for (int side = 0; side < 2; ++side) {
      auto counts = std::make_shared<std::map<std::string, int>>();
      auto reg = testing_support::scripted_registry(*trees[side], counts);
      Blackboard bb;
      auto tree = build_tree(trees[side]->spec, reg, bb);
      tree.enable_tick_log(true);
      for (int k = 0; k < 10; ++k) tree.tick(0.25 * k);
      logs[side] = tree.tick_log_csv();
    }
    ASSERT_EQ(logs[0], logs[1]);
  }
}

TEST(Properties, MatchesReferenceInterpreter) {
  testing_support::TreeGenerator gen(2024);
  for (int c = 0; c < 2000; ++c) {
    auto t = gen.make();
    auto d = testing_support::compare_with_reference(t, gen.rng());
    ASSERT_FALSE(d.found) << "case " << c << ": " << d.detail;
  }
}

TEST(Properties, LeafExecutesAtMostOncePerTickOutsideRetry) {
  testing_support::TreeGenerator gen(99);
  int checked = 0;
  for (int c = 0; c < 3000 && checked < 500; ++c) {
    auto t = gen.make();
    if (t.spec.dump().find("\"Retry\"") != std::string::npos) continue;
    ++checked;
    auto counts = std::make_shared<std::map<std::string, int>>();
    auto reg = testing_support::scripted_registry(t, counts);
    Blackboard bb;
    auto tree = build_tree(t.spec, reg, bb);
    for (int k = 0; k < 10; ++k) {
      auto before = *counts;
      auto status = tree.tick(0.25 * k);
      ASSERT_TRUE(status == S || status == F || status == R);
      for (const auto& [name, n] : *counts) ASSERT_LE(n - before[name], 1) << name;
    }
  }
  EXPECT_GE(checked, 500);
}
