// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failing criteria.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "aeroexec/coordinator/realtime_driver.hpp"
#include "aeroexec/healthguard/synthetic.hpp"
#include "aeroexec/montecarlo/campaign.hpp"
#include "support/random_trees.hpp"
#include "support/table_oracle.hpp"

using namespace aeroexec;
namespace mc = aeroexec::montecarlo;
using fsm::MissionState;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, const char* name, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!c.pass) ++failures;
  std::printf("%s criterion %d: %s%s (%.1f s)\n", c.pass ? "PASS" : "FAIL", n, name, c.detail.str().c_str(), secs);
  std::fflush(stdout);
}

std::string config(const std::string& name) { return std::string(AEROEXEC_CONFIG_DIR) + "/" + name; }

coordinator::RunConfig base_config() {
  coordinator::RunConfig c;
  c.plan = mission::parse_plan(mc::read_file(config("plan_fig1.json")));
  return c;
}

// Per-event rows of the reference distribution, columns Init/Takeoff/Mission/Land.
const std::map<std::string, std::array<int, 4>> kReferenceCounts = {
    {"StateEstimatorFailure", {7, 7, 8, 9}}, {"BatteryLow", {10, 8, 6, 9}},
    {"BatteryCritical", {5, 8, 5, 7}},       {"EmergencyBattery", {6, 7, 6, 8}},
    {"NoLandingSitesFound", {5, 8, 5, 7}},   {"LandingSiteChecks", {7, 9, 7, 6}},
};

void table1_replay(Check& c) {
  const auto spec = mc::load_campaign(config("campaign_table1.json"));
  const auto report = mc::run_campaign(spec, std::max(1u, std::thread::hardware_concurrency()));
  const auto& results = report.results;
  c.require(results.size() == 170, "trials " + std::to_string(results.size()));

  std::size_t terminated = 0, crashes = 0, verified = 0;
  std::map<std::string, std::array<int, 4>> seen;
  for (const auto& r : results) {
    if (!r.error.empty()) continue;
    const auto& o = r.outcome;
    if (o.terminal_state == MissionState::Terminate) ++terminated;
    if (o.classification == mc::Classification::Crash || o.crashed) ++crashes;
    if (r.verdict.ok()) ++verified;
    for (const auto& e : o.event_log) {
      if (e.source != "External" || e.name == fsm::events::Start) continue;
      const int col = e.state == MissionState::Init      ? 0
                      : e.state == MissionState::Takeoff ? 1
                      : e.state == MissionState::Mission ? 2
                      : e.state == MissionState::Land    ? 3
                                                         : -1;
      if (col < 0) c.require(false, e.name + " dispatched in " + std::string(to_string(e.state)));
      else ++seen[e.name][col];
    }
  }
  c.require(terminated == 170, "terminated " + std::to_string(terminated) + "/170");
  c.require(crashes == 0, "crashes " + std::to_string(crashes));
  c.require(verified == results.size() && !results.empty(), "verified " + std::to_string(verified));
  c.require(seen == kReferenceCounts, "event/state distribution differs from the reference counts");
  c.detail << " terminated " << terminated << "/170, crashes " << crashes << ", verified " << verified << "/"
           << results.size();
}

void fig6_property(Check& c) {
  const auto spec = mc::load_campaign(config("campaign_fig6.json"));
  const auto report = mc::run_campaign(spec, std::max(1u, std::thread::hardware_concurrency()));
  c.require(report.results.size() == 100, "trials " + std::to_string(report.results.size()));
  const double edges[] = {200, 500, 800, 1000, 1200};
  std::array<int, 4> total{}, el{}, crash{};
  for (const auto& r : report.results) {
    c.require(r.error.empty(), "trial error: " + r.error);
    const auto& o = r.outcome;
    c.require(o.waypoints >= 5 && o.waypoints <= 15, "waypoints " + std::to_string(o.waypoints));
    int bin = -1;
    for (int b = 0; b < 4; ++b)
      if (o.planned_distance >= edges[b] && o.planned_distance <= edges[b + 1] + 1e-9) bin = b;
    if (bin < 0) {
      c.require(false, "distance " + std::to_string(o.planned_distance) + " out of range");
      continue;
    }
    ++total[bin];
    if (o.classification == mc::Classification::EmergencyLanding) ++el[bin];
    if (o.classification == mc::Classification::Crash || o.crashed) ++crash[bin];
    c.require(o.classification != mc::Classification::Timeout, "timeout seed " + std::to_string(o.seed));
  }
  double prev = -1.0;
  c.detail << " EL/n by bin:";
  for (int b = 0; b < 4; ++b) {
    c.require(total[b] > 0, "empty bin " + std::to_string(b));
    c.require(crash[b] == 0, "crash in bin " + std::to_string(b));
    const double frac = total[b] ? double(el[b]) / total[b] : 0.0;
    c.require(frac + 1e-12 >= prev, "EL fraction decreases at bin " + std::to_string(b));
    prev = frac;
    c.detail << " " << el[b] << "/" << total[b];
  }
}

void healthguard_accuracy(Check& c) {
  const auto stream = healthguard::synthetic_crossings(2025, 1000, 0.01);
  c.require(stream.truth.size() >= 1000, "crossings " + std::to_string(stream.truth.size()));
  healthguard::Healthguard noisy, clean;
  for (const auto& s : stream.noisy) noisy.ingest(s);
  for (const auto& s : stream.clean) clean.ingest(s);
  const auto a = healthguard::measure_accuracy(stream.truth, noisy.log(), 2.0);
  const auto b = healthguard::measure_accuracy(stream.truth, clean.log(), 2.0);
  c.require(a.true_positive_rate >= 0.985, "noisy detection " + std::to_string(a.true_positive_rate));
  c.require(b.false_positive_rate == 0.0, "clean false positives " + std::to_string(b.false_positives));
  c.detail << " crossings " << stream.truth.size() << ", detection " << a.true_positive_rate << ", clean FPR "
           << b.false_positive_rate;
}

std::set<MissionState> as_set(const std::vector<MissionState>& v) { return {v.begin(), v.end()}; }

void fsm_validator(Check& c) {
  struct Case {
    const char* file;
    bool pass;
    std::set<MissionState> unreachable, no_path;
  };
  const Case cases[] = {
      {"table.json", true, {}, {}},
      {"table_prechecks_unreachable.json", false, {MissionState::PreChecks}, {}},
      {"table_emergency_no_exit.json", false, {}, {MissionState::EmergencyLand}},
  };
  for (const auto& k : cases) {
    const auto table = fsm::TransitionTable::from_json(mc::parse_json_text(mc::read_file(config(k.file)), k.file));
    const auto report = fsm::validate_table(table);
    const auto oracle = testing_support::table_oracle(table);
    const std::string f = k.file;
    c.require(report.pass == k.pass, f + " verdict");
    c.require(as_set(report.unreachable) == oracle.unreachable, f + " unreachable vs oracle");
    c.require(as_set(report.no_path) == oracle.no_path, f + " no_path vs oracle");
    c.require(oracle.unreachable == k.unreachable && oracle.no_path == k.no_path, f + " culprits");
  }
  const auto canonical_json = fsm::TransitionTable::canonical().to_json();
  c.require(mc::parse_json_text(mc::read_file(config("table.json")), "table.json") == canonical_json,
            "table.json is not the canonical table");
}

void bt_equivalence(Check& c) {
  testing_support::TreeGenerator gen(424242);
  int divergences = 0;
  constexpr int kTrees = 10000;
  for (int i = 0; i < kTrees; ++i) {
    const auto t = gen.make(4);
    const auto d = testing_support::compare_with_reference(t, gen.rng());
    if (d.found && divergences++ == 0) c.detail << " first divergence at tree " << i << ": " << d.detail.substr(0, 200);
  }
  c.require(divergences == 0, std::to_string(divergences) + " divergences");
  c.detail << " trees " << kTrees << ", divergences " << divergences;
}

void latency_budget(Check& c) {
  using enum MissionState;
  fsm::TransitionTable t(Idle, {Terminate});
  t.add(Idle, "Start", Init);
  t.add(Init, "Ping", PreChecks);
  t.add(PreChecks, "Ping", Init);
  t.add(Init, "Stop", Terminate);
  t.add(PreChecks, "Stop", Terminate);
  t.add(PreChecks, "aux", Takeoff);
  t.add(Takeoff, "aux", Mission);
  t.add(Mission, "aux", Land);
  t.add(Land, "aux", EmergencyLand);
  t.add(EmergencyLand, "aux", Terminate);

  auto cfg = base_config();
  cfg.table = t;
  cfg.loop.tick_period = 0.02;
  cfg.vehicle.boot_time = 1e6;  // Init never finishes on its own
  cfg.time_limit = 1e6;
  coordinator::MissionRuntime rt(cfg);
  coordinator::RealtimeDriver driver(rt, 1.0);
  driver.start();
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  for (int i = 0; i < 200; ++i) {
    rt.coordinator().enqueue_event("Ping");
    std::this_thread::sleep_for(std::chrono::milliseconds(23));
  }
  rt.coordinator().enqueue_event("Stop");
  driver.join();
  std::vector<double> lat;
  for (const auto& tr : rt.coordinator().transitions())
    if (tr.event == "Ping") lat.push_back(tr.latency_ms);
  c.require(lat.size() >= 190, "pings " + std::to_string(lat.size()));
  double median = 0.0;
  if (!lat.empty()) {
    std::nth_element(lat.begin(), lat.begin() + lat.size() / 2, lat.end());
    median = lat[lat.size() / 2];
  }
  const double period = driver.stats().mean_period_ms;
  c.require(median < 5.0, "median latency " + std::to_string(median) + " ms");
  c.require(std::abs(period - 20.0) <= 2.0, "mean period " + std::to_string(period) + " ms");
  c.detail << " median latency " << median << " ms, mean period " << period << " ms";
}

void nominal_run(Check& c) {
  const auto cfg = mc::load_run_config(config("run.json"));
  coordinator::MissionRuntime rt(cfg);
  const auto result = rt.run();

  std::vector<MissionState> visited{MissionState::Idle};
  for (const auto& t : result.transitions) visited.push_back(t.to);
  const std::vector<MissionState> want{MissionState::Idle,    MissionState::Init,    MissionState::PreChecks,
                                       MissionState::Takeoff, MissionState::Mission, MissionState::Land,
                                       MissionState::Terminate};
  c.require(visited == want, "visited states differ");
  c.require(!result.crashed && !result.timed_out, "crashed or timed out");

  std::vector<std::pair<std::string, std::string>> planned, executed;
  for (const auto& wp : cfg.plan.waypoints)
    for (const auto& task : wp.tasks) planned.emplace_back(wp.id, std::string(mission::task_kind(task)));
  for (const auto& t : result.tasks) executed.emplace_back(t.waypoint_id, t.kind);
  c.require(!planned.empty() && planned == executed, "tasks not executed in plan order");
  bool ordered = true;
  for (std::size_t i = 1; i < result.tasks.size(); ++i)
    ordered = ordered && result.tasks[i].started >= result.tasks[i - 1].finished;
  c.require(ordered, "task intervals overlap");
  c.detail << " states " << visited.size() << ", tasks " << executed.size() << "/" << planned.size();
}

}  // namespace

int main() {
  criterion(1, "Event replay campaign", table1_replay);
  criterion(2, "Randomized campaign: zero crashes and non-decreasing emergency fraction", fig6_property);
  criterion(3, "Healthguard detection accuracy", healthguard_accuracy);
  criterion(4, "Transition table validator", fsm_validator);
  criterion(5, "Behavior tree reference equivalence", bt_equivalence);
  criterion(6, "Latency budget at 50 Hz", latency_budget);
  criterion(7, "Nominal end-to-end run", nominal_run);
  return failures;
}
