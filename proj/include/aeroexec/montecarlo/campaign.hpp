#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "aeroexec/montecarlo/generator.hpp"

namespace aeroexec::montecarlo {

inline constexpr std::string_view kTable1Events[] = {"StateEstimatorFailure", "BatteryLow",          "BatteryCritical",
                                                      "EmergencyBattery",      "NoLandingSitesFound", "LandingSiteChecks"};
inline constexpr fsm::MissionState kTable1States[] = {fsm::MissionState::Init, fsm::MissionState::Takeoff,
                                                      fsm::MissionState::Mission, fsm::MissionState::Land};

/// Injected-event counts per (event, state) for the replay campaign.
using CellCounts = std::map<std::pair<std::string, fsm::MissionState>, int>;

inline CellCounts table1_counts() {
  static constexpr int counts[6][4] = {{7, 7, 8, 9}, {10, 8, 6, 9}, {5, 8, 5, 7},
                                       {6, 7, 6, 8}, {5, 8, 5, 7},  {7, 9, 7, 6}};
  CellCounts c;
  for (std::size_t e = 0; e < 6; ++e)
    for (std::size_t s = 0; s < 4; ++s) c[{std::string(kTable1Events[e]), kTable1States[s]}] = counts[e][s];
  return c;
}

/// Distance bin edges (upper bounds inclusive), meters.
struct DistanceBin {
  std::string label;
  double lo = 0.0, hi = 0.0;
};

inline std::vector<DistanceBin> default_bins() {
  return {{"200-500", 200.0, 500.0}, {"501-800", 500.0, 800.0}, {"801-1000", 800.0, 1000.0}, {"1001-1200", 1000.0, 1200.0}};
}

inline std::string bin_of(double d, const std::vector<DistanceBin>& bins) {
  for (const auto& b : bins)
    if (d > b.lo - (b.lo == bins.front().lo ? 1e-9 : 0.0) && d <= b.hi + 1e-9) return b.label;
  return d <= bins.front().lo ? "<" + bins.front().label : ">" + bins.back().label;
}

struct CampaignSpec {
  std::vector<TrialSpec> trials;
  std::vector<DistanceBin> bins = default_bins();
};

/// Replay campaign: one trial per injected event, fired `delay` seconds after
/// the FSM first enters the cell's state.
inline CampaignSpec table1_campaign(const coordinator::RunConfig& base, std::uint64_t first_seed = 1,
                                    double delay = 2.0, const CellCounts& cells = table1_counts()) {
  CampaignSpec c;
  std::uint64_t seed = first_seed;
  for (auto e : kTable1Events)
    for (auto s : kTable1States) {
      auto it = cells.find({std::string(e), s});
      const int n = it == cells.end() ? 0 : it->second;
      for (int i = 0; i < n; ++i) {
        TrialSpec t;
        t.seed = seed++;
        t.config = base;
        t.config.events.push_back({std::string(e), s, delay});
        t.group = std::string(e) + "@" + std::string(to_string(s));
        c.trials.push_back(std::move(t));
      }
    }
  return c;
}

inline CampaignSpec random_campaign(const coordinator::RunConfig& base, std::size_t trials, std::uint64_t first_seed,
                                    const GeneratorParams& g = {}) {
  CampaignSpec c;
  for (std::size_t i = 0; i < trials; ++i) {
    auto t = random_trial(first_seed + i, g, base);
    t.group = bin_of(mission::path_length(t.config.plan), c.bins);
    c.trials.push_back(std::move(t));
  }
  return c;
}

struct TrialResult {
  TrialOutcome outcome;
  Verdict verdict;
  std::vector<coordinator::EventInjection> injected;
  std::string error;  // set when the trial threw
};

struct CampaignReport {
  std::vector<TrialResult> results;  // in spec order
  std::vector<DistanceBin> bins = default_bins();

  std::size_t count(Classification c) const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [&](const TrialResult& r) {
      return r.error.empty() && r.outcome.classification == c;
    }));
  }
  std::size_t errors() const {
    return static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const TrialResult& r) { return !r.error.empty(); }));
  }
  std::size_t mismatches() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const TrialResult& r) {
      return !r.error.empty() || !r.verdict.ok();
    }));
  }
  std::size_t terminated() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const TrialResult& r) {
      return r.error.empty() && r.outcome.terminal_state == fsm::MissionState::Terminate;
    }));
  }

  /// External injected events counted by the state they were dispatched in.
  std::map<std::string, std::map<fsm::MissionState, int>> event_state_counts() const {
    std::map<std::string, std::map<fsm::MissionState, int>> m;
    for (const auto& r : results)
      for (const auto& e : r.outcome.event_log)
        if (e.source == "External" && e.name != fsm::events::Start) ++m[e.name][e.state];
    return m;
  }

  std::map<std::string, std::map<Classification, int>> bin_counts() const {
    std::map<std::string, std::map<Classification, int>> m;
    for (const auto& b : bins) m[b.label];
    for (const auto& r : results)
      if (r.error.empty()) ++m[bin_of(r.outcome.planned_distance, bins)][r.outcome.classification];
    return m;
  }

  /// 0 all verified, 3 any mismatch, 4 any crash (timeouts and trial errors count as crashes).
  int exit_code() const {
    if (count(Classification::Crash) || count(Classification::Timeout) || errors()) return 4;
    if (mismatches()) return 3;
    return 0;
  }
};

inline TrialResult execute(const TrialSpec& spec) {
  TrialResult r;
  r.injected = spec.config.events;
  try {
    r.outcome = run_trial(spec);
    r.verdict = verify_trial(r.outcome, table_of(spec.config));
  } catch (const std::exception& e) {
    r.outcome.seed = spec.seed;
    r.outcome.group = spec.group;
    r.error = e.what();
  }
  return r;
}

/// Runs trials on `jobs` workers. Results are stored by spec index, so the
/// report does not depend on scheduling.
inline CampaignReport run_campaign(const CampaignSpec& spec, unsigned jobs = 1,
                                   const std::function<void(std::size_t done, std::size_t total)>& progress = {}) {
  CampaignReport report;
  report.bins = spec.bins;
  report.results.resize(spec.trials.size());
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < spec.trials.size();) {
      report.results[i] = execute(spec.trials[i]);
      const auto d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(d, spec.trials.size());
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, spec.trials.size()))));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  return report;
}

inline std::string table1_csv(const CampaignReport& r) {
  const auto counts = r.event_state_counts();
  std::vector<std::string> events(std::begin(kTable1Events), std::end(kTable1Events));
  for (const auto& [name, _] : counts)
    if (std::find(events.begin(), events.end(), name) == events.end()) events.push_back(name);
  std::vector<fsm::MissionState> cols(std::begin(kTable1States), std::end(kTable1States));
  std::ostringstream os;
  os << "event";
  for (auto s : cols) os << ',' << to_string(s);
  os << ",Other,Total\n";
  std::map<fsm::MissionState, int> col_totals;
  int other_total = 0, grand = 0;
  for (const auto& name : events) {
    auto it = counts.find(name);
    int other = 0, total = 0;
    os << name;
    for (auto s : cols) {
      int n = 0;
      if (it != counts.end())
        if (auto c = it->second.find(s); c != it->second.end()) n = c->second;
      col_totals[s] += n;
      total += n;
      os << ',' << n;
    }
    if (it != counts.end())
      for (const auto& [s, n] : it->second)
        if (std::find(cols.begin(), cols.end(), s) == cols.end()) other += n;
    total += other;
    other_total += other;
    grand += total;
    os << ',' << other << ',' << total << '\n';
  }
  os << "Total";
  for (auto s : cols) os << ',' << col_totals[s];
  os << ',' << other_total << ',' << grand << '\n';
  return os.str();
}

inline std::string fig6_csv(const CampaignReport& r) {
  std::ostringstream os;
  os << "bin";
  for (auto c : kClassifications) os << ',' << to_string(c);
  os << ",Total\n";
  const auto counts = r.bin_counts();
  std::vector<std::string> order;
  for (const auto& b : r.bins) order.push_back(b.label);
  for (const auto& [label, _] : counts)
    if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);
  for (const auto& label : order) {
    const auto& row = counts.at(label);
    int total = 0;
    os << label;
    for (auto c : kClassifications) {
      const auto it = row.find(c);
      const int n = it == row.end() ? 0 : it->second;
      total += n;
      os << ',' << n;
    }
    os << ',' << total << '\n';
  }
  return os.str();
}

inline json trial_to_json(const TrialResult& r) {
  json j = outcome_to_json(r.outcome, r.verdict);
  json inj = json::array();
  for (const auto& e : r.injected) inj.push_back(to_json_value(e));
  j["injected"] = std::move(inj);
  if (!r.error.empty()) {
    j["error"] = r.error;
    j["verified"] = false;
  }
  return j;
}

inline std::string trials_jsonl(const CampaignReport& r) {
  std::string out;
  for (const auto& t : r.results) out += trial_to_json(t).dump() + "\n";
  return out;
}

inline json summary_json(const CampaignReport& r) {
  json cls = json::object();
  for (auto c : kClassifications) cls[std::string(to_string(c))] = r.count(c);
  const auto n = r.results.size();
  return {{"v", 1},
          {"trials", n},
          {"terminated", r.terminated()},
          {"classification", cls},
          {"errors", r.errors()},
          {"verification_mismatches", r.mismatches()},
          {"transition_correctness", n ? double(n - r.mismatches()) / double(n) : 1.0},
          {"exit_code", r.exit_code()}};
}

inline void write_report(const CampaignReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(Errc::BadConfig, "cannot write " + (dir / name).string());
    out << text;
  };
  put("table1.csv", table1_csv(r));
  put("fig6.csv", fig6_csv(r));
  put("trials.jsonl", trials_jsonl(r));
  put("summary.json", summary_json(r).dump(2) + "\n");
}

/// Campaign files:
///   {"v":1, "kind":"table1", "plan":…, "seed"?, "delay"?, "counts"?: {event: {state: n}}, sections…}
///   {"v":1, "kind":"random", "trials":n, "seed"?, "generator"?: {…}, sections…}
///   {"v":1, "kind":"trials", "trials":[run config, …], sections…}
inline CampaignSpec campaign_from_json(const json& j, const std::filesystem::path& base = ".") {
  if (!j.is_object()) throw Error(Errc::BadConfig, "campaign must be a JSON object");
  if (j.contains("v") && j["v"] != 1) throw Error(Errc::UnsupportedVersion, "campaign version must be 1", "v");
  const std::string kind = j.value("kind", "trials");
  coordinator::RunConfig shared;
  apply_sections(shared, j, base);
  const std::uint64_t seed = j.value("seed", std::uint64_t{1});

  if (kind == "table1") {
    if (!j.contains("plan")) throw Error(Errc::BadConfig, "table1 campaign needs 'plan'", "plan");
    shared.plan = mission::parse_plan(resolve(j["plan"], base).dump());
    CellCounts cells = table1_counts();
    if (j.contains("counts")) {
      cells.clear();
      for (const auto& [ev, row] : j["counts"].items())
        for (const auto& [st, n] : row.items())
          cells[{ev, parse_state_field(json(st), "counts." + ev)}] = n.get<int>();
    }
    return table1_campaign(shared, seed, j.value("delay", 2.0), cells);
  }
  if (kind == "random") {
    const auto g = j.contains("generator") ? GeneratorParams::from_json(j["generator"]) : GeneratorParams{};
    return random_campaign(shared, j.value("trials", std::size_t{100}), seed, g);
  }
  if (kind == "trials") {
    CampaignSpec c;
    const json list = j.value("trials", json::array());
    if (!list.is_array()) throw Error(Errc::BadConfig, "trials must be a list", "trials");
    for (std::size_t i = 0; i < list.size(); ++i) {
      json t = list[i];
      for (const char* k : {"vehicle", "behaviors", "healthguard", "tick_period", "table"})
        if (j.contains(k) && !t.contains(k)) t[k] = j[k];
      TrialSpec spec;
      spec.config = run_config_from_json(t, base);
      spec.seed = t.contains("seed") ? spec.config.seed : seed + i;
      spec.group = t.value("group", "trial" + std::to_string(i));
      c.trials.push_back(std::move(spec));
    }
    return c;
  }
  throw Error(Errc::BadConfig, "unknown campaign kind '" + kind + "'", "kind");
}

inline CampaignSpec load_campaign(const std::filesystem::path& file) {
  return campaign_from_json(parse_json_text(read_file(file), file.string()), file.parent_path());
}

}  // namespace aeroexec::montecarlo
