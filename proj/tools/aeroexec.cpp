#include <CLI11.hpp>

#include <boost/asio/signal_set.hpp>

#include <fstream>
#include <iostream>

#include "aeroexec/gcs/server.hpp"
#include "aeroexec/montecarlo/campaign.hpp"

using namespace aeroexec;
namespace mc = aeroexec::montecarlo;

namespace {

constexpr int kValidationFailed = 2;
constexpr int kUsageError = 1;

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& trace_path,
            const std::string& log_path) {
  auto cfg = mc::load_run_config(config);
  if (seed) cfg.seed = *seed;
  coordinator::MissionRuntime rt(cfg);
  std::ofstream trace, log;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    rt.set_trace(&trace);
  }
  if (!log_path.empty()) {
    log.open(log_path);
    rt.coordinator().on_cycle([&](const coordinator::CycleReport& r) { log << coordinator::to_json_value(r).dump() << '\n'; });
  }
  const auto result = rt.run();
  const auto outcome = mc::make_outcome(rt, result, cfg.seed, "run");
  const auto verdict = mc::verify_trial(outcome, rt.machine().table());
  auto j = mc::outcome_to_json(outcome, verdict);
  json tasks = json::array();
  for (const auto& t : result.tasks)
    tasks.push_back({{"waypoint", t.waypoint_id}, {"kind", t.kind}, {"label", t.label}, {"started", t.started}, {"finished", t.finished}});
  j["tasks"] = std::move(tasks);
  std::cout << j.dump(2) << '\n';
  if (outcome.classification == mc::Classification::Crash || outcome.classification == mc::Classification::Timeout) return 4;
  return verdict.ok() ? 0 : 3;
}

int cmd_campaign(const std::string& spec_path, const std::string& out, unsigned jobs, bool quiet) {
  const auto spec = mc::load_campaign(spec_path);
  const auto report = mc::run_campaign(spec, jobs, [&](std::size_t done, std::size_t total) {
    if (!quiet) std::cerr << "\rtrials " << done << "/" << total << std::flush;
  });
  if (!quiet && !spec.trials.empty()) std::cerr << '\n';
  mc::write_report(report, out);
  std::cout << mc::summary_json(report).dump(2) << '\n';
  return report.exit_code();
}

int cmd_fsm_validate(const std::string& path) {
  try {
    const auto table = fsm::TransitionTable::from_json(mc::parse_json_text(mc::read_file(path), path));
    const auto report = fsm::validate_table(table);
    std::cout << report.to_text();
    return report.pass ? 0 : kValidationFailed;
  } catch (const Error& e) {
    std::cout << "verdict: fail\nerror: " << e.what() << '\n';
    return kValidationFailed;
  }
}

int cmd_plan_validate(const std::string& path) {
  try {
    const auto plan = mission::parse_plan(mc::read_file(path));
    const auto report = mission::validate_plan(plan);
    std::cout << "verdict: " << (report.ok() ? "pass" : "fail") << '\n'
              << "waypoints: " << plan.waypoints.size() << '\n'
              << "path_length_m: " << mission::path_length(plan) << '\n';
    for (const auto& v : report.violations) std::cout << "violation: " << v.message << '\n';
    return report.ok() ? 0 : kValidationFailed;
  } catch (const Error& e) {
    std::cout << "verdict: fail\nerror: " << e.what() << '\n';
    if (!e.path().empty()) std::cout << "path: " << e.path() << '\n';
    return kValidationFailed;
  }
}

int cmd_serve(const std::string& config, const std::string& plan, gcs::ServerConfig server_cfg, double speed) {
  coordinator::RunConfig base;
  std::optional<mission::MissionPlan> staged;
  if (!config.empty()) {
    base = mc::load_run_config(config);
    staged = base.plan;
  }
  if (!plan.empty()) staged = mission::parse_plan(mc::read_file(plan));
  gcs::SimSession session(base, staged);
  session.set_speed(speed);
  gcs::GcsServer server(session, server_cfg);
  boost::asio::signal_set signals(server.context(), SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) { server.context().stop(); });
  server.start();
  std::cerr << "aeroexec: serving on http://" << server_cfg.address << ":" << server.port()
            << " (telemetry at ws://" << server_cfg.address << ":" << server.port() << "/telemetry)\n";
  server.wait();
  session.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mission executive: FSM + behavior trees over a simulated vehicle"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Fly one mission from a run config and print its outcome");
  std::string run_config, trace_path, log_path;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", run_config, "Run config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--trace", trace_path, "Write a per-cycle vehicle trace (CSV)");
  run->add_option("--log", log_path, "Write the per-cycle coordinator log (JSON lines)");

  auto* campaign = app.add_subcommand("campaign", "Run a Monte Carlo campaign and write a report");
  std::string spec_path, out_dir = "report";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
  campaign->add_option("--spec", spec_path, "Campaign JSON")->required()->check(CLI::ExistingFile);
  campaign->add_option("--out", out_dir, "Report directory");
  campaign->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
  campaign->add_flag("--quiet", quiet, "No progress on stderr");

  auto* fsm_cmd = app.add_subcommand("fsm", "Transition table tools");
  fsm_cmd->require_subcommand(1);
  auto* fsm_validate = fsm_cmd->add_subcommand("validate", "Check reachability and paths to a final state");
  std::string table_path;
  fsm_validate->add_option("table", table_path, "Transition table JSON")->required();

  auto* plan_cmd = app.add_subcommand("plan", "Mission plan tools");
  plan_cmd->require_subcommand(1);
  auto* plan_validate = plan_cmd->add_subcommand("validate", "Parse and check a mission plan");
  std::string plan_path;
  plan_validate->add_option("plan", plan_path, "Mission plan JSON")->required();

  auto* serve = app.add_subcommand("serve", "Ground-control HTTP/WebSocket service");
  gcs::ServerConfig server_cfg;
  server_cfg.port = 8080;
  std::string serve_config, serve_plan;
  double speed = 1.0;
  serve->add_option("--config", serve_config, "Run config providing vehicle/behaviors/healthguard and an initial plan");
  serve->add_option("--plan", serve_plan, "Plan to stage at startup");
  serve->add_option("--address", server_cfg.address, "Listen address");
  serve->add_option("--port", server_cfg.port, "Listen port (0 picks one)");
  serve->add_option("--rate", server_cfg.frame_rate_hz, "Telemetry frames per second")->check(CLI::PositiveNumber);
  serve->add_option("--speed", speed, "Sim speed multiplier")->check(CLI::Range(0.1, 100.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_config, seed, trace_path, log_path);
    if (*campaign) return cmd_campaign(spec_path, out_dir, jobs, quiet);
    if (*fsm_validate) return cmd_fsm_validate(table_path);
    if (*plan_validate) return cmd_plan_validate(plan_path);
    if (*serve) return cmd_serve(serve_config, serve_plan, server_cfg, speed);
  } catch (const Error& e) {
    std::cerr << "aeroexec: " << e.what();
    if (!e.path().empty()) std::cerr << " (at " << e.path() << ")";
    std::cerr << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "aeroexec: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
