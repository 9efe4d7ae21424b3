#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>

#include "aeroexec/coordinator/realtime_driver.hpp"
#include "aeroexec/gcs/telemetry.hpp"

namespace aeroexec::gcs {

struct EventAck {
  std::string name;
  bool accepted = false;
  bool advisory = false;  // no table row uses this event
  double enqueued_at = 0.0;  // sim time of the latest frame

  json to_json() const {
    json j{{"v", 1}, {"name", name}, {"accepted", accepted}, {"enqueued_at", enqueued_at}, {"advisory", advisory}};
    if (advisory) j["note"] = "unknown event; absorbed as a self-transition";
    return j;
  }
};

/// One simulated mission driven in real time for operator clients. Commands
/// may come from any thread; the autonomy is only touched through the event
/// queue, the staged-plan mailbox and the lifecycle commands below.
class SimSession {
 public:
  explicit SimSession(coordinator::RunConfig base = {}, std::optional<mission::MissionPlan> plan = std::nullopt)
      : base_(std::move(base)), staged_(std::move(plan)) {
    publish_idle();
  }
  ~SimSession() { stop(); }

  SimSession(const SimSession&) = delete;
  SimSession& operator=(const SimSession&) = delete;

  /// Parses and validates; a rejected upload keeps the previous plan.
  void upload_plan(std::string_view text) {
    std::lock_guard lock(mu_);
    if (lifecycle_locked() != Lifecycle::Idle) throw Error(Errc::NotIdle, "plans can only be uploaded while Idle");
    auto plan = mission::parse_plan(text);
    const auto report = mission::validate_plan(plan);
    if (!report.ok()) throw Error(Errc::SchemaError, report.violations.front().message, "waypoints");
    staged_ = std::move(plan);
  }

  std::optional<mission::MissionPlan> staged_plan() const {
    std::lock_guard lock(mu_);
    return staged_;
  }

  void start() {
    std::lock_guard lock(mu_);
    if (lifecycle_locked() != Lifecycle::Idle) illegal("start", "Idle");
    if (!staged_) throw Error(Errc::IllegalLifecycle, "start needs a staged plan");
    auto cfg = base_;
    cfg.plan = *staged_;
    runtime_ = std::make_unique<coordinator::MissionRuntime>(std::move(cfg));
    runtime_->start();
    driver_ = std::make_unique<coordinator::RealtimeDriver>(*runtime_, speed_);
    driver_->on_cycle([this](const coordinator::CycleReport& r) { on_cycle(r); });
    driver_->on_paused([this] {
      if (slot_.latest()->lifecycle != Lifecycle::Paused) publish_from_runtime(Lifecycle::Paused);
    });
    finished_ = false;
    paused_ = false;
    last_publish_ = {};
    publish_from_runtime(Lifecycle::Running);
    driver_->start();
  }

  void pause() {
    std::lock_guard lock(mu_);
    if (lifecycle_locked() != Lifecycle::Running) illegal("pause", "Running");
    paused_ = true;
    driver_->set_paused(true);
  }

  void resume() {
    std::lock_guard lock(mu_);
    if (lifecycle_locked() != Lifecycle::Paused) illegal("resume", "Paused");
    paused_ = false;
    driver_->set_paused(false);
  }

  void set_speed(double multiplier) {
    std::lock_guard lock(mu_);
    if (!(multiplier >= 0.1 && multiplier <= 100.0)) throw Error(Errc::BadParam, "speed multiplier must lie in [0.1, 100]");
    speed_ = multiplier;
    if (driver_) driver_->set_speed(multiplier);
  }

  /// Back to Idle with a fresh plant; the staged plan is kept.
  void reset() {
    std::lock_guard lock(mu_);
    stop_locked();
    publish_idle();
  }

  EventAck post_event(const std::string& name) {
    if (name.empty()) throw Error(Errc::BadParam, "event name must be non-empty", "name");
    std::lock_guard lock(mu_);
    const auto l = lifecycle_locked();
    if (l != Lifecycle::Running && l != Lifecycle::Paused)
      throw Error(Errc::SessionClosed, "no running simulation to receive events");
    EventAck ack;
    ack.name = name;
    ack.advisory = !known_event(name);
    ack.accepted = runtime_->coordinator().enqueue_event(name, fsm::EventSource::External);
    ack.enqueued_at = slot_.latest()->sim_time;
    return ack;
  }

  Lifecycle lifecycle() const {
    std::lock_guard lock(mu_);
    return lifecycle_locked();
  }
  double speed() const {
    std::lock_guard lock(mu_);
    return speed_;
  }

  FrameSlot::Ptr latest_frame() const { return slot_.latest(); }

  /// Dispatches a `POST /sim` command.
  json command(const std::string& cmd, const json& arg = nullptr) {
    if (cmd == "start") start();
    else if (cmd == "pause") pause();
    else if (cmd == "resume") resume();
    else if (cmd == "reset") reset();
    else if (cmd == "set_speed") {
      if (!arg.is_number()) throw Error(Errc::BadParam, "set_speed needs a numeric arg", "arg");
      set_speed(arg.get<double>());
    } else {
      throw Error(Errc::BadParam, "unknown sim command '" + cmd + "'", "cmd");
    }
    return {{"v", 1}, {"ok", true}, {"cmd", cmd}, {"lifecycle", to_string(lifecycle())}, {"speed", speed()}};
  }

  void stop() {
    std::lock_guard lock(mu_);
    stop_locked();
  }

 private:
  static constexpr auto kMinPublishGap = std::chrono::milliseconds(10);

  [[noreturn]] void illegal(const char* cmd, const char* needs) const {
    throw Error(Errc::IllegalLifecycle, std::string(cmd) + " needs a " + needs + " session, not " +
                                            std::string(to_string(lifecycle_locked())));
  }

  Lifecycle lifecycle_locked() const {
    if (!runtime_) return Lifecycle::Idle;
    if (finished_) return Lifecycle::Finished;
    return paused_ ? Lifecycle::Paused : Lifecycle::Running;
  }

  bool known_event(const std::string& name) const {
    for (const auto& [key, _] : runtime_->machine().table().rows())
      if (key.second == name) return true;
    return false;
  }

  // Loop thread. Frames are published at most every few ms, and always on a
  // state change or when the mission ends.
  void on_cycle(const coordinator::CycleReport& r) {
    const bool done = runtime_->done();
    const auto now = std::chrono::steady_clock::now();
    if (!done && !r.transition && now - last_publish_ < kMinPublishGap) return;
    last_publish_ = now;
    if (done) finished_ = true;
    publish_from_runtime(done ? Lifecycle::Finished : paused_ ? Lifecycle::Paused : Lifecycle::Running);
  }

  void publish_from_runtime(Lifecycle l) {
    slot_.publish(capture(*runtime_, l, ++frames_, speed_.load()));
  }

  void publish_idle() {
    TelemetryFrame f;
    f.frame = ++frames_;
    f.lifecycle = Lifecycle::Idle;
    f.vehicle.position = base_.vehicle.home;
    f.vehicle.battery_fraction = base_.vehicle.initial_battery;
    f.speed = speed_.load();
    slot_.publish(std::move(f));
  }

  void stop_locked() {
    if (driver_) driver_->stop();
    driver_.reset();
    runtime_.reset();
    finished_ = false;
    paused_ = false;
  }

  coordinator::RunConfig base_;
  std::optional<mission::MissionPlan> staged_;
  mutable std::mutex mu_;
  std::unique_ptr<coordinator::MissionRuntime> runtime_;
  std::unique_ptr<coordinator::RealtimeDriver> driver_;
  std::atomic<double> speed_{1.0};
  std::atomic<bool> finished_{false};
  std::atomic<bool> paused_{false};
  std::atomic<std::uint64_t> frames_{0};
  std::chrono::steady_clock::time_point last_publish_{};
  FrameSlot slot_;
};

}  // namespace aeroexec::gcs
