#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aeroexec/behaviors/leaves.hpp"
#include "aeroexec/coordinator/coordinator.hpp"
#include "aeroexec/healthguard/healthguard.hpp"
#include "aeroexec/sim/sim_vehicle.hpp"

namespace aeroexec::coordinator {

/// Direct event injection. With `state` set it fires `delay` seconds after the
/// FSM first enters that state; otherwise at absolute sim time `delay`.
struct EventInjection {
  std::string name;
  std::optional<fsm::MissionState> state;
  double delay = 2.0;
};

/// Plant fault; with `state` set, `fault.start` is relative to the first entry.
struct FaultTrigger {
  sim::FaultInjection fault;
  std::optional<fsm::MissionState> state;
};

struct RunConfig {
  mission::MissionPlan plan;
  sim::PlantConfig vehicle;
  behaviors::BehaviorParams behaviors;
  healthguard::ThresholdConfig health;
  LoopConfig loop;
  std::vector<FaultTrigger> faults;
  std::vector<EventInjection> events;
  std::optional<fsm::TransitionTable> table;  // canonical when empty
  double time_limit = 0.0;                    // 0 = twice the endurance estimate
  std::uint64_t seed = 1;
};

/// Rough flight time for the plan at plant speed, including takeoff and landing search.
inline double estimate_mission_time(const mission::MissionPlan& plan, const sim::PlantConfig& v,
                                    const behaviors::BehaviorParams& b) {
  double t = v.boot_time + plan.cruise_altitude / b.ascent_speed + b.takeoff_floor;
  Vec3 prev{v.home.x, v.home.y, v.home.z + plan.cruise_altitude};
  for (const auto& wp : plan.waypoints) {
    const double speed = std::min(wp.speed.value_or(v.v_max), v.v_max);
    t += distance(prev, wp.position) / speed + 2.0 * v.tau;
    for (const auto& task : wp.tasks)
      t += std::holds_alternative<mission::ScienceTask>(task) ? std::get<mission::ScienceTask>(task).duration_s
                                                              : b.search_dwell;
    prev = wp.position;
  }
  const int legs = static_cast<int>(b.search_extent / b.search_spacing) + 1;
  t += (legs * b.search_extent + (legs - 1) * b.search_spacing + b.search_extent) / v.v_max;
  t += plan.cruise_altitude / b.touchdown_speed;
  return t;
}

struct RunResult {
  fsm::MissionState final_state{};
  bool crashed = false;
  bool timed_out = false;
  double sim_time = 0.0;
  double distance_flown = 0.0;
  std::uint64_t cycles = 0;
  std::vector<TransitionRecord> transitions;
  std::vector<PoppedEvent> events;
  std::vector<behaviors::TaskRecord> tasks;
  std::vector<healthguard::HealthEvent> health_events;
};

/// One mission: plant, connector, healthguard, behaviors, FSM and coordinator
/// wired together and driven on a simulated clock.
class MissionRuntime {
 public:
  explicit MissionRuntime(RunConfig config, std::unique_ptr<sim::VehicleBackend> backend = nullptr)
      : cfg_(std::move(config)),
        backend_(backend ? std::move(backend) : std::make_unique<sim::SimVehicle>(cfg_.vehicle, cfg_.seed)),
        connector_(*backend_),
        session_(connector_.bind()),
        fsm_(cfg_.table ? *cfg_.table : fsm::TransitionTable::canonical(), registry_, bb_),
        coord_(fsm_, cfg_.loop),
        guard_(cfg_.health) {
    ctx_.vehicle = &session_;
    ctx_.plan = &cfg_.plan;
    ctx_.params = cfg_.behaviors;
    ctx_.emit = [this](std::string_view e) { coord_.enqueue_event(std::string(e), fsm::EventSource::Internal); };
    behaviors::register_behaviors(registry_, ctx_);
    for (auto s : fsm::kAllStates) {
      if (fsm_.table().is_final(s) || s == fsm::MissionState::Idle) continue;
      fsm_.bind_state(s, behaviors::build_state_tree(s, &cfg_.plan));
    }
    if (!(cfg_.time_limit > 0.0))
      cfg_.time_limit = std::max(300.0, 2.0 * estimate_mission_time(cfg_.plan, cfg_.vehicle, cfg_.behaviors));
    health_every_ = std::max<std::uint64_t>(1, std::llround(1.0 / (cfg_.health.rate_hz * cfg_.loop.tick_period)));
    coord_.on_transition([this](const TransitionRecord& t) { entered(t); });
    coord_.on_hold([this] { session_.send(sim::VehicleCommand::hold()); });
    pending_events_.assign(cfg_.events.begin(), cfg_.events.end());
    pending_faults_.assign(cfg_.faults.begin(), cfg_.faults.end());
  }

  MissionRuntime(const MissionRuntime&) = delete;
  MissionRuntime& operator=(const MissionRuntime&) = delete;

  /// Starts the FSM in its initial state and queues Start.
  void start() {
    coord_.start();
    entered_at_[coord_.state()] = now_;
    coord_.enqueue_event(std::string(fsm::events::Start), fsm::EventSource::External);
  }

  /// One cycle: injections, plant step, blackboard refresh, health sampling, coordinator cycle.
  CycleReport step() {
    if (!coord_.machine().started()) throw Error(Errc::NotInitialized, "runtime not started");
    const double dt = cfg_.loop.tick_period;
    fire_injections();
    const Vec3 before = backend_->state().position;
    auto found = backend_->step(dt);
    now_ += dt;
    const auto st = backend_->state();
    distance_ += distance(before, st.position);
    refresh_blackboard(st, found);
    if (++cycles_ % health_every_ == 0) sample_health();
    auto report = coord_.run_cycle(now_);
    if (trace_) write_trace(st);
    return report;
  }

  bool done() const { return coord_.finished() || backend_->crashed() || now_ >= cfg_.time_limit - 1e-9; }

  RunResult run() {
    if (!coord_.machine().started()) start();
    while (!done()) step();
    return result();
  }

  RunResult result() const {
    RunResult r;
    r.final_state = coord_.state();
    r.crashed = backend_->crashed();
    r.timed_out = !coord_.finished() && !r.crashed && now_ >= cfg_.time_limit - 1e-9;
    r.sim_time = now_;
    r.distance_flown = distance_;
    r.cycles = cycles_;
    r.transitions = coord_.transitions();
    r.events = coord_.events();
    r.tasks = ctx_.tasks;
    r.health_events = guard_.log();
    return r;
  }

  /// CSV `t,x,y,z,vx,vy,vz,battery,conf,armed,state`, one row per cycle.
  void set_trace(std::ostream* os) {
    trace_ = os;
    if (trace_) *trace_ << "t,x,y,z,vx,vy,vz,battery,conf,armed,state\n";
  }

  double sim_time() const noexcept { return now_; }
  const RunConfig& config() const noexcept { return cfg_; }
  Coordinator& coordinator() noexcept { return coord_; }
  const Coordinator& coordinator() const noexcept { return coord_; }
  const fsm::StateMachine& machine() const noexcept { return fsm_; }
  bt::BehaviorTree* tree(fsm::MissionState s) { return fsm_.tree(s); }
  const bt::Blackboard& blackboard() const noexcept { return bb_; }
  sim::VehicleBackend& backend() noexcept { return *backend_; }
  const sim::VehicleBackend& backend() const noexcept { return *backend_; }
  const healthguard::Healthguard& health() const noexcept { return guard_; }

 private:
  static constexpr std::size_t kSiteCacheLimit = 256;

  void entered(const TransitionRecord& t) {
    entered_at_.try_emplace(t.to, now_);
    using enum fsm::MissionState;
    if (t.to == EmergencyLand) bb_.set(behaviors::keys::EmergencyTrigger, t.event);
    if (t.to == Land) {
      bb_.erase(behaviors::keys::LandingTarget);
      bb_.erase(behaviors::keys::SearchDone);
    }
  }

  void fire_injections() {
    auto due = [&](const std::optional<fsm::MissionState>& s, double offset) -> std::optional<double> {
      if (!s) return offset;
      auto it = entered_at_.find(*s);
      if (it == entered_at_.end()) return std::nullopt;
      return it->second + offset;
    };
    for (auto it = pending_events_.begin(); it != pending_events_.end();) {
      auto at = due(it->state, it->delay);
      if (at && now_ >= *at - 1e-9) {
        coord_.enqueue_event(it->name, fsm::EventSource::External);
        it = pending_events_.erase(it);
      } else {
        ++it;
      }
    }
    for (auto it = pending_faults_.begin(); it != pending_faults_.end();) {
      auto at = due(it->state, it->fault.start);
      if (at) {
        auto f = it->fault;
        f.start = std::max(*at, now_);
        backend_->inject_fault(f);
        it = pending_faults_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void refresh_blackboard(const sim::VehicleState& st, const LandingSiteList& found) {
    namespace k = behaviors::keys;
    bb_.set(k::VehiclePosition, st.position);
    bb_.set(k::VehicleVelocity, st.velocity);
    bb_.set(k::VehicleBattery, st.battery_fraction);
    bb_.set(k::VehicleArmed, st.armed);
    bb_.set(k::VehicleOnGround, st.on_ground);
    bb_.set(k::EstimatorConfidence, backend_->health().estimator_confidence);
    if (!found.empty()) {
      sites_.insert(sites_.end(), found.begin(), found.end());
      if (sites_.size() > kSiteCacheLimit) sites_.erase(sites_.begin(), sites_.end() - kSiteCacheLimit);
      bb_.set(k::LandingSites, sites_);
    }
  }

  void sample_health() {
    auto s = backend_->health();
    s.site_required = coord_.state() == fsm::MissionState::Land;
    s.landing_sites_cached = 0;
    for (const auto& site : sites_)
      if (site.confidence >= cfg_.behaviors.min_confidence) ++s.landing_sites_cached;
    for (const auto& e : guard_.ingest(s)) {
      auto ev = fsm::make_event(e.event, fsm::EventSource::Health);
      ev.sim_time = e.t;
      ev.payload["trigger_value"] = e.trigger_value;
      coord_.enqueue_event(std::move(ev));
    }
  }

  void write_trace(const sim::VehicleState& st) {
    *trace_ << now_ << ',' << st.position.x << ',' << st.position.y << ',' << st.position.z << ',' << st.velocity.x
            << ',' << st.velocity.y << ',' << st.velocity.z << ',' << st.battery_fraction << ','
            << backend_->health().estimator_confidence << ',' << (st.armed ? 1 : 0) << ','
            << to_string(coord_.state()) << '\n';
  }

  RunConfig cfg_;
  std::unique_ptr<sim::VehicleBackend> backend_;
  sim::Connector connector_;
  sim::Session session_;
  bt::NodeRegistry registry_;
  bt::Blackboard bb_;
  behaviors::BehaviorContext ctx_;
  fsm::StateMachine fsm_;
  Coordinator coord_;
  healthguard::Healthguard guard_;
  std::vector<EventInjection> pending_events_;
  std::vector<FaultTrigger> pending_faults_;
  std::map<fsm::MissionState, double> entered_at_;
  LandingSiteList sites_;
  std::ostream* trace_ = nullptr;
  double now_ = 0.0;
  double distance_ = 0.0;
  std::uint64_t cycles_ = 0;
  std::uint64_t health_every_ = 5;
};

}  // namespace aeroexec::coordinator
