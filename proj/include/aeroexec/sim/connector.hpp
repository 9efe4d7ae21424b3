#pragma once

#include <utility>

#include "aeroexec/sim/vehicle.hpp"

namespace aeroexec::sim {

class Connector;

/// The autonomy side's handle on a bound backend. Move-only; unbinds on destruction.
class Session {
 public:
  Session() = default;
  Session(Session&& o) noexcept : owner_(std::exchange(o.owner_, nullptr)), backend_(std::exchange(o.backend_, nullptr)) {}
  Session& operator=(Session&& o) noexcept {
    if (this != &o) {
      release();
      owner_ = std::exchange(o.owner_, nullptr);
      backend_ = std::exchange(o.backend_, nullptr);
    }
    return *this;
  }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;
  ~Session() { release(); }

  bool bound() const noexcept { return backend_ != nullptr; }

  CommandResult send(const VehicleCommand& cmd) { return backend().apply_command(cmd); }
  VehicleState state() const { return backend().state(); }
  HealthSample health() const { return backend().health(); }
  bool ready() const { return backend().ready(); }
  void enable_detector(bool on) { backend().enable_detector(on); }
  double max_speed() const { return backend().max_speed(); }

  inline void release();

 private:
  friend class Connector;
  Session(Connector* owner, VehicleBackend* backend) : owner_(owner), backend_(backend) {}

  VehicleBackend& backend() const {
    if (!backend_) throw Error(Errc::NotInitialized, "session is not bound to a vehicle");
    return *backend_;
  }

  Connector* owner_ = nullptr;
  VehicleBackend* backend_ = nullptr;
};

/// Decouples behaviors from the vehicle implementation. One autonomy session at a time.
class Connector {
 public:
  explicit Connector(VehicleBackend& backend) : backend_(&backend) {}
  Connector(const Connector&) = delete;
  Connector& operator=(const Connector&) = delete;

  Session bind() {
    if (bound_) throw Error(Errc::AlreadyBound, "connector already has an autonomy session");
    bound_ = true;
    return Session(this, backend_);
  }

  bool bound() const noexcept { return bound_; }
  VehicleBackend& backend() noexcept { return *backend_; }

 private:
  friend class Session;
  VehicleBackend* backend_;
  bool bound_ = false;
};

inline void Session::release() {
  if (owner_) owner_->bound_ = false;
  owner_ = nullptr;
  backend_ = nullptr;
}

}  // namespace aeroexec::sim
