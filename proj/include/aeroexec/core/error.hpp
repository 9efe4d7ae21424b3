#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aeroexec {

enum class Errc {
  UnknownLeafName,
  StructuralViolation,
  BadParam,
  DuplicateRegistration,
  ResetWhileRunning,
  TreeHalted,
  UnknownNodeId,
  MissingKey,
  TypeMismatch,
  BindToFinal,
  InvalidTable,
  NotInitialized,
  NoActiveTree,
  NonPositiveSpeed,
  BadGeometry,
  NoTreeForState,
  NonMonotonicTimestamp,
  BadThresholdOrder,
  SyntaxError,
  SchemaError,
  UnsupportedVersion,
  InvalidCursor,
  BadSchedule,
  AlreadyBound,
  WiringError,
  SessionClosed,
  NotIdle,
  IllegalLifecycle,
  BadConfig,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownLeafName: return "UnknownLeafName";
    case Errc::StructuralViolation: return "StructuralViolation";
    case Errc::BadParam: return "BadParam";
    case Errc::DuplicateRegistration: return "DuplicateRegistration";
    case Errc::ResetWhileRunning: return "ResetWhileRunning";
    case Errc::TreeHalted: return "TreeHalted";
    case Errc::UnknownNodeId: return "UnknownNodeId";
    case Errc::MissingKey: return "MissingKey";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::BindToFinal: return "BindToFinal";
    case Errc::InvalidTable: return "InvalidTable";
    case Errc::NotInitialized: return "NotInitialized";
    case Errc::NoActiveTree: return "NoActiveTree";
    case Errc::NonPositiveSpeed: return "NonPositiveSpeed";
    case Errc::BadGeometry: return "BadGeometry";
    case Errc::NoTreeForState: return "NoTreeForState";
    case Errc::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case Errc::BadThresholdOrder: return "BadThresholdOrder";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::InvalidCursor: return "InvalidCursor";
    case Errc::BadSchedule: return "BadSchedule";
    case Errc::AlreadyBound: return "AlreadyBound";
    case Errc::WiringError: return "WiringError";
    case Errc::SessionClosed: return "SessionClosed";
    case Errc::NotIdle: return "NotIdle";
    case Errc::IllegalLifecycle: return "IllegalLifecycle";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

/// Single exception type for the library. `code()` identifies the failure,
/// `path()` carries the offending field or node id where one exists.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string path = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        path_(std::move(path)) {}

  Errc code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  Errc code_;
  std::string path_;
};

}  // namespace aeroexec
