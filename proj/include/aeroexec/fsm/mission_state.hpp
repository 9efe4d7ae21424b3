#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace aeroexec::fsm {

enum class MissionState { Idle, Init, PreChecks, Takeoff, Mission, Land, EmergencyLand, Terminate };

inline constexpr std::array<MissionState, 8> kAllStates = {
    MissionState::Idle,    MissionState::Init, MissionState::PreChecks,     MissionState::Takeoff,
    MissionState::Mission, MissionState::Land, MissionState::EmergencyLand, MissionState::Terminate};

constexpr std::string_view to_string(MissionState s) noexcept {
  switch (s) {
    case MissionState::Idle: return "Idle";
    case MissionState::Init: return "Init";
    case MissionState::PreChecks: return "PreChecks";
    case MissionState::Takeoff: return "Takeoff";
    case MissionState::Mission: return "Mission";
    case MissionState::Land: return "Land";
    case MissionState::EmergencyLand: return "EmergencyLand";
    case MissionState::Terminate: return "Terminate";
  }
  return "?";
}

constexpr std::size_t index_of(MissionState s) noexcept { return static_cast<std::size_t>(s); }

inline std::optional<MissionState> parse_state(std::string_view s) {
  for (auto st : kAllStates)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

}  // namespace aeroexec::fsm
