#pragma once

#include <optional>
#include <string_view>

namespace aeroexec::bt {

enum class NodeStatus { Success, Failure, Running };

/// Per-node lifecycle. `Idle` means not ticked since build/reset; the three
/// terminal/active values mirror the last reported status.
enum class Lifecycle { Idle, Running, Success, Failure, Halted };

enum class NodeKind { Sequence, Fallback, Parallel, Retry, Timeout, Inverter, Action, Condition };

constexpr std::string_view to_string(NodeStatus s) noexcept {
  switch (s) {
    case NodeStatus::Success: return "Success";
    case NodeStatus::Failure: return "Failure";
    case NodeStatus::Running: return "Running";
  }
  return "?";
}

constexpr std::string_view to_string(Lifecycle l) noexcept {
  switch (l) {
    case Lifecycle::Idle: return "Idle";
    case Lifecycle::Running: return "Running";
    case Lifecycle::Success: return "Success";
    case Lifecycle::Failure: return "Failure";
    case Lifecycle::Halted: return "Halted";
  }
  return "?";
}

constexpr std::string_view to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::Sequence: return "Sequence";
    case NodeKind::Fallback: return "Fallback";
    case NodeKind::Parallel: return "Parallel";
    case NodeKind::Retry: return "Retry";
    case NodeKind::Timeout: return "Timeout";
    case NodeKind::Inverter: return "Inverter";
    case NodeKind::Action: return "Action";
    case NodeKind::Condition: return "Condition";
  }
  return "?";
}

inline std::optional<NodeKind> parse_node_kind(std::string_view s) {
  for (auto k : {NodeKind::Sequence, NodeKind::Fallback, NodeKind::Parallel, NodeKind::Retry, NodeKind::Timeout,
                 NodeKind::Inverter, NodeKind::Action, NodeKind::Condition}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline std::optional<NodeStatus> parse_status(std::string_view s) {
  if (s == "Success") return NodeStatus::Success;
  if (s == "Failure") return NodeStatus::Failure;
  if (s == "Running") return NodeStatus::Running;
  return std::nullopt;
}

constexpr bool is_leaf(NodeKind k) noexcept { return k == NodeKind::Action || k == NodeKind::Condition; }
constexpr bool is_decorator(NodeKind k) noexcept {
  return k == NodeKind::Retry || k == NodeKind::Timeout || k == NodeKind::Inverter;
}

}  // namespace aeroexec::bt
