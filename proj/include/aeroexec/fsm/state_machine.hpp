#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <optional>
#include <utility>

#include "aeroexec/bt/factory.hpp"
#include "aeroexec/fsm/transition_table.hpp"

namespace aeroexec::fsm {

struct StateHooks {
  std::function<void()> on_enter;
  std::function<void()> on_exit;
};

/// Mission-phase state machine with one behavior tree per non-final state.
/// Mutated only from the coordinator loop; `published()` may be read anywhere.
class StateMachine {
 public:
  struct Change {
    MissionState from;
    MissionState to;
    std::vector<std::string> halted;  // nodes of the old tree, leaf-to-root
  };

  StateMachine(TransitionTable table, const bt::NodeRegistry& registry, bt::Blackboard& blackboard)
      : table_(std::move(table)), registry_(&registry), bb_(&blackboard), current_(table_.initial()) {
    published_.store(current_);
  }

  StateMachine(const StateMachine&) = delete;
  StateMachine& operator=(const StateMachine&) = delete;

  void bind_state(MissionState state, const json& tree_spec, StateHooks hooks = {}) {
    if (table_.is_final(state))
      throw Error(Errc::BindToFinal, "final state " + std::string(to_string(state)) + " carries no tree");
    auto& slot = slots_[index_of(state)];
    slot.spec = tree_spec;
    slot.tree.emplace(bt::build_tree(tree_spec, *registry_, *bb_));
    slot.hooks = std::move(hooks);
  }

  /// Hooks without a tree, e.g. for Idle.
  void set_hooks(MissionState state, StateHooks hooks) { slots_[index_of(state)].hooks = std::move(hooks); }

  void start() {
    auto report = validate_table(table_);
    if (!report.pass) throw Error(Errc::InvalidTable, "transition table failed validation\n" + report.to_text());
    started_ = true;
    current_ = table_.initial();
    enter(current_);
  }

  bool started() const noexcept { return started_; }
  MissionState current() const noexcept { return current_; }
  MissionState published() const noexcept { return published_.load(std::memory_order_acquire); }
  bool is_final() const { return table_.is_final(current_); }
  const TransitionTable& table() const noexcept { return table_; }
  std::uint64_t epoch() const noexcept { return epoch_; }

  bool has_tree(MissionState s) const { return slots_[index_of(s)].tree.has_value(); }
  bt::BehaviorTree* active_tree() {
    auto& t = slots_[index_of(current_)].tree;
    return t ? &*t : nullptr;
  }
  const bt::BehaviorTree* active_tree() const {
    const auto& t = slots_[index_of(current_)].tree;
    return t ? &*t : nullptr;
  }
  bt::BehaviorTree* tree(MissionState s) {
    auto& t = slots_[index_of(s)].tree;
    return t ? &*t : nullptr;
  }
  const json* tree_spec(MissionState s) const {
    const auto& slot = slots_[index_of(s)];
    return slot.tree ? &slot.spec : nullptr;
  }

  /// Leaves the current state (halting its tree) and enters `to`; `to` may equal
  /// the current state for a re-entry.
  Change change_state(MissionState to) {
    if (!started_) throw Error(Errc::NotInitialized, "state machine not started");
    Change change{current_, to, {}};
    auto& old = slots_[index_of(current_)];
    if (old.tree) change.halted = old.tree->halt().halted;
    if (old.hooks.on_exit) old.hooks.on_exit();
    current_ = to;
    enter(to);
    return change;
  }

 private:
  struct Slot {
    json spec;
    std::optional<bt::BehaviorTree> tree;
    StateHooks hooks;
  };

  void enter(MissionState s) {
    ++epoch_;
    published_.store(s, std::memory_order_release);
    auto& slot = slots_[index_of(s)];
    if (slot.hooks.on_enter) slot.hooks.on_enter();
    if (slot.tree) {
      slot.tree->halt();
      slot.tree->reset();
    }
  }

  TransitionTable table_;
  const bt::NodeRegistry* registry_;
  bt::Blackboard* bb_;
  std::array<Slot, kAllStates.size()> slots_;
  MissionState current_;
  std::atomic<MissionState> published_;
  bool started_ = false;
  std::uint64_t epoch_ = 0;
};

}  // namespace aeroexec::fsm
