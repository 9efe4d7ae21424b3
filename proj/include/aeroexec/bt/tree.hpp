#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aeroexec/bt/blackboard.hpp"
#include "aeroexec/bt/status.hpp"
#include "aeroexec/core/error.hpp"
#include "aeroexec/core/json.hpp"

namespace aeroexec::bt {

/// What a leaf sees when it is ticked.
struct LeafContext {
  double now = 0.0;
  bool first_tick = true;   // the leaf was not Running before this tick
  double started_at = 0.0;  // time of the first tick of the current run
  Blackboard& blackboard;
  std::string_view node_id;
  const json& params;

  double elapsed() const { return now - started_at; }
};

class Leaf {
 public:
  virtual ~Leaf() = default;
  virtual NodeStatus tick(LeafContext& ctx) = 0;
  /// Called when a Running leaf is interrupted (tree halt, timeout, parallel completion).
  virtual void halt() {}
  /// Called on tree reset.
  virtual void reset() {}
};

class FunctionLeaf final : public Leaf {
 public:
  using TickFn = std::function<NodeStatus(LeafContext&)>;
  using HaltFn = std::function<void()>;

  explicit FunctionLeaf(TickFn tick, HaltFn halt = {}) : tick_(std::move(tick)), halt_(std::move(halt)) {}

  NodeStatus tick(LeafContext& ctx) override { return tick_(ctx); }
  void halt() override {
    if (halt_) halt_();
  }

 private:
  TickFn tick_;
  HaltFn halt_;
};

/// Duration provider for dynamic Timeout decorators; evaluated when the child starts.
using DurationFn = std::function<double(const Blackboard&, double now)>;

class TreeBuilder;

/// Executable behavior tree. Nodes are stored in depth-first pre-order with the
/// root at index 0. Single-threaded: tick/halt/reset/set_skip belong to one
/// execution context.
class BehaviorTree {
 public:
  struct NodeView {
    std::string id;
    NodeKind kind;
    Lifecycle lifecycle;
  };

  struct TickRecord {
    std::uint64_t tick;
    std::string node_id;
    NodeStatus status;
  };

  struct HaltReport {
    std::vector<std::string> halted;  // leaf-to-root order
  };

  struct LeafFault {
    std::uint64_t tick;
    std::string node_id;
    std::string what;
  };

  BehaviorTree(BehaviorTree&&) noexcept = default;
  BehaviorTree& operator=(BehaviorTree&&) noexcept = default;

  NodeStatus tick(double now) {
    if (halted_) throw Error(Errc::TreeHalted, "tree '" + root_id() + "' is halted; reset before ticking");
    ++tick_count_;
    return tick_node(0, now);
  }

  HaltReport halt() {
    HaltReport report;
    if (halted_) return report;
    halted_ = true;
    halt_recursive(0, report);
    return report;
  }

  void reset() {
    if (!halted_) {
      for (const auto& n : nodes_) {
        if (n.life == Lifecycle::Running)
          throw Error(Errc::ResetWhileRunning, "node '" + n.id + "' is Running; halt the tree first", n.id);
      }
    }
    for (auto& n : nodes_) {
      n.life = Lifecycle::Idle;
      n.cursor = 0;
      n.attempts = 0;
      n.started_at = 0.0;
      n.duration = 0.0;
      n.skip = false;
      n.results.clear();
      if (n.leaf) n.leaf->reset();
    }
    halted_ = false;
  }

  void set_skip(std::string_view id, bool flag) { node(id).skip = flag; }

  bool halted() const noexcept { return halted_; }
  bool running() const noexcept { return nodes_.front().life == Lifecycle::Running; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::string& root_id() const { return nodes_.front().id; }
  std::uint64_t tick_count() const noexcept { return tick_count_; }

  Lifecycle lifecycle(std::string_view id) const { return node(id).life; }
  int attempts(std::string_view id) const { return node(id).attempts; }
  bool skip_flag(std::string_view id) const { return node(id).skip; }
  NodeKind kind(std::string_view id) const { return node(id).kind; }
  bool contains(std::string_view id) const { return index_.find(std::string(id)) != index_.end(); }

  std::vector<std::string> children(std::string_view id) const {
    std::vector<std::string> out;
    for (auto c : node(id).children) out.push_back(nodes_[c].id);
    return out;
  }

  /// Leaf registration name (empty for control nodes).
  const std::string& leaf_name(std::string_view id) const { return node(id).leaf_name; }

  std::vector<NodeView> snapshot() const {
    std::vector<NodeView> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back({n.id, n.kind, n.life});
    return out;
  }

  void enable_tick_log(bool on) { log_enabled_ = on; }
  const std::vector<TickRecord>& tick_log() const noexcept { return log_; }
  void clear_tick_log() { log_.clear(); }

  std::string tick_log_csv() const {
    std::ostringstream os;
    os << "tick_index,node_id,status\n";
    for (const auto& r : log_) os << r.tick << ',' << r.node_id << ',' << to_string(r.status) << '\n';
    return os.str();
  }

  const std::vector<LeafFault>& leaf_faults() const noexcept { return faults_; }

 private:
  friend class TreeBuilder;

  struct Node {
    std::string id;
    NodeKind kind = NodeKind::Action;
    std::vector<std::size_t> children;
    json params = json::object();
    std::string leaf_name;
    std::unique_ptr<Leaf> leaf;

    int max_attempts = 1;
    double fixed_duration = 0.0;
    DurationFn dynamic_duration;
    std::size_t success_threshold = 1;

    Lifecycle life = Lifecycle::Idle;
    bool skip = false;
    std::size_t cursor = 0;
    int attempts = 0;
    double started_at = 0.0;
    double duration = 0.0;
    std::vector<std::optional<NodeStatus>> results;
  };

  explicit BehaviorTree(Blackboard& bb) : bb_(&bb) {}

  Node& node(std::string_view id) {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw Error(Errc::UnknownNodeId, "no node '" + std::string(id) + "'", std::string(id));
    return nodes_[it->second];
  }
  const Node& node(std::string_view id) const { return const_cast<BehaviorTree*>(this)->node(id); }

  static Lifecycle to_lifecycle(NodeStatus s) {
    switch (s) {
      case NodeStatus::Success: return Lifecycle::Success;
      case NodeStatus::Failure: return Lifecycle::Failure;
      case NodeStatus::Running: return Lifecycle::Running;
    }
    return Lifecycle::Idle;
  }

  NodeStatus finish(std::size_t i, NodeStatus s) {
    Node& n = nodes_[i];
    n.life = to_lifecycle(s);
    if (log_enabled_) log_.push_back({tick_count_, n.id, s});
    return s;
  }

  void fault(const Node& n, std::string what) { faults_.push_back({tick_count_, n.id, std::move(what)}); }

  // Stops a Running subtree without reporting; nodes return to Idle so the
  // next tick starts them fresh.
  void interrupt(std::size_t i) {
    Node& n = nodes_[i];
    if (n.life != Lifecycle::Running) return;
    for (auto c : n.children) interrupt(c);
    if (n.leaf) n.leaf->halt();
    n.life = Lifecycle::Idle;
    n.results.clear();
  }

  void halt_recursive(std::size_t i, HaltReport& report) {
    Node& n = nodes_[i];
    if (n.life != Lifecycle::Running) return;
    for (auto c : n.children) halt_recursive(c, report);
    if (n.leaf) n.leaf->halt();
    n.life = Lifecycle::Halted;
    report.halted.push_back(n.id);
  }

  NodeStatus tick_node(std::size_t i, double now) {
    Node& n = nodes_[i];
    if (n.skip) {
      n.skip = false;
      interrupt(i);
      return finish(i, NodeStatus::Success);
    }
    const bool fresh = n.life != Lifecycle::Running;
    NodeStatus s = NodeStatus::Success;
    switch (n.kind) {
      case NodeKind::Sequence:
      case NodeKind::Fallback: {
        // Sequence stops on the first non-Success child, Fallback on the first non-Failure.
        const NodeStatus pass = n.kind == NodeKind::Sequence ? NodeStatus::Success : NodeStatus::Failure;
        if (fresh) n.cursor = 0;
        s = pass;
        while (n.cursor < n.children.size()) {
          s = tick_node(n.children[n.cursor], now);
          if (s != pass) break;
          ++n.cursor;
        }
        if (s != NodeStatus::Running) n.cursor = 0;
        break;
      }
      case NodeKind::Parallel: {
        const std::size_t total = n.children.size();
        if (fresh || n.results.size() != total) n.results.assign(total, std::nullopt);
        std::size_t succeeded = 0, failed = 0;
        for (std::size_t j = 0; j < total; ++j) {
          if (!n.results[j]) {
            NodeStatus c = tick_node(n.children[j], now);
            if (c != NodeStatus::Running) n.results[j] = c;
          }
          if (n.results[j] == NodeStatus::Success) ++succeeded;
          if (n.results[j] == NodeStatus::Failure) ++failed;
        }
        if (succeeded >= n.success_threshold) {
          s = NodeStatus::Success;
        } else if (failed > total - n.success_threshold) {
          s = NodeStatus::Failure;
        } else {
          s = NodeStatus::Running;
        }
        if (s != NodeStatus::Running) {
          for (auto c : n.children) interrupt(c);
          n.results.clear();
        }
        break;
      }
      case NodeKind::Retry: {
        if (fresh) n.attempts = 0;
        for (;;) {
          s = tick_node(n.children.front(), now);
          if (s != NodeStatus::Failure) break;
          if (++n.attempts >= n.max_attempts) break;
        }
        break;
      }
      case NodeKind::Timeout: {
        if (fresh) {
          n.started_at = now;
          n.duration = n.fixed_duration;
          if (n.dynamic_duration) {
            try {
              n.duration = n.dynamic_duration(*bb_, now);
            } catch (const std::exception& e) {
              fault(n, std::string("duration callback failed: ") + e.what());
              n.duration = 0.0;
            }
          }
          if (!(n.duration > 0.0)) {
            fault(n, "non-positive timeout duration");
            s = NodeStatus::Failure;
            break;
          }
        } else if (now - n.started_at >= n.duration) {
          interrupt(n.children.front());
          s = NodeStatus::Failure;
          break;
        }
        s = tick_node(n.children.front(), now);
        break;
      }
      case NodeKind::Inverter: {
        s = tick_node(n.children.front(), now);
        if (s == NodeStatus::Success) {
          s = NodeStatus::Failure;
        } else if (s == NodeStatus::Failure) {
          s = NodeStatus::Success;
        }
        break;
      }
      case NodeKind::Action:
      case NodeKind::Condition: {
        if (fresh) n.started_at = now;
        LeafContext ctx{now, fresh, n.started_at, *bb_, n.id, n.params};
        try {
          s = n.leaf->tick(ctx);
        } catch (const std::exception& e) {
          fault(n, e.what());
          s = NodeStatus::Failure;
        } catch (...) {
          fault(n, "unknown exception");
          s = NodeStatus::Failure;
        }
        // Conditions are instantaneous.
        if (n.kind == NodeKind::Condition && s == NodeStatus::Running) {
          fault(n, "condition returned Running");
          s = NodeStatus::Failure;
        }
        break;
      }
    }
    return finish(i, s);
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  Blackboard* bb_;
  bool halted_ = false;
  std::uint64_t tick_count_ = 0;
  bool log_enabled_ = false;
  std::vector<TickRecord> log_;
  std::vector<LeafFault> faults_;
};

}  // namespace aeroexec::bt
