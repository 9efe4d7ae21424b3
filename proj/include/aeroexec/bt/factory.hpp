#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>

#include "aeroexec/bt/tree.hpp"

namespace aeroexec::bt {

enum class LeafKind { Action, Condition };

using LeafFactory = std::function<std::unique_ptr<Leaf>(const json& params, Blackboard& blackboard)>;

/// Leaf constructors by name, plus named duration providers for Timeout nodes.
class NodeRegistry {
 public:
  struct Entry {
    LeafKind kind;
    LeafFactory factory;
  };

  void register_leaf(std::string name, LeafKind kind, LeafFactory factory) {
    if (name.empty()) throw Error(Errc::BadParam, "leaf name must not be empty");
    if (!leaves_.emplace(name, Entry{kind, std::move(factory)}).second)
      throw Error(Errc::DuplicateRegistration, "leaf '" + name + "' already registered", name);
  }

  void register_action(std::string name, FunctionLeaf::TickFn tick, FunctionLeaf::HaltFn halt = {}) {
    register_leaf(std::move(name), LeafKind::Action, [tick = std::move(tick), halt = std::move(halt)](const json&, Blackboard&) {
      return std::make_unique<FunctionLeaf>(tick, halt);
    });
  }

  void register_condition(std::string name, std::function<bool(LeafContext&)> check) {
    register_leaf(std::move(name), LeafKind::Condition, [check = std::move(check)](const json&, Blackboard&) {
      return std::make_unique<FunctionLeaf>(
          [check](LeafContext& ctx) { return check(ctx) ? NodeStatus::Success : NodeStatus::Failure; });
    });
  }

  void register_duration(std::string name, DurationFn fn) {
    if (!durations_.emplace(name, std::move(fn)).second)
      throw Error(Errc::DuplicateRegistration, "duration '" + name + "' already registered", name);
  }

  const Entry* find(const std::string& name) const {
    auto it = leaves_.find(name);
    return it == leaves_.end() ? nullptr : &it->second;
  }

  const DurationFn* find_duration(const std::string& name) const {
    auto it = durations_.find(name);
    return it == durations_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, Entry> leaves_;
  std::map<std::string, DurationFn> durations_;
};

/// Builds trees from the JSON description
/// `{"id": str?, "kind": str, "params": {...}?, "children": [...]?}`.
/// Leaves name their registration in `params.name`. Omitted ids become `n<k>`,
/// k being the node's depth-first pre-order ordinal.
class TreeBuilder {
 public:
  static constexpr int kMaxDepth = 64;

  TreeBuilder(const NodeRegistry& registry, Blackboard& blackboard) : registry_(registry), bb_(blackboard) {}

  BehaviorTree build(const json& spec) {
    BehaviorTree tree(bb_);
    add(tree, spec, "$", 0);
    return tree;
  }

 private:
  static Error structural(const std::string& path, const std::string& what) {
    return Error(Errc::StructuralViolation, path + ": " + what, path);
  }
  static Error bad_param(const std::string& path, const std::string& what) {
    return Error(Errc::BadParam, path + ": " + what, path);
  }

  std::size_t add(BehaviorTree& tree, const json& spec, const std::string& path, int depth) {
    if (depth > kMaxDepth) throw structural(path, "tree deeper than " + std::to_string(kMaxDepth) + " levels");
    if (!spec.is_object()) throw structural(path, "node must be an object");
    for (const auto& [key, _] : spec.items()) {
      if (key != "id" && key != "kind" && key != "params" && key != "children")
        throw structural(path, "unexpected field '" + key + "'");
    }
    if (!spec.contains("kind") || !spec["kind"].is_string()) throw structural(path, "missing string field 'kind'");
    auto kind = parse_node_kind(spec["kind"].get<std::string>());
    if (!kind) throw structural(path, "unknown kind '" + spec["kind"].get<std::string>() + "'");

    const std::size_t index = tree.nodes_.size();
    std::string id;
    if (spec.contains("id")) {
      if (!spec["id"].is_string() || spec["id"].get<std::string>().empty()) throw structural(path, "id must be a non-empty string");
      id = spec["id"].get<std::string>();
    } else {
      id = "n" + std::to_string(index);
    }
    if (!tree.index_.emplace(id, index).second) throw structural(path, "duplicate id '" + id + "'");

    json params = json::object();
    if (spec.contains("params")) {
      if (!spec["params"].is_object()) throw structural(path, "params must be an object");
      params = spec["params"];
    }
    const json empty = json::array();
    const json& children = spec.contains("children") ? spec["children"] : empty;
    if (!children.is_array()) throw structural(path, "children must be an array");

    const std::size_t arity = children.size();
    if (is_leaf(*kind) && arity != 0) throw structural(path, "leaf nodes take no children");
    if (is_decorator(*kind) && arity != 1) throw structural(path, "decorators take exactly one child");
    if (!is_leaf(*kind) && !is_decorator(*kind) && arity == 0) throw structural(path, "control nodes need at least one child");

    tree.nodes_.emplace_back();
    {
      auto& n = tree.nodes_.back();
      n.id = id;
      n.kind = *kind;
      n.params = params;
    }
    configure(tree.nodes_[index], params, arity, path);

    std::vector<std::size_t> child_indices;
    for (std::size_t k = 0; k < arity; ++k)
      child_indices.push_back(add(tree, children[k], path + ".children[" + std::to_string(k) + "]", depth + 1));
    tree.nodes_[index].children = std::move(child_indices);
    return index;
  }

  void configure(BehaviorTree::Node& n, const json& params, std::size_t arity, const std::string& path) {
    switch (n.kind) {
      case NodeKind::Retry: {
        const auto& a = params.contains("max_attempts") ? params["max_attempts"] : json();
        if (!a.is_number_integer() || a.get<long long>() < 1) throw bad_param(path, "Retry needs integer max_attempts >= 1");
        n.max_attempts = static_cast<int>(a.get<long long>());
        break;
      }
      case NodeKind::Timeout: {
        const bool fixed = params.contains("duration");
        const bool dynamic = params.contains("duration_fn");
        if (fixed == dynamic) throw bad_param(path, "Timeout needs exactly one of duration or duration_fn");
        if (fixed) {
          if (!params["duration"].is_number() || !(params["duration"].get<double>() > 0.0))
            throw bad_param(path, "Timeout duration must be a number > 0");
          n.fixed_duration = params["duration"].get<double>();
        } else {
          if (!params["duration_fn"].is_string()) throw bad_param(path, "duration_fn must be a string");
          const auto* fn = registry_.find_duration(params["duration_fn"].get<std::string>());
          if (!fn) throw bad_param(path, "unknown duration_fn '" + params["duration_fn"].get<std::string>() + "'");
          n.dynamic_duration = *fn;
        }
        break;
      }
      case NodeKind::Parallel: {
        n.success_threshold = arity;
        if (params.contains("success_threshold")) {
          const auto& t = params["success_threshold"];
          if (!t.is_number_integer() || t.get<long long>() < 1 || t.get<long long>() > static_cast<long long>(arity))
            throw bad_param(path, "Parallel success_threshold must be in [1, children]");
          n.success_threshold = static_cast<std::size_t>(t.get<long long>());
        }
        break;
      }
      case NodeKind::Action:
      case NodeKind::Condition: {
        if (!params.contains("name") || !params["name"].is_string()) throw bad_param(path, "leaf needs string params.name");
        const auto name = params["name"].get<std::string>();
        const auto* entry = registry_.find(name);
        if (!entry) throw Error(Errc::UnknownLeafName, path + ": leaf '" + name + "' is not registered", path);
        const LeafKind want = n.kind == NodeKind::Action ? LeafKind::Action : LeafKind::Condition;
        if (entry->kind != want)
          throw structural(path, "leaf '" + name + "' is registered as " + (entry->kind == LeafKind::Action ? "Action" : "Condition"));
        n.leaf_name = name;
        n.leaf = entry->factory(params, bb_);
        if (!n.leaf) throw bad_param(path, "factory for '" + name + "' returned no leaf");
        break;
      }
      default:
        break;
    }
  }

  const NodeRegistry& registry_;
  Blackboard& bb_;
};

inline BehaviorTree build_tree(const json& spec, const NodeRegistry& registry, Blackboard& blackboard) {
  return TreeBuilder(registry, blackboard).build(spec);
}

/// Helpers for writing tree descriptions in code.
namespace spec {

inline json node(std::string_view kind, std::string id, json children = json::array(), json params = json::object()) {
  json j{{"kind", kind}};
  if (!id.empty()) j["id"] = std::move(id);
  if (!params.empty()) j["params"] = std::move(params);
  if (!children.empty()) j["children"] = std::move(children);
  return j;
}

inline json sequence(std::string id, json children) { return node("Sequence", std::move(id), std::move(children)); }
inline json fallback(std::string id, json children) { return node("Fallback", std::move(id), std::move(children)); }
inline json inverter(std::string id, json child) { return node("Inverter", std::move(id), json::array({std::move(child)})); }
inline json retry(std::string id, int attempts, json child) {
  return node("Retry", std::move(id), json::array({std::move(child)}), {{"max_attempts", attempts}});
}
inline json timeout(std::string id, double seconds, json child) {
  return node("Timeout", std::move(id), json::array({std::move(child)}), {{"duration", seconds}});
}
inline json dynamic_timeout(std::string id, std::string fn, json child) {
  return node("Timeout", std::move(id), json::array({std::move(child)}), {{"duration_fn", std::move(fn)}});
}
inline json action(std::string id, std::string name, json params = json::object()) {
  params["name"] = std::move(name);
  return node("Action", std::move(id), json::array(), std::move(params));
}
inline json condition(std::string id, std::string name, json params = json::object()) {
  params["name"] = std::move(name);
  return node("Condition", std::move(id), json::array(), std::move(params));
}

}  // namespace spec

}  // namespace aeroexec::bt
