#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "aeroexec/core/error.hpp"
#include "aeroexec/core/json.hpp"
#include "aeroexec/core/types.hpp"

namespace aeroexec::bt {

/// Closed set of blackboard value types.
using Value = std::variant<double, std::string, bool, Vec3, LandingSiteList, Timestamp>;

template <class T>
concept BlackboardType = std::is_same_v<T, double> || std::is_same_v<T, std::string> || std::is_same_v<T, bool> ||
                         std::is_same_v<T, Vec3> || std::is_same_v<T, LandingSiteList> ||
                         std::is_same_v<T, Timestamp>;

inline std::string_view type_name(const Value& v) {
  static constexpr std::string_view names[] = {"number", "string", "boolean", "vector3", "landing_sites", "timestamp"};
  return names[v.index()];
}

inline json value_to_json(const Value& v) {
  return std::visit(
      [&](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Timestamp>) {
          return json{{"type", "timestamp"}, {"value", x.seconds}};
        } else {
          return json{{"type", type_name(v)}, {"value", x}};
        }
      },
      v);
}

class Blackboard {
 public:
  using Entries = std::map<std::string, Value, std::less<>>;
  using Snapshot = std::shared_ptr<const Entries>;

  bool contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

  const Value& at(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(Errc::MissingKey, "blackboard has no entry '" + std::string(key) + "'", std::string(key));
    return it->second;
  }

  template <BlackboardType T>
  const T& get(std::string_view key) const {
    const Value& v = at(key);
    if (const T* p = std::get_if<T>(&v)) return *p;
    throw Error(Errc::TypeMismatch,
                "blackboard entry '" + std::string(key) + "' holds " + std::string(type_name(v)),
                std::string(key));
  }

  void set(std::string key, Value value) { entries_.insert_or_assign(std::move(key), std::move(value)); }
  bool erase(std::string_view key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
  }

  const Entries& entries() const noexcept { return entries_; }
  Snapshot snapshot() const { return std::make_shared<const Entries>(entries_); }

 private:
  Entries entries_;
};

}  // namespace aeroexec::bt
