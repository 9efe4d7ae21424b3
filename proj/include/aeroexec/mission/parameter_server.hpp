#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "aeroexec/core/error.hpp"
#include "aeroexec/core/json.hpp"

namespace aeroexec::mission {

/// Read-only namespaced configuration. Nested JSON objects flatten into dotted
/// keys ("vehicle.v_max"); arrays and nulls are rejected.
class ParameterServer {
 public:
  using Value = std::variant<double, std::string, bool>;

  ParameterServer() = default;

  static ParameterServer from_json(const json& doc) {
    ParameterServer ps;
    if (!doc.is_object()) throw Error(Errc::BadConfig, "parameters must be a JSON object");
    ps.flatten(doc, "");
    return ps;
  }

  bool contains(std::string_view key) const { return values_.find(key) != values_.end(); }

  double number(std::string_view key) const { return get<double>(key); }
  const std::string& string(std::string_view key) const { return get<std::string>(key); }
  bool boolean(std::string_view key) const { return get<bool>(key); }

  double number_or(std::string_view key, double fallback) const { return contains(key) ? number(key) : fallback; }
  bool boolean_or(std::string_view key, bool fallback) const { return contains(key) ? boolean(key) : fallback; }
  std::string string_or(std::string_view key, std::string fallback) const {
    return contains(key) ? string(key) : fallback;
  }

  /// Keys under `prefix.` with the prefix stripped.
  ParameterServer section(std::string_view prefix) const {
    ParameterServer out;
    const std::string p = std::string(prefix) + ".";
    for (const auto& [k, v] : values_)
      if (k.compare(0, p.size(), p) == 0) out.values_.emplace(k.substr(p.size()), v);
    return out;
  }

  const std::map<std::string, Value, std::less<>>& values() const noexcept { return values_; }

 private:
  template <class T>
  const T& get(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(Errc::MissingKey, "unknown parameter '" + std::string(key) + "'", std::string(key));
    if (const T* p = std::get_if<T>(&it->second)) return *p;
    throw Error(Errc::TypeMismatch, "parameter '" + std::string(key) + "' has a different type", std::string(key));
  }

  void flatten(const json& node, const std::string& prefix) {
    for (const auto& [k, v] : node.items()) {
      const std::string key = prefix.empty() ? k : prefix + "." + k;
      if (v.is_object()) {
        flatten(v, key);
      } else if (v.is_boolean()) {
        values_.emplace(key, v.get<bool>());
      } else if (v.is_number()) {
        values_.emplace(key, v.get<double>());
      } else if (v.is_string()) {
        values_.emplace(key, v.get<std::string>());
      } else {
        throw Error(Errc::BadConfig, "parameter '" + key + "' must be a number, string or boolean", key);
      }
    }
  }

  std::map<std::string, Value, std::less<>> values_;
};

}  // namespace aeroexec::mission
