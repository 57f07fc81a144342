// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

// JSON binding for the configuration structs. Readers are strict: unknown
// keys and type mismatches raise ConfigError naming the full key path.

#pragma once

#include <functional>
#include <json.hpp>
#include <set>
#include <string>

#include "liet/evalkit.hpp"
#include "liet/nets.hpp"
#include "liet/synthgen.hpp"
#include "liet/trainer.hpp"

namespace liet::detail {

using json = nlohmann::ordered_json;

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where);

  template <typename T>
  void field(const char* key, T& out, const std::function<bool(const T&)>& valid = {},
             const char* constraint = nullptr) {
    const auto path = join(key);
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    check_type<T>(v, path);
    T value = v.get<T>();
    if (valid && !valid(value)) fail(path, constraint ? constraint : "invalid value");
    out = value;
  }

  /// Returns the sub-object (or an empty object) and marks the key as known.
  const json& object(const char* key);
  void mark(const char* key) { seen_.insert(key); }
  std::string join(const char* key) const { return where_.empty() ? key : where_ + "." + key; }
  /// Throws on any key not consumed by field()/object().
  void finish() const;
  [[noreturn]] static void fail(const std::string& path, const std::string& why);

 private:
  template <typename T>
  static void check_type(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(path, "expected boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(path, "expected integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<int64_t>() < 0) fail(path, "expected non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(path, "expected number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(path, "expected string");
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
  static const json kEmpty;
};

json to_json(const NetConfig& c);
json to_json(const LossWeights& w);
json to_json(const AblationFlags& a);
json to_json(const TrainConfig& c);
json to_json(const SceneSpec& s);
json to_json(const EvalSettings& e);

void read_into(const json& j, const std::string& where, NetConfig& c);
void read_into(const json& j, const std::string& where, LossWeights& w);
void read_into(const json& j, const std::string& where, AblationFlags& a);
void read_into(const json& j, const std::string& where, TrainConfig& c);
void read_into(const json& j, const std::string& where, SceneSpec& s);
void read_into(const json& j, const std::string& where, EvalSettings& e);

}  // namespace liet::detail
