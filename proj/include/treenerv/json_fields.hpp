// Copyright 2026 The TreeNeRV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Strict JSON field access shared by the config and container parsers.

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace treenerv {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Rejects any key of object `j` that is not in `allowed`.
inline void require_known_keys(const nlohmann::json& j,
                               std::initializer_list<std::string_view> allowed,
                               std::string_view context) {
  if (!j.is_object()) {
    throw ConfigError(std::string(context) + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || item.key() == a;
    if (!known) {
      throw ConfigError(std::string(context) + ": unknown field '" +
                        item.key() + "'");
    }
  }
}

// Reads j[key] into `out` when present, converting type errors into
// ConfigError with the field path.
template <typename T>
void read_optional(const nlohmann::json& j, std::string_view key, T& out,
                   std::string_view context) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(context) + "." + std::string(key) +
                      ": wrong type (" + it->type_name() + ")");
  }
}

template <typename T>
T read_required(const nlohmann::json& j, std::string_view key,
                std::string_view context) {
  if (!j.contains(std::string(key))) {
    throw ConfigError(std::string(context) + ": missing field '" +
                      std::string(key) + "'");
  }
  T out{};
  read_optional(j, key, out, context);
  return out;
}

}  // namespace treenerv
