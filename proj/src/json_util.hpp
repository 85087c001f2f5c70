// Copyright 2026 The LatentLens Authors
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

// Private helpers for strict JSON documents: unknown keys are errors and
// missing required keys are reported by name.

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

#include "latentlens/error.hpp"

namespace latentlens::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": invalid JSON: " + e.what());
  }
}

inline void check_keys(const json& doc, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional,
                       const std::string& what) {
  if (!doc.is_object()) throw FormatError(what + ": expected a JSON object");
  for (std::string_view key : required) {
    if (!doc.contains(std::string(key))) {
      throw FormatError(what + ": missing required key '" + std::string(key) + "'");
    }
  }
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (std::string_view k : required) known = known || key == k;
    for (std::string_view k : optional) known = known || key == k;
    if (!known) throw FormatError(what + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& doc, const std::string& key, const std::string& what) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(what + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& doc, const std::string& key, T fallback, const std::string& what) {
  return doc.contains(key) ? get<T>(doc, key, what) : fallback;
}

}  // namespace latentlens::detail
