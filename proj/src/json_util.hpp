// Copyright 2026 The vrmeet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON helpers shared by the manifest, measurement, wire and scenario codecs.
// Every accessor names the full field path in its schema error.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vrmeet/errors.hpp"
#include "vrmeet/geometry.hpp"

namespace vrmeet::detail {

using json = nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& path,
                                      const std::string& what) {
  throw Error(Errc::schema, path + ": " + what, path);
}

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

inline const json& require(const json& obj, const std::string& parent,
                           const char* key) {
  if (!obj.is_object()) schema_error(parent, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(join_path(parent, key), "missing field");
  return *it;
}

inline std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

inline double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(path, "expected a finite number");
  return d;
}

inline std::uint64_t get_uint(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) schema_error(path, "must be non-negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  schema_error(path, "expected a non-negative integer");
}

inline std::int64_t get_int(const json& v, const std::string& path) {
  if (v.is_number_unsigned() || v.is_number_integer()) {
    return v.get<std::int64_t>();
  }
  schema_error(path, "expected an integer");
}

inline bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) schema_error(path, "expected a boolean");
  return v.get<bool>();
}

inline std::optional<std::string> get_nullable_string(const json& v,
                                                      const std::string& path) {
  if (v.is_null()) return std::nullopt;
  return get_string(v, path);
}

inline const json& get_array(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array");
  return v;
}

inline Vec3 get_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) schema_error(path, "expected [x,y,z]");
  return {get_number(v[0], index_path(path, 0)),
          get_number(v[1], index_path(path, 1)),
          get_number(v[2], index_path(path, 2))};
}

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

// Quaternions are serialized w-first. The stored value must already be unit
// length within `tolerance`.
inline UnitQuat get_quat(const json& v, const std::string& path,
                         double tolerance = 1e-6) {
  if (!v.is_array() || v.size() != 4) schema_error(path, "expected [w,x,y,z]");
  const double w = get_number(v[0], index_path(path, 0));
  const double x = get_number(v[1], index_path(path, 1));
  const double y = get_number(v[2], index_path(path, 2));
  const double z = get_number(v[3], index_path(path, 3));
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(std::abs(n - 1.0) <= tolerance)) {
    schema_error(path, "quaternion is not unit length");
  }
  return UnitQuat::from_wxyz(w, x, y, z);
}

inline json quat_to_json(const UnitQuat& q) {
  return json::array({q.w(), q.x(), q.y(), q.z()});
}

inline Pose get_pose(const json& v, const std::string& path) {
  if (!v.is_object()) schema_error(path, "expected a pose object");
  return {get_vec3(require(v, path, "pos"), join_path(path, "pos")),
          get_quat(require(v, path, "quat"), join_path(path, "quat"))};
}

inline json pose_to_json(const Pose& p) {
  return json{{"pos", vec3_to_json(p.position)},
              {"quat", quat_to_json(p.orientation)}};
}

// Parses a document, mapping nlohmann parse errors to Errc::syntax with the
// 0-based offset of the offending byte.
inline json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(Errc::syntax,
                "syntax error at byte " + std::to_string(offset) + ": " + e.what(), {},
                offset);
  }
}

}  // namespace vrmeet::detail
