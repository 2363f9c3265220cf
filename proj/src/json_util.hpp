// Copyright 2026 The mlcalib Authors
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

// JSON helpers shared by the dataset, config and report code. Private to the
// library.

#ifndef MLCALIB_SRC_JSON_UTIL_HPP
#define MLCALIB_SRC_JSON_UTIL_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlcalib/geometry.hpp"

namespace mlcalib::detail {

using nlohmann::json;

inline json vec_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Eigen::Vector3d vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw Error(what + ": expected an array of 3 numbers");
  Eigen::Vector3d v;
  for (int k = 0; k < 3; ++k) {
    if (!j[k].is_number()) throw Error(what + ": expected numbers");
    v[k] = j[k].get<double>();
  }
  return v;
}

/// {"rotation": [9 numbers, row-major], "translation": [3 numbers]}
inline json pose_to_json(const Pose& p) {
  json r = json::array();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) r.push_back(p.rotation(a, b));
  }
  return {{"rotation", r}, {"translation", vec_to_json(p.translation)}};
}

inline Pose pose_from_json(const json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rotation") || !j.contains("translation")) {
    throw Error(what + ": pose needs rotation and translation");
  }
  const json& r = j.at("rotation");
  if (!r.is_array() || r.size() != 9) throw Error(what + ": rotation needs 9 numbers");
  Pose p;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) p.rotation(a, b) = r[3 * a + b].get<double>();
  }
  p.translation = vec_from_json(j.at("translation"), what + ".translation");
  if (!p.is_valid(1e-6)) throw Error(what + ": rotation is not a proper rotation");
  return p;
}

inline json poses_to_json(const std::vector<Pose>& poses) {
  json out = json::array();
  for (const auto& p : poses) out.push_back(pose_to_json(p));
  return out;
}

inline std::vector<Pose> poses_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(what + ": expected an array of poses");
  std::vector<Pose> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(pose_from_json(j[k], what + "[" + std::to_string(k) + "]"));
  }
  return out;
}

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mlcalib::detail

#endif  // MLCALIB_SRC_JSON_UTIL_HPP
