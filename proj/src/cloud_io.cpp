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

#include "mlcalib/cloud_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "json_util.hpp"

namespace mlcalib {
namespace {

namespace fs = std::filesystem;
using detail::json;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view token, double& value) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(value);
}

fs::path cloud_path(const fs::path& dir, std::size_t sensor, std::size_t timestamp) {
  return dir / "clouds" / ("s" + std::to_string(sensor) + "_t" + std::to_string(timestamp) + ".txt");
}

}  // namespace

namespace detail {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace detail

CloudParseError::CloudParseError(const std::string& source, std::size_t line,
                                 const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

PointCloud read_cloud(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool with_labels = false;
  bool header_seen = false;
  PointCloud cloud;
  std::vector<PointLabel> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!header_seen) {
      const auto tokens = split_ws(line);
      const bool ok = tokens.size() >= 5 && tokens[0] == "#" && tokens[1] == "columns:" &&
                      tokens[2] == "x" && tokens[3] == "y" && tokens[4] == "z" &&
                      (tokens.size() == 5 || (tokens.size() == 6 && tokens[5] == "label"));
      if (!ok) throw CloudParseError(source, line_no, "expected '# columns: x y z [label]'");
      with_labels = tokens.size() == 6;
      header_seen = true;
      continue;
    }
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::size_t expected = with_labels ? 4 : 3;
    if (tokens.size() != expected) {
      throw CloudParseError(source, line_no,
                            "expected " + std::to_string(expected) + " columns, got " +
                                std::to_string(tokens.size()));
    }
    Point3 p;
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(tokens[k], p[k])) {
        throw CloudParseError(source, line_no, "bad number '" + std::string(tokens[k]) + "'");
      }
    }
    cloud.points.push_back(p);
    if (with_labels) {
      if (tokens[3] == "surface") labels.push_back(PointLabel::kSurface);
      else if (tokens[3] == "noise") labels.push_back(PointLabel::kNoise);
      else throw CloudParseError(source, line_no, "bad label '" + std::string(tokens[3]) + "'");
    }
  }
  if (!header_seen) throw CloudParseError(source, line_no + 1, "missing header");
  if (with_labels) cloud.labels = std::move(labels);
  return cloud;
}

void write_cloud(const PointCloud& cloud, std::ostream& out) {
  cloud.validate();
  const bool with_labels = cloud.labels.has_value();
  out << (with_labels ? "# columns: x y z label\n" : "# columns: x y z\n");
  char buf[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", p.x(), p.y(), p.z());
    out << buf;
    if (with_labels) {
      out << ((*cloud.labels)[i] == PointLabel::kNoise ? " noise" : " surface");
    }
    out << '\n';
  }
}

PointCloud load_cloud(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_cloud(in, path.string());
}

void save_cloud(const PointCloud& cloud, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_cloud(cloud, out);
  if (!out) throw Error("write failed: " + path.string());
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  dataset.validate();
  fs::create_directories(dir / "clouds");
  json meta = {
      {"num_sensors", dataset.num_sensors()},
      {"num_timestamps", dataset.num_timestamps()},
      {"up_reference", detail::vec_to_json(dataset.up_reference)},
      {"initial_extrinsics", detail::poses_to_json(dataset.initial_extrinsics.transforms)},
      {"initial_trajectory", detail::poses_to_json(dataset.initial_trajectory.poses)},
  };
  detail::write_text_file(dir / "dataset.json", meta.dump(2) + "\n");
  if (dataset.true_extrinsics && dataset.true_trajectory) {
    json truth = {
        {"extrinsics", detail::poses_to_json(dataset.true_extrinsics->transforms)},
        {"trajectory", detail::poses_to_json(dataset.true_trajectory->poses)},
    };
    detail::write_text_file(dir / "ground_truth.json", truth.dump(2) + "\n");
  }
  for (std::size_t i = 0; i < dataset.num_sensors(); ++i) {
    for (std::size_t j = 0; j < dataset.num_timestamps(); ++j) {
      save_cloud(dataset.clouds[i][j], cloud_path(dir, i, j));
    }
  }
}

Dataset load_dataset(const fs::path& dir) {
  const json meta = detail::read_json_file(dir / "dataset.json");
  Dataset d;
  std::size_t ns = 0, nt = 0;
  try {
    ns = meta.at("num_sensors").get<std::size_t>();
    nt = meta.at("num_timestamps").get<std::size_t>();
    d.up_reference = detail::vec_from_json(meta.at("up_reference"), "up_reference");
    d.initial_extrinsics.transforms =
        detail::poses_from_json(meta.at("initial_extrinsics"), "initial_extrinsics");
    d.initial_trajectory.poses =
        detail::poses_from_json(meta.at("initial_trajectory"), "initial_trajectory");
  } catch (const json::exception& e) {
    throw Error((dir / "dataset.json").string() + ": " + e.what());
  }
  if (d.initial_trajectory.size() != nt) {
    throw Error("dataset.json: initial_trajectory length differs from num_timestamps");
  }
  const fs::path truth_path = dir / "ground_truth.json";
  if (fs::exists(truth_path)) {
    const json truth = detail::read_json_file(truth_path);
    try {
      d.true_extrinsics =
          ExtrinsicSet{detail::poses_from_json(truth.at("extrinsics"), "extrinsics")};
      d.true_trajectory =
          Trajectory{detail::poses_from_json(truth.at("trajectory"), "trajectory")};
    } catch (const json::exception& e) {
      throw Error(truth_path.string() + ": " + e.what());
    }
  }
  d.clouds.assign(ns, std::vector<PointCloud>(nt));
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nt; ++j) d.clouds[i][j] = load_cloud(cloud_path(dir, i, j));
  }
  d.validate();
  return d;
}

}  // namespace mlcalib
