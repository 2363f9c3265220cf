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

#include "mlcalib/config.hpp"

#include <set>

#include "json_util.hpp"

namespace mlcalib {
namespace {

using detail::json;

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error("config: section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error("config: bad value for " + name_ + "." + key);
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw Error("config: unknown key " + name_ + "." + item.key());
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

SensorMount mount_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) throw Error("config: " + what + " must be an object");
  SensorMount m;
  Section s(j, what);
  double yaw = 0.0, pitch = 0.0;
  s.get("yaw_deg", yaw);
  s.get("pitch_deg", pitch);
  s.get("fov_deg", m.fov_deg);
  s.get("max_range", m.max_range);
  json translation, rotation;
  s.get("translation", translation);
  s.get("rotation", rotation);
  s.finish();
  if (j.contains("rotation") && (j.contains("yaw_deg") || j.contains("pitch_deg"))) {
    throw Error("config: " + what + " gives both rotation and yaw/pitch");
  }
  if (!j.contains("translation")) throw Error("config: " + what + " needs a translation");
  m.base_from_sensor.translation = detail::vec_from_json(translation, what + ".translation");
  if (j.contains("rotation")) {
    m.base_from_sensor = detail::pose_from_json(j, what);
  } else {
    m.base_from_sensor.rotation = axis_angle(Eigen::Vector3d::UnitZ(), yaw * kDegToRad) *
                                  axis_angle(Eigen::Vector3d::UnitY(), pitch * kDegToRad);
  }
  m.validate();
  return m;
}

}  // namespace

void RunConfig::set_seed(std::uint64_t seed) {
  simulation.scene_seed = seed;
  simulation.render_seed = seed;
  simulation.perturbation_seed = seed;
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw Error("config: top level must be an object");
  for (const auto& item : root.items()) {
    static const std::set<std::string> kSections = {
        "scene", "mounts", "schedule", "noise", "perturbation", "filter",
        "segmentation", "optimizer", "entire_cloud", "variant", "seeds"};
    if (!kSections.count(item.key())) throw Error("config: unknown section " + item.key());
  }

  RunConfig c;
  SimulationSettings& sim = c.simulation;
  if (root.contains("scene")) {
    Section s(root["scene"], "scene");
    std::string kind = to_string(sim.objects.kind);
    s.get("object_kind", kind);
    sim.objects.kind = primitive_kind_from_string(kind);
    s.get("object_count", sim.objects.count);
    s.get("object_height", sim.objects.height);
    s.get("min_radius", sim.objects.min_radius);
    s.get("max_radius", sim.objects.max_radius);
    s.get("min_separation", sim.objects.min_separation);
    s.finish();
  }
  if (root.contains("mounts")) {
    const json& m = root["mounts"];
    if (m.is_string()) {
      const std::string preset = m.get<std::string>();
      if (preset == "two") sim.mounts = make_two_sensor_mounts();
      else if (preset == "four") sim.mounts = make_four_sensor_mounts();
      else throw Error("config: unknown mount preset " + preset);
    } else if (m.is_array()) {
      sim.mounts.clear();
      for (std::size_t k = 0; k < m.size(); ++k) {
        sim.mounts.push_back(mount_from_json(m[k], "mounts[" + std::to_string(k) + "]"));
      }
      if (sim.mounts.size() < 2) throw Error("config: at least two mounts required");
    } else {
      throw Error("config: mounts must be a preset name or a list");
    }
  }
  if (root.contains("schedule")) {
    Section s(root["schedule"], "schedule");
    s.get("num_poses", sim.num_poses);
    s.get("base_height", sim.base_height);
    s.get("points_per_scan", sim.points_per_scan);
    s.finish();
  }
  if (root.contains("noise")) {
    Section s(root["noise"], "noise");
    s.get("bleeding", sim.noise.bleeding);
    s.get("discontinuity_threshold", sim.noise.discontinuity_threshold);
    s.get("min_points", sim.noise.min_points);
    s.get("max_points", sim.noise.max_points);
    s.get("range_noise_std", sim.noise.range_noise_std);
    s.finish();
    sim.noise.validate();
  }
  if (root.contains("perturbation")) {
    Section s(root["perturbation"], "perturbation");
    s.get("extrinsic_translation", sim.perturbation.extrinsic_translation);
    s.get("extrinsic_rotation_deg", sim.perturbation.extrinsic_rotation_deg);
    s.get("trajectory_translation", sim.perturbation.trajectory_translation);
    s.get("trajectory_rotation_deg", sim.perturbation.trajectory_rotation_deg);
    s.finish();
  }
  PipelineParams& p = c.pipeline;
  if (root.contains("filter")) {
    Section s(root["filter"], "filter");
    s.get("enabled", p.filter_enabled);
    s.get("k", p.filter.k);
    s.get("std_multiplier", p.filter.std_multiplier);
    s.get("range_multiplier", p.filter.range_multiplier);
    json boresight;
    s.get("boresight", boresight);
    if (!boresight.is_null()) p.filter.boresight = detail::vec_from_json(boresight, "boresight");
    s.finish();
  }
  if (root.contains("segmentation")) {
    Section s(root["segmentation"], "segmentation");
    s.get("ransac_inlier_threshold", p.segmentation.ransac_inlier_threshold);
    s.get("ransac_max_iterations", p.segmentation.ransac_max_iterations);
    s.get("cluster_radius", p.segmentation.cluster_radius);
    s.get("min_cluster_size", p.segmentation.min_cluster_size);
    s.get("max_floor_tilt_deg", p.segmentation.max_floor_tilt_deg);
    s.finish();
  }
  if (root.contains("entire_cloud")) {
    Section s(root["entire_cloud"], "entire_cloud");
    s.get("voxel", p.entire_cloud_voxel);
    s.finish();
  }
  if (root.contains("optimizer")) {
    Section s(root["optimizer"], "optimizer");
    OptimizerConfig& o = p.optimizer;
    s.get("outer_iterations", o.outer_iterations);
    s.get("max_correspondence_distance", o.max_correspondence_distance);
    s.get("inner_max_iterations", o.inner_max_iterations);
    s.get("gradient_tolerance", o.gradient_tolerance);
    s.get("parameter_tolerance", o.parameter_tolerance);
    s.get("cost_tolerance", o.cost_tolerance);
    s.get("outer_parameter_tolerance", o.outer_parameter_tolerance);
    s.get("lm_initial_damping", o.lm_initial_damping);
    s.get("optimize_trajectory", o.optimize_trajectory);
    s.get("couple_reference_map", o.couple_reference_map);
    s.get("extrapolate", o.extrapolate);
    std::string loss = o.robust_loss == RobustLoss::kHuber ? "huber" : "none";
    s.get("robust_loss", loss);
    if (loss == "none") o.robust_loss = RobustLoss::kNone;
    else if (loss == "huber") o.robust_loss = RobustLoss::kHuber;
    else throw Error("config: unknown robust_loss " + loss);
    s.get("huber_delta", o.huber_delta);
    s.finish();
  }
  if (root.contains("variant")) {
    if (!root["variant"].is_string()) throw Error("config: variant must be a string");
    c.variant = variant_from_string(root["variant"].get<std::string>());
  }
  if (root.contains("seeds")) {
    Section s(root["seeds"], "seeds");
    s.get("scene", sim.scene_seed);
    s.get("render", sim.render_seed);
    s.get("perturbation", sim.perturbation_seed);
    s.get("pipeline", p.segmentation.rng_seed);
    s.finish();
  }
  p.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  const json j = detail::read_json_file(path);
  try {
    return parse_config(j.dump());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string dump_config(const RunConfig& c) {
  const SimulationSettings& sim = c.simulation;
  const PipelineParams& p = c.pipeline;
  const OptimizerConfig& o = p.optimizer;
  json mounts = json::array();
  for (const auto& m : sim.mounts) {
    json jm = detail::pose_to_json(m.base_from_sensor);
    jm["fov_deg"] = m.fov_deg;
    jm["max_range"] = m.max_range;
    mounts.push_back(jm);
  }
  json root = {
      {"scene",
       {{"object_kind", to_string(sim.objects.kind)},
        {"object_count", sim.objects.count},
        {"object_height", sim.objects.height},
        {"min_radius", sim.objects.min_radius},
        {"max_radius", sim.objects.max_radius},
        {"min_separation", sim.objects.min_separation}}},
      {"mounts", mounts},
      {"schedule",
       {{"num_poses", sim.num_poses},
        {"base_height", sim.base_height},
        {"points_per_scan", sim.points_per_scan}}},
      {"noise",
       {{"bleeding", sim.noise.bleeding},
        {"discontinuity_threshold", sim.noise.discontinuity_threshold},
        {"min_points", sim.noise.min_points},
        {"max_points", sim.noise.max_points},
        {"range_noise_std", sim.noise.range_noise_std}}},
      {"perturbation",
       {{"extrinsic_translation", sim.perturbation.extrinsic_translation},
        {"extrinsic_rotation_deg", sim.perturbation.extrinsic_rotation_deg},
        {"trajectory_translation", sim.perturbation.trajectory_translation},
        {"trajectory_rotation_deg", sim.perturbation.trajectory_rotation_deg}}},
      {"filter",
       {{"enabled", p.filter_enabled},
        {"k", p.filter.k},
        {"std_multiplier", p.filter.std_multiplier},
        {"range_multiplier", p.filter.range_multiplier},
        {"boresight", detail::vec_to_json(p.filter.boresight)}}},
      {"segmentation",
       {{"ransac_inlier_threshold", p.segmentation.ransac_inlier_threshold},
        {"ransac_max_iterations", p.segmentation.ransac_max_iterations},
        {"cluster_radius", p.segmentation.cluster_radius},
        {"min_cluster_size", p.segmentation.min_cluster_size},
        {"max_floor_tilt_deg", p.segmentation.max_floor_tilt_deg}}},
      {"entire_cloud", {{"voxel", p.entire_cloud_voxel}}},
      {"optimizer",
       {{"outer_iterations", o.outer_iterations},
        {"max_correspondence_distance", o.max_correspondence_distance},
        {"inner_max_iterations", o.inner_max_iterations},
        {"gradient_tolerance", o.gradient_tolerance},
        {"parameter_tolerance", o.parameter_tolerance},
        {"cost_tolerance", o.cost_tolerance},
        {"outer_parameter_tolerance", o.outer_parameter_tolerance},
        {"lm_initial_damping", o.lm_initial_damping},
        {"optimize_trajectory", o.optimize_trajectory},
        {"couple_reference_map", o.couple_reference_map},
        {"extrapolate", o.extrapolate},
        {"robust_loss", o.robust_loss == RobustLoss::kHuber ? "huber" : "none"},
        {"huber_delta", o.huber_delta}}},
      {"variant", to_string(c.variant)},
      {"seeds",
       {{"scene", sim.scene_seed},
        {"render", sim.render_seed},
        {"perturbation", sim.perturbation_seed},
        {"pipeline", p.segmentation.rng_seed}}},
  };
  return root.dump(2) + "\n";
}

}  // namespace mlcalib
