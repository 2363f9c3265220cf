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

#ifndef MLCALIB_PIPELINE_HPP
#define MLCALIB_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "mlcalib/geometry.hpp"
#include "mlcalib/joint_optimizer.hpp"
#include "mlcalib/metrics.hpp"
#include "mlcalib/noise_filter.hpp"
#include "mlcalib/rough_refine.hpp"
#include "mlcalib/segmentation.hpp"
#include "mlcalib/sim_scene.hpp"

namespace mlcalib {

enum class PipelineVariant { kProposed, kProposedWithoutRoughRefinement, kEntireCloud };

std::string to_string(PipelineVariant variant);
PipelineVariant variant_from_string(const std::string& name);

/// Everything a calibration run consumes. Clouds are in sensor frames;
/// up_reference is the world up direction in the reference sensor frame at
/// the first stop, used to pick the floor during segmentation.
struct Dataset {
  std::vector<std::vector<PointCloud>> clouds;  // [sensor][timestamp]
  ExtrinsicSet initial_extrinsics;
  Trajectory initial_trajectory;
  Eigen::Vector3d up_reference = Eigen::Vector3d::UnitZ();
  std::optional<ExtrinsicSet> true_extrinsics;
  std::optional<Trajectory> true_trajectory;

  std::size_t num_sensors() const { return clouds.size(); }
  std::size_t num_timestamps() const { return initial_trajectory.size(); }
  bool has_labels() const;
  void validate() const;
};

struct PipelineParams {
  bool filter_enabled = true;
  FilterParams filter;
  SegParams segmentation;
  OptimizerConfig optimizer;
  /// Voxel edge for the entire_cloud variant's clouds; 0 keeps every point.
  /// Full scans are an order of magnitude larger than the object clouds.
  double entire_cloud_voxel = 0.05;  // m

  void validate() const;
};

/// Filter and segmentation output, shared by all variants of one dataset.
struct Preprocessed {
  std::vector<std::vector<PointCloud>> filtered;  // [sensor][timestamp]
  std::vector<std::vector<PointCloud>> objects;
  std::vector<PlaneObservation> floors;
  std::optional<FilterScore> filter_score;  // when the dataset is labeled
  double seconds = 0.0;
};

/// Errors raised inside a pipeline stage carry the stage name.
Preprocessed preprocess(const Dataset& dataset, const PipelineParams& params);

struct RunReport {
  PipelineVariant variant = PipelineVariant::kProposed;
  ExtrinsicSet extrinsics;
  Trajectory trajectory;
  /// Present iff the dataset carries ground truth.
  std::optional<ExtrinsicErrors> initial_errors;
  std::optional<ExtrinsicErrors> final_errors;
  /// Mean extrinsic errors after each outer iteration (ground truth only).
  std::vector<double> translation_error_trace;
  std::vector<double> rotation_error_trace;
  double metric_error_before = 0.0;
  double metric_error_after = 0.0;
  std::optional<FilterScore> filter_score;
  std::vector<double> cost_trace;
  std::vector<std::size_t> correspondence_counts;
  double final_cost = 0.0;
  int iterations = 0;
  std::string convergence_reason;
  double wall_clock_s = 0.0;
};

RunReport run_variant(const Dataset& dataset, const Preprocessed& pre,
                      PipelineVariant variant, const PipelineParams& params);
RunReport run_pipeline(const Dataset& dataset, PipelineVariant variant,
                       const PipelineParams& params);

/// Up direction of sensor i at stop j under the given parameters.
Eigen::Vector3d sensor_up(const Eigen::Vector3d& up_reference, const ExtrinsicSet& extrinsics,
                          const Trajectory& trajectory, std::size_t sensor,
                          std::size_t timestamp);

struct SimulationSettings {
  ObjectLayout objects;
  std::vector<SensorMount> mounts = make_two_sensor_mounts();
  std::size_t num_poses = 16;
  double base_height = 0.54;
  std::size_t points_per_scan = 30000;
  NoiseParams noise;
  PerturbationBounds perturbation;
  std::uint64_t scene_seed = 1;
  std::uint64_t render_seed = 1;
  std::uint64_t perturbation_seed = 1;
};

/// Renders a labeled dataset with ground truth and perturbed initial values.
Dataset simulate_dataset(const SimulationSettings& settings);

}  // namespace mlcalib

#endif  // MLCALIB_PIPELINE_HPP
