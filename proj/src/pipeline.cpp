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

#include "mlcalib/pipeline.hpp"

#include <chrono>
#include <string>

namespace mlcalib {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string scan_name(std::size_t sensor, std::size_t timestamp) {
  return "sensor " + std::to_string(sensor) + ", timestamp " + std::to_string(timestamp);
}

}  // namespace

std::string to_string(PipelineVariant variant) {
  switch (variant) {
    case PipelineVariant::kProposed: return "proposed";
    case PipelineVariant::kProposedWithoutRoughRefinement:
      return "proposed_without_rough_refinement";
    case PipelineVariant::kEntireCloud: return "entire_cloud";
  }
  return "unknown";
}

PipelineVariant variant_from_string(const std::string& name) {
  if (name == "proposed") return PipelineVariant::kProposed;
  if (name == "proposed_without_rough_refinement") {
    return PipelineVariant::kProposedWithoutRoughRefinement;
  }
  if (name == "entire_cloud") return PipelineVariant::kEntireCloud;
  throw Error("unknown pipeline variant: " + name);
}

bool Dataset::has_labels() const {
  for (const auto& per_sensor : clouds) {
    for (const auto& c : per_sensor) {
      if (!c.labels) return false;
    }
  }
  return !clouds.empty();
}

void Dataset::validate() const {
  if (clouds.size() < 2) throw Error("dataset needs at least two sensors");
  if (initial_trajectory.size() < 2) throw Error("dataset needs at least two timestamps");
  if (initial_extrinsics.size() + 1 != clouds.size()) {
    throw Error("dataset needs one initial extrinsic per non-reference sensor");
  }
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    if (clouds[i].size() != initial_trajectory.size()) {
      throw Error("dataset sensor " + std::to_string(i) + " lacks a cloud per timestamp");
    }
    for (const auto& c : clouds[i]) c.validate();
  }
  if (true_extrinsics && true_extrinsics->size() != initial_extrinsics.size()) {
    throw Error("dataset ground-truth extrinsics have the wrong size");
  }
  if (true_trajectory && true_trajectory->size() != initial_trajectory.size()) {
    throw Error("dataset ground-truth trajectory has the wrong size");
  }
  if (!(std::abs(up_reference.norm() - 1.0) < 1e-6)) {
    throw Error("dataset up_reference must be a unit vector");
  }
}

void PipelineParams::validate() const {
  filter.validate();
  segmentation.validate();
  optimizer.validate();
  if (!(entire_cloud_voxel >= 0.0)) throw Error("entire_cloud_voxel must be >= 0");
}

Eigen::Vector3d sensor_up(const Eigen::Vector3d& up_reference, const ExtrinsicSet& extrinsics,
                          const Trajectory& trajectory, std::size_t sensor,
                          std::size_t timestamp) {
  const Pose pose = sensor_pose(extrinsics, trajectory, sensor, timestamp);
  return pose.rotation.transpose() * up_reference;
}

Preprocessed preprocess(const Dataset& dataset, const PipelineParams& params) {
  dataset.validate();
  params.validate();
  const auto start = Clock::now();
  const std::size_t ns = dataset.num_sensors();
  const std::size_t nt = dataset.num_timestamps();
  const bool labeled = dataset.has_labels();

  Preprocessed pre;
  pre.filtered.assign(ns, std::vector<PointCloud>(nt));
  pre.objects.assign(ns, std::vector<PointCloud>(nt));
  std::vector<FilterScore> scores;
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const PointCloud& raw = dataset.clouds[i][j];
      if (params.filter_enabled) {
        FilterReport report;
        try {
          report = pattern_filter(raw, params.filter);
        } catch (const Error& e) {
          throw Error("noise filter (" + scan_name(i, j) + "): " + e.what());
        }
        if (labeled) {
          std::vector<PointLabel> predicted(raw.size(), PointLabel::kSurface);
          for (std::size_t k = 0; k < raw.size(); ++k) {
            if (report.removed_mask[k]) predicted[k] = PointLabel::kNoise;
          }
          scores.push_back(filter_metrics(predicted, *raw.labels));
        }
        pre.filtered[i][j] = std::move(report.kept);
      } else {
        pre.filtered[i][j] = raw;
      }

      SegParams seg = params.segmentation;
      seg.rng_seed = mix_seed(params.segmentation.rng_seed, i, j);
      const Eigen::Vector3d up = sensor_up(dataset.up_reference, dataset.initial_extrinsics,
                                           dataset.initial_trajectory, i, j);
      try {
        SegmentationResult result = segment_floor_objects(pre.filtered[i][j], up, seg);
        pre.objects[i][j] = std::move(result.objects);
        pre.floors.push_back({i, j, result.floor_plane});
      } catch (const Error& e) {
        throw Error("segmentation (" + scan_name(i, j) + "): " + e.what());
      }
    }
  }
  if (!scores.empty()) pre.filter_score = combine_scores(scores);
  pre.seconds = seconds_since(start);
  return pre;
}

RunReport run_variant(const Dataset& dataset, const Preprocessed& pre,
                      PipelineVariant variant, const PipelineParams& params) {
  const auto start = Clock::now();
  RunReport report;
  report.variant = variant;
  report.filter_score = pre.filter_score;

  CalibrationSession session;
  if (variant == PipelineVariant::kEntireCloud) {
    session.clouds = pre.filtered;
    if (params.entire_cloud_voxel > 0.0) {
      for (auto& per_sensor : session.clouds) {
        for (auto& c : per_sensor) c = voxel_downsample(c, params.entire_cloud_voxel);
      }
    }
  } else {
    session.clouds = pre.objects;
  }
  session.extrinsics = dataset.initial_extrinsics;
  session.trajectory = dataset.initial_trajectory;
  try {
    report.metric_error_before = metric_error(session);
  } catch (const Error& e) {
    throw Error(std::string("metric error: ") + e.what());
  }

  if (variant == PipelineVariant::kProposed) {
    try {
      session.trajectory = refine_trajectory(session.trajectory, pre.floors);
      session.extrinsics = refine_extrinsics(session.extrinsics, pre.floors);
    } catch (const Error& e) {
      throw Error(std::string("rough refinement: ") + e.what());
    }
  }

  OptimizationReport opt;
  try {
    opt = optimize(session, params.optimizer);
  } catch (const Error& e) {
    throw Error(std::string("optimization: ") + e.what());
  }
  report.extrinsics = opt.extrinsics;
  report.trajectory = opt.trajectory;
  report.cost_trace = opt.cost_trace;
  report.correspondence_counts = opt.correspondence_counts;
  report.final_cost = opt.final_cost;
  report.iterations = opt.iterations;
  report.convergence_reason = opt.convergence_reason;

  session.extrinsics = opt.extrinsics;
  session.trajectory = opt.trajectory;
  report.metric_error_after = metric_error(session);

  if (dataset.true_extrinsics) {
    report.initial_errors = extrinsic_errors(dataset.initial_extrinsics, *dataset.true_extrinsics);
    report.final_errors = extrinsic_errors(opt.extrinsics, *dataset.true_extrinsics);
    for (const auto& c : opt.extrinsic_trace) {
      const ExtrinsicErrors e = extrinsic_errors(c, *dataset.true_extrinsics);
      report.translation_error_trace.push_back(e.mean_translation_m);
      report.rotation_error_trace.push_back(e.mean_rotation_deg);
    }
  }
  report.wall_clock_s = pre.seconds + seconds_since(start);
  return report;
}

RunReport run_pipeline(const Dataset& dataset, PipelineVariant variant,
                       const PipelineParams& params) {
  return run_variant(dataset, preprocess(dataset, params), variant, params);
}

Dataset simulate_dataset(const SimulationSettings& settings) {
  const SceneSpec scene = make_object_ring(settings.objects, settings.scene_seed);
  const ScanSchedule schedule =
      make_in_place_rotation(settings.num_poses, settings.base_height, settings.points_per_scan);
  SimDataset sim =
      render_dataset(scene, settings.mounts, schedule, settings.noise, settings.render_seed);

  Dataset data;
  data.clouds = std::move(sim.clouds);
  data.up_reference = sim.up_reference;
  data.true_extrinsics = sim.truth.extrinsics;
  data.true_trajectory = sim.truth.trajectory;
  auto [c0, s0] = perturb_parameters(sim.truth.extrinsics, sim.truth.trajectory,
                                     settings.perturbation, settings.perturbation_seed);
  data.initial_extrinsics = std::move(c0);
  data.initial_trajectory = std::move(s0);
  return data;
}

}  // namespace mlcalib
