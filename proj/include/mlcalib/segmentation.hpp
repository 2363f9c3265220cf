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

#ifndef MLCALIB_SEGMENTATION_HPP
#define MLCALIB_SEGMENTATION_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mlcalib/geometry.hpp"

namespace mlcalib {

struct SegParams {
  double ransac_inlier_threshold = 0.02;  // m
  int ransac_max_iterations = 1000;
  double cluster_radius = 0.10;  // m
  std::size_t min_cluster_size = 30;
  double max_floor_tilt_deg = 30.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct PlaneFit {
  Plane plane;  // oriented toward the sensor origin
  std::vector<std::size_t> inliers;  // ascending
};

/// Half-open range [begin, end) into SegmentationResult::objects.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct SegmentationResult {
  PointCloud floor;
  Plane floor_plane;
  /// Clustered non-floor points, stored cluster by cluster.
  PointCloud objects;
  std::vector<IndexRange> clusters;
  /// Input indices of floor and object points (objects in `objects` order).
  std::vector<std::size_t> floor_indices;
  std::vector<std::size_t> object_indices;
  std::size_t discarded = 0;
};

/// Seeded RANSAC over 3-point hypotheses followed by a least-squares refit on
/// the inliers. With `up` set, hypotheses whose sensor-facing normal deviates
/// from it by more than params.max_floor_tilt_deg are rejected.
/// Throws Error("no plane") for fewer than 3 points or no valid hypothesis.
PlaneFit ransac_plane(const PointCloud& cloud, const SegParams& params,
                      const std::optional<Eigen::Vector3d>& up = std::nullopt);

/// Connected components under "distance <= radius"; components smaller than
/// min_size are dropped. Ordered by descending size, then lowest member.
std::vector<std::vector<std::size_t>> euclidean_cluster(const PointCloud& cloud,
                                                        double radius,
                                                        std::size_t min_size);

/// Splits a sensor-frame cloud into floor and object clusters.
/// Throws Error("floor not found") when no plane passes the tilt gate.
SegmentationResult segment_floor_objects(const PointCloud& cloud,
                                         const Eigen::Vector3d& sensor_up,
                                         const SegParams& params);

}  // namespace mlcalib

#endif  // MLCALIB_SEGMENTATION_HPP
