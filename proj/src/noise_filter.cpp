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

#include "mlcalib/noise_filter.hpp"

#include <cmath>
#include <limits>

#include "mlcalib/kd_tree.hpp"

namespace mlcalib {
namespace {

struct Statistics {
  std::vector<double> mean_distances;
  double global_threshold = 0.0;
};

Statistics compute_statistics(const PointCloud& cloud, int k, double std_multiplier) {
  Statistics s;
  s.mean_distances = mean_knn_distances(cloud, k);
  const double n = static_cast<double>(s.mean_distances.size());
  double mean = 0.0;
  for (double m : s.mean_distances) mean += m;
  mean /= n;
  double var = 0.0;
  for (double m : s.mean_distances) var += (m - mean) * (m - mean);
  const double stddev = std::sqrt(var / n);
  s.global_threshold = mean + stddev * std_multiplier;
  return s;
}

FilterReport partition(const PointCloud& cloud, std::vector<bool> removed_mask,
                       double global_threshold, const Point3& center) {
  FilterReport report;
  report.global_threshold = global_threshold;
  report.observation_center = center;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    (removed_mask[i] ? removed : kept).push_back(i);
  }
  report.kept = cloud.select(kept);
  report.removed = cloud.select(removed);
  report.removed_mask = std::move(removed_mask);
  return report;
}

// Shared body of the pattern and DSOR filters: the threshold grows linearly
// with the distance from `center`.
FilterReport dynamic_filter(const PointCloud& cloud, const Statistics& stats,
                            double range_multiplier, const Point3& center,
                            std::optional<std::size_t> exempt) {
  std::vector<bool> removed(cloud.size(), false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (exempt && *exempt == i) continue;
    const double distance = (cloud.points[i] - center).norm();
    const double threshold = stats.global_threshold * range_multiplier * distance;
    removed[i] = !(stats.mean_distances[i] < threshold);
  }
  return partition(cloud, std::move(removed), stats.global_threshold, center);
}

}  // namespace

void FilterParams::validate() const {
  if (k < 1) throw Error("filter: k must be at least 1");
  if (!(std_multiplier >= 0.0)) throw Error("filter: C_s must be non-negative");
  if (!(range_multiplier > 0.0)) throw Error("filter: C_r must be positive");
  if (std::abs(boresight.norm() - 1.0) > 1e-9) {
    throw Error("filter: boresight must be a unit vector");
  }
}

std::vector<double> mean_knn_distances(const PointCloud& cloud, int k) {
  if (k < 1) throw Error("filter: k must be at least 1");
  if (cloud.size() <= static_cast<std::size_t>(k)) throw InsufficientPointsError();
  const KdTree tree(cloud.points);
  std::vector<double> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto neighbors = tree.knn(cloud.points[i], static_cast<std::size_t>(k), i);
    double sum = 0.0;
    for (const auto& n : neighbors) sum += std::sqrt(n.distance_sq);
    out[i] = sum / static_cast<double>(k);
  }
  return out;
}

std::size_t observation_center_index(const PointCloud& cloud,
                                     const Eigen::Vector3d& boresight) {
  if (cloud.empty()) throw Error("filter: observation center of an empty cloud");
  const Eigen::Vector3d axis = boresight.normalized();
  std::size_t best = 0;
  double best_angle = std::numeric_limits<double>::infinity();
  double best_range = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    const double range = p.norm();
    // atan2 keeps full precision near zero angle, unlike acos of the cosine.
    const double angle = range > 0.0 ? std::atan2(p.cross(axis).norm(), p.dot(axis)) : 0.0;
    if (angle < best_angle || (angle == best_angle && range < best_range)) {
      best = i;
      best_angle = angle;
      best_range = range;
    }
  }
  return best;
}

Point3 determine_observation_center(const PointCloud& cloud,
                                    const Eigen::Vector3d& boresight) {
  return cloud.points[observation_center_index(cloud, boresight)];
}

FilterReport pattern_filter(const PointCloud& cloud, const FilterParams& params) {
  params.validate();
  const Statistics stats =
      compute_statistics(cloud, params.k, params.std_multiplier);
  if (params.observation_center) {
    return dynamic_filter(cloud, stats, params.range_multiplier,
                          *params.observation_center, std::nullopt);
  }
  const std::size_t center = observation_center_index(cloud, params.boresight);
  return dynamic_filter(cloud, stats, params.range_multiplier,
                        cloud.points[center], center);
}

FilterReport sor_filter(const PointCloud& cloud, int k, double std_multiplier) {
  if (!(std_multiplier >= 0.0)) throw Error("filter: C_s must be non-negative");
  const Statistics stats = compute_statistics(cloud, k, std_multiplier);
  std::vector<bool> removed(cloud.size(), false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    removed[i] = !(stats.mean_distances[i] < stats.global_threshold);
  }
  return partition(cloud, std::move(removed), stats.global_threshold, Point3::Zero());
}

FilterReport dsor_filter(const PointCloud& cloud, int k, double std_multiplier,
                         double range_multiplier) {
  if (!(std_multiplier >= 0.0)) throw Error("filter: C_s must be non-negative");
  if (!(range_multiplier > 0.0)) throw Error("filter: C_r must be positive");
  const Statistics stats = compute_statistics(cloud, k, std_multiplier);
  return dynamic_filter(cloud, stats, range_multiplier, Point3::Zero(), std::nullopt);
}

}  // namespace mlcalib
