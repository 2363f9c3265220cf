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

#ifndef MLCALIB_NOISE_FILTER_HPP
#define MLCALIB_NOISE_FILTER_HPP

#include <optional>
#include <vector>

#include "mlcalib/geometry.hpp"

namespace mlcalib {

/// Outlier filters for non-repetitive-scan LiDAR clouds.
///
/// All three filters share the same statistics: the mean distance mu_i from
/// each point to its k nearest neighbors, and the global threshold
/// H_g = mean(mu) + stddev(mu) * C_s (population standard deviation).
///
///  - sor_filter keeps p_i iff mu_i < H_g.
///  - dsor_filter keeps p_i iff mu_i < H_g * C_r * |p_i|, the range from the
///    sensor origin.
///  - pattern_filter keeps p_i iff mu_i < H_g * C_r * |p_i - p_o|, where p_o
///    is the observation center: the densest region of a rosette scan, which
///    sits on the boresight rather than at the sensor.
///
/// Clouds are expected in the sensor frame.

class InsufficientPointsError : public Error {
 public:
  InsufficientPointsError() : Error("insufficient points") {}
};

struct FilterParams {
  int k = 20;
  double std_multiplier = 0.01;    // C_s
  double range_multiplier = 3.0;   // C_r, 1/m
  Eigen::Vector3d boresight = Eigen::Vector3d::UnitX();
  /// When set, used as p_o instead of searching the cloud. No point is then
  /// exempt from the dynamic threshold.
  std::optional<Point3> observation_center;

  void validate() const;
};

struct FilterReport {
  PointCloud kept;
  PointCloud removed;
  double global_threshold = 0.0;  // H_g, meters
  Point3 observation_center = Point3::Zero();
  /// One entry per input point, true when the point was removed.
  std::vector<bool> removed_mask;
};

/// Mean distance from every point to its k nearest neighbors, excluding the
/// point itself. Throws InsufficientPointsError when |cloud| <= k.
std::vector<double> mean_knn_distances(const PointCloud& cloud, int k);

/// Index of the point whose direction from the origin is closest to the
/// boresight; ties go to the smaller range, then the lower index.
std::size_t observation_center_index(const PointCloud& cloud,
                                     const Eigen::Vector3d& boresight);
Point3 determine_observation_center(const PointCloud& cloud,
                                    const Eigen::Vector3d& boresight);

FilterReport pattern_filter(const PointCloud& cloud, const FilterParams& params);
FilterReport sor_filter(const PointCloud& cloud, int k, double std_multiplier);
FilterReport dsor_filter(const PointCloud& cloud, int k, double std_multiplier,
                         double range_multiplier);

}  // namespace mlcalib

#endif  // MLCALIB_NOISE_FILTER_HPP
