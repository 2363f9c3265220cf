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

#ifndef MLCALIB_JOINT_OPTIMIZER_HPP
#define MLCALIB_JOINT_OPTIMIZER_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlcalib/geometry.hpp"
#include "mlcalib/kd_tree.hpp"

namespace mlcalib {

/// Per-sensor, per-stop clouds plus the current trajectory S and extrinsics C.
/// Sensor 0 is the reference; extrinsics.transforms[i - 1] belongs to
/// sensor i. Clouds are in their sensor's frame.
struct CalibrationSession {
  std::vector<std::vector<PointCloud>> clouds;  // [sensor][timestamp]
  ExtrinsicSet extrinsics;
  Trajectory trajectory;

  std::size_t num_sensors() const { return clouds.size(); }
  std::size_t num_timestamps() const { return trajectory.size(); }
  void validate() const;
};

/// Global pose of sensor i at stop j: S_j ∘ C_i (identity extrinsic for i = 0).
Pose sensor_pose(const ExtrinsicSet& extrinsics, const Trajectory& trajectory,
                 std::size_t sensor, std::size_t timestamp);

/// A calibrated-sensor point paired with its nearest reference-map point.
struct Correspondence {
  Point3 source = Point3::Zero();  // sensor frame
  Point3 target = Point3::Zero();  // global frame, at association time
  std::size_t sensor_index = 1;
  std::size_t timestamp_index = 0;
  /// When set, the target is a reference point observed at that stop and
  /// moves with the trajectory: target = S[target_timestamp] * target_local.
  std::optional<std::size_t> target_timestamp;
  Point3 target_local = Point3::Zero();
};

/// Accumulated reference-sensor map in the global frame.
struct ReferenceMap {
  PointCloud cloud;
  std::vector<Point3> local_points;
  std::vector<std::size_t> timestamp_of;
  KdTree index;
};

enum class RobustLoss { kNone, kHuber };

struct OptimizerConfig {
  int outer_iterations = 200;
  double max_correspondence_distance = 0.5;  // m
  int inner_max_iterations = 10;
  double gradient_tolerance = 1e-10;
  double parameter_tolerance = 1e-8;
  double cost_tolerance = 1e-8;  // relative decrease per accepted step
  /// Outer loop stops once an inner solve moves no parameter by more than this.
  double outer_parameter_tolerance = 1e-9;
  double lm_initial_damping = 1e-4;
  bool optimize_trajectory = true;
  /// Let the reference-map points follow their own trajectory pose inside
  /// each inner solve instead of treating them as fixed.
  bool couple_reference_map = true;
  /// After each outer step, also try continuing along the step direction and
  /// keep whichever pose set has the lower re-associated mean distance.
  /// Point-to-point ICP creeps along weakly constrained directions; this
  /// shortens the creep without changing the objective.
  bool extrapolate = true;
  RobustLoss robust_loss = RobustLoss::kNone;
  double huber_delta = 0.05;  // m

  void validate() const;
};

struct OptimizationReport {
  ExtrinsicSet extrinsics;
  Trajectory trajectory;
  /// Summed point distance at each outer association, before its inner solve.
  std::vector<double> cost_trace;
  std::vector<std::size_t> correspondence_counts;
  /// Extrinsics after each outer iteration.
  std::vector<ExtrinsicSet> extrinsic_trace;
  /// Squared-error cost after every accepted LM step, per outer iteration.
  std::vector<std::vector<double>> inner_cost_traces;
  double final_cost = 0.0;
  std::size_t final_correspondences = 0;
  int iterations = 0;
  std::string convergence_reason;
};

ReferenceMap build_reference_map(const Trajectory& trajectory,
                                 std::span<const PointCloud> reference_clouds);

/// Nearest reference-map point for every point of every calibrated sensor;
/// pairs farther than `max_distance` are dropped. Throws Error("association
/// failed") if nothing survives.
std::vector<Correspondence> associate(const ReferenceMap& map,
                                      const ExtrinsicSet& extrinsics,
                                      const Trajectory& trajectory,
                                      const std::vector<std::vector<PointCloud>>& clouds,
                                      double max_distance);

/// Sum of point distances (not squared) under the given parameters.
double evaluate_error(std::span<const Correspondence> correspondences,
                      const ExtrinsicSet& extrinsics, const Trajectory& trajectory);

/// Residual target - S_j C_i source and its partials with respect to a left
/// increment (axis-angle omega, translation delta) on each involved pose:
///   R <- exp(omega) R,  t <- t + delta.
/// Columns are ordered [omega, delta].
struct ResidualJacobian {
  Eigen::Vector3d residual = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, 3, 6> d_source_pose = Eigen::Matrix<double, 3, 6>::Zero();
  Eigen::Matrix<double, 3, 6> d_extrinsic = Eigen::Matrix<double, 3, 6>::Zero();
  Eigen::Matrix<double, 3, 6> d_target_pose = Eigen::Matrix<double, 3, 6>::Zero();
};

ResidualJacobian residual_jacobian(const Correspondence& c, const Pose& source_pose,
                                   const Pose& extrinsic, const Pose& target_pose);

/// Applies a left increment [omega, delta] to a pose.
Pose apply_increment(const Pose& pose, const Eigen::Matrix<double, 6, 1>& increment);

struct SolveResult {
  ExtrinsicSet extrinsics;
  Trajectory trajectory;
  std::vector<double> cost_trace;  // initial cost, then each accepted step
  double max_step = 0.0;           // largest accumulated parameter change
  int iterations = 0;
  bool diverged = false;
};

/// Levenberg-Marquardt on the squared residuals of a fixed correspondence
/// set, up to config.inner_max_iterations iterations.
SolveResult solve_fixed_correspondences(std::span<const Correspondence> correspondences,
                                        const ExtrinsicSet& extrinsics,
                                        const Trajectory& trajectory,
                                        const OptimizerConfig& config);

/// Associate / solve loop over the extrinsics and (optionally) the
/// trajectory. The first trajectory pose is held fixed.
OptimizationReport optimize(const CalibrationSession& session,
                            const OptimizerConfig& config);

}  // namespace mlcalib

#endif  // MLCALIB_JOINT_OPTIMIZER_HPP
