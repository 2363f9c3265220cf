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

#include "mlcalib/rough_refine.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace mlcalib {
namespace {

std::optional<Plane> find_observation(std::span<const PlaneObservation> obs,
                                      std::size_t sensor, std::size_t timestamp) {
  for (const auto& o : obs) {
    if (o.sensor_index == sensor && o.timestamp_index == timestamp) return o.plane;
  }
  return std::nullopt;
}

// Rotates `pose` about the parent-frame origin so that the plane it carries
// gets normal `target.normal`, then slides it along that normal until the
// offsets agree.
Pose align_to_plane(const Pose& pose, const Plane& local, const Plane& target) {
  Pose out = pose;
  const Plane mapped = transform_plane(pose, local);
  out.rotation = rotation_between(target.normal, mapped.normal) * pose.rotation;
  const Plane rotated = transform_plane(out, local);
  out.translation += target.normal * (rotated.offset - target.offset);
  return out;
}

}  // namespace

Eigen::Matrix3d rotation_between(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const Eigen::Vector3d a = v.normalized();
  const Eigen::Vector3d b = u.normalized();
  const Eigen::Vector3d cross = a.cross(b);
  const double s = cross.norm();
  const double c = a.dot(b);
  if (s < 1e-15) {
    if (c > 0.0) return Eigen::Matrix3d::Identity();
    int k = 0;
    a.cwiseAbs().minCoeff(&k);
    const Eigen::Vector3d axis = a.cross(Eigen::Vector3d::Unit(k)).normalized();
    return axis_angle(axis, kPi);
  }
  // atan2 of (sin, cos) equals acos(clamp(c)) but keeps precision near 0.
  return axis_angle(cross / s, std::atan2(s, c));
}

Trajectory refine_trajectory(const Trajectory& trajectory,
                             std::span<const PlaneObservation> reference_floor) {
  if (trajectory.poses.empty()) throw Error("refine_trajectory: empty trajectory");
  std::vector<Plane> local(trajectory.size());
  for (std::size_t j = 0; j < trajectory.size(); ++j) {
    const auto obs = find_observation(reference_floor, 0, j);
    if (!obs) {
      throw Error("refine_trajectory: missing floor observation at timestamp " +
                  std::to_string(j));
    }
    local[j] = *obs;
  }
  const Plane reference = transform_plane(trajectory.poses[0], local[0]);
  Trajectory out = trajectory;
  for (std::size_t j = 1; j < trajectory.size(); ++j) {
    out.poses[j] = align_to_plane(trajectory.poses[j], local[j], reference);
  }
  return out;
}

ExtrinsicSet refine_extrinsics(const ExtrinsicSet& extrinsics,
                               std::span<const PlaneObservation> floor_at_t0) {
  const auto reference = find_observation(floor_at_t0, 0, 0);
  if (!reference) throw Error("refine_extrinsics: missing floor observation for sensor 0");
  ExtrinsicSet out = extrinsics;
  for (std::size_t i = 0; i < extrinsics.size(); ++i) {
    const std::size_t sensor = i + 1;
    const auto obs = find_observation(floor_at_t0, sensor, 0);
    if (!obs) {
      throw Error("refine_extrinsics: missing floor observation for sensor " +
                  std::to_string(sensor));
    }
    out.transforms[i] = align_to_plane(extrinsics.transforms[i], *obs, *reference);
  }
  return out;
}

}  // namespace mlcalib
