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

#ifndef MLCALIB_ROUGH_REFINE_HPP
#define MLCALIB_ROUGH_REFINE_HPP

#include <span>

#include "mlcalib/geometry.hpp"

namespace mlcalib {

// Coarse correction that makes every observed floor plane coincide with the
// reference sensor's floor at the first stop. Only the plane-observable
// degrees of freedom move: tilt relative to the floor and height above it.
// Translation within the floor and rotation about its normal are untouched.

/// Floor plane seen by one sensor at one stop, in that sensor's frame.
struct PlaneObservation {
  std::size_t sensor_index = 0;
  std::size_t timestamp_index = 0;
  Plane plane;
};

/// Minimal rotation taking v onto u. Parallel inputs give identity;
/// anti-parallel inputs give a half turn about an axis perpendicular to v,
/// built from the coordinate axis of v's smallest-magnitude component.
Eigen::Matrix3d rotation_between(const Eigen::Vector3d& u, const Eigen::Vector3d& v);

/// Aligns the reference sensor's floor at every stop t_j > 0 with its floor
/// at t_0. `reference_floor` must contain a sensor-0 observation for every
/// timestamp of `trajectory`; the t_0 pose is left unchanged.
Trajectory refine_trajectory(const Trajectory& trajectory,
                             std::span<const PlaneObservation> reference_floor);

/// Aligns each sensor's t_0 floor, mapped through its extrinsic into the
/// reference frame, with the reference sensor's t_0 floor. Needs t_0
/// observations for sensor 0 and for every sensor 1..n-1.
ExtrinsicSet refine_extrinsics(const ExtrinsicSet& extrinsics,
                               std::span<const PlaneObservation> floor_at_t0);

}  // namespace mlcalib

#endif  // MLCALIB_ROUGH_REFINE_HPP
