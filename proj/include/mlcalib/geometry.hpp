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

#ifndef MLCALIB_GEOMETRY_HPP
#define MLCALIB_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlcalib {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;

/// Rigid transform in SE(3). Maps points of the child frame into the parent
/// frame: p_parent = rotation * p_child + translation.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }
  static Pose from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }
  static Pose from_rotation(const Eigen::Matrix3d& r) {
    return {r, Eigen::Vector3d::Zero()};
  }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  Pose inverse() const;
  Eigen::Matrix4d matrix() const;

  /// True when rotation is orthonormal with determinant +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// a∘b: apply b first, then a.
Pose compose(const Pose& a, const Pose& b);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

enum class PointLabel : std::uint8_t { kSurface = 0, kNoise = 1 };

/// Ordered point set with optional per-point labels and acquisition order.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<PointLabel>> labels;
  std::optional<std::vector<std::uint64_t>> acquisition_index;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws Error when a side channel has the wrong length or the
  /// acquisition order is not strictly increasing.
  void validate() const;

  /// Copy of the points at `indices` (in that order) with side channels.
  PointCloud select(std::span<const std::size_t> indices) const;

  /// Appends `other`. Side channels survive only if both clouds carry them.
  void append(const PointCloud& other);
};

/// Movement trajectory of the reference sensor, one pose per stop.
struct Trajectory {
  std::vector<Pose> poses;

  std::size_t size() const { return poses.size(); }
};

/// Reference-to-sensor transforms for the sensors L_1 ... L_{n-1}.
struct ExtrinsicSet {
  std::vector<Pose> transforms;

  std::size_t size() const { return transforms.size(); }
};

/// Plane n·x + offset = 0 with the observing sensor on the positive side.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double signed_distance(const Point3& p) const {
    return normal.dot(p) + offset;
  }
  /// Flips the plane if needed so that `origin` lies on the positive side.
  Plane oriented_toward(const Point3& origin) const;
  bool is_valid(double tol = 1e-9) const;
};

PointCloud transform_cloud(const Pose& pose, const PointCloud& cloud);
Plane transform_plane(const Pose& pose, const Plane& plane);

/// One centroid per occupied cubic voxel of edge `voxel_size`, in order of
/// first occupancy. Side channels are dropped.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

/// Angle of Ra^T Rb in degrees, in [0, 180].
double rotation_error_deg(const Eigen::Matrix3d& ra, const Eigen::Matrix3d& rb);
double translation_error_m(const Eigen::Vector3d& ta, const Eigen::Vector3d& tb);

Eigen::Matrix3d skew(const Eigen::Vector3d& v);
/// Rodrigues exponential of an axis-angle vector.
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega);
/// Inverse of exp_so3; returns the axis-angle vector with angle in [0, pi].
Eigen::Vector3d log_so3(const Eigen::Matrix3d& rotation);
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad);
/// Re-orthonormalizes a nearly orthonormal matrix.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& rotation);

}  // namespace mlcalib

#endif  // MLCALIB_GEOMETRY_HPP
