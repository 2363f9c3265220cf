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

#include "mlcalib/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mlcalib {

Pose Pose::inverse() const {
  Pose out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

bool Pose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

void PointCloud::validate() const {
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error("point cloud contains a non-finite point");
  }
  if (labels && labels->size() != points.size()) {
    throw Error("point cloud labels do not match point count");
  }
  if (acquisition_index) {
    if (acquisition_index->size() != points.size()) {
      throw Error("point cloud acquisition index does not match point count");
    }
    for (std::size_t i = 1; i < acquisition_index->size(); ++i) {
      if ((*acquisition_index)[i] <= (*acquisition_index)[i - 1]) {
        throw Error("acquisition index is not strictly increasing");
      }
    }
  }
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  PointCloud out;
  out.points.reserve(indices.size());
  if (labels) out.labels.emplace().reserve(indices.size());
  if (acquisition_index) out.acquisition_index.emplace().reserve(indices.size());
  for (std::size_t i : indices) {
    out.points.push_back(points[i]);
    if (labels) out.labels->push_back((*labels)[i]);
    if (acquisition_index) {
      out.acquisition_index->push_back((*acquisition_index)[i]);
    }
  }
  return out;
}

void PointCloud::append(const PointCloud& other) {
  const bool had_points = !points.empty();
  if (labels && other.labels) {
    labels->insert(labels->end(), other.labels->begin(), other.labels->end());
  } else if (!had_points && other.labels) {
    labels = other.labels;
  } else {
    labels.reset();
  }
  // Concatenated acquisition orders are no longer monotone in general.
  acquisition_index.reset();
  points.insert(points.end(), other.points.begin(), other.points.end());
}

Plane Plane::oriented_toward(const Point3& origin) const {
  if (signed_distance(origin) >= 0.0) return *this;
  return Plane{-normal, -offset};
}

bool Plane::is_valid(double tol) const {
  return normal.allFinite() && std::isfinite(offset) &&
         std::abs(normal.norm() - 1.0) <= tol;
}

PointCloud transform_cloud(const Pose& pose, const PointCloud& cloud) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = pose.apply(p);
  return out;
}

Plane transform_plane(const Pose& pose, const Plane& plane) {
  Plane out;
  out.normal = pose.rotation * plane.normal;
  out.offset = plane.offset - out.normal.dot(pose.translation);
  // The old sensor origin maps to pose.translation.
  return out.oriented_toward(pose.translation);
}

double rotation_error_deg(const Eigen::Matrix3d& ra, const Eigen::Matrix3d& rb) {
  const double c = ((ra.transpose() * rb).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0)) * kRadToDeg;
}

double translation_error_m(const Eigen::Vector3d& ta, const Eigen::Vector3d& tb) {
  return (ta - tb).norm();
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d k = skew(omega);
  if (theta < 1e-8) {
    return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * k + b * k * k;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& rotation) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw Error("voxel size must be positive");
  struct Cell {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
  };
  // 21 bits per axis covers +-10 km at 1 cm voxels.
  auto key = [&](const Point3& p) {
    std::uint64_t k = 0;
    for (int a = 0; a < 3; ++a) {
      const auto c = static_cast<std::int64_t>(std::floor(p[a] / voxel_size));
      k = (k << 21) | (static_cast<std::uint64_t>(c) & 0x1FFFFF);
    }
    return k;
  };
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<Cell> cells;
  for (const Point3& p : cloud.points) {
    const auto [it, inserted] = slot.try_emplace(key(p), cells.size());
    if (inserted) cells.emplace_back();
    cells[it->second].sum += p;
    ++cells[it->second].count;
  }
  PointCloud out;
  out.points.reserve(cells.size());
  for (const Cell& c : cells) out.points.push_back(c.sum / c.count);
  return out;
}

}  // namespace mlcalib
