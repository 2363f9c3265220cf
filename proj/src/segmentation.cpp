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

#include "mlcalib/segmentation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

#include "mlcalib/kd_tree.hpp"

namespace mlcalib {
namespace {

std::vector<std::size_t> collect_inliers(const PointCloud& cloud, const Plane& plane,
                                         double threshold) {
  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (std::abs(plane.signed_distance(cloud.points[i])) <= threshold) {
      inliers.push_back(i);
    }
  }
  return inliers;
}

std::optional<Plane> least_squares_plane(const PointCloud& cloud,
                                         const std::vector<std::size_t>& indices) {
  if (indices.size() < 3) return std::nullopt;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (std::size_t i : indices) centroid += cloud.points[i];
  centroid /= static_cast<double>(indices.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i : indices) {
    const Eigen::Vector3d d = cloud.points[i] - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Eigen::Vector3d normal = eig.eigenvectors().col(0).normalized();
  return Plane{normal, -normal.dot(centroid)}.oriented_toward(Point3::Zero());
}

bool passes_gate(const Plane& plane, const std::optional<Eigen::Vector3d>& up,
                 double min_cos) {
  return !up || plane.normal.dot(*up) >= min_cos;
}

}  // namespace

void SegParams::validate() const {
  if (!(ransac_inlier_threshold > 0.0)) throw Error("segmentation: inlier threshold must be positive");
  if (ransac_max_iterations < 1) throw Error("segmentation: RANSAC iterations must be positive");
  if (!(cluster_radius > 0.0)) throw Error("segmentation: cluster radius must be positive");
  if (min_cluster_size < 1) throw Error("segmentation: min cluster size must be positive");
  if (!(max_floor_tilt_deg > 0.0 && max_floor_tilt_deg < 90.0)) {
    throw Error("segmentation: floor tilt gate must be in (0, 90) degrees");
  }
}

PlaneFit ransac_plane(const PointCloud& cloud, const SegParams& params,
                      const std::optional<Eigen::Vector3d>& up) {
  params.validate();
  if (cloud.size() < 3) throw Error("no plane");
  const double min_cos = std::cos(params.max_floor_tilt_deg * kDegToRad);
  const std::optional<Eigen::Vector3d> gate =
      up ? std::optional<Eigen::Vector3d>(up->normalized()) : std::nullopt;

  std::mt19937_64 rng(params.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);

  std::optional<Plane> best_plane;
  std::size_t best_count = 0;
  for (int it = 0; it < params.ransac_max_iterations; ++it) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    std::size_t c = pick(rng);
    if (a == b || a == c || b == c) continue;
    const Eigen::Vector3d& pa = cloud.points[a];
    const Eigen::Vector3d cross =
        (cloud.points[b] - pa).cross(cloud.points[c] - pa);
    const double norm = cross.norm();
    if (!(norm > 1e-12)) continue;  // collinear sample
    const Eigen::Vector3d n = cross / norm;
    const Plane hypothesis = Plane{n, -n.dot(pa)}.oriented_toward(Point3::Zero());
    if (!passes_gate(hypothesis, gate, min_cos)) continue;

    std::size_t count = 0;
    for (const auto& p : cloud.points) {
      if (std::abs(hypothesis.signed_distance(p)) <= params.ransac_inlier_threshold) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_plane = hypothesis;
    }
  }
  if (!best_plane) throw Error("no plane");

  PlaneFit fit;
  fit.plane = *best_plane;
  fit.inliers = collect_inliers(cloud, fit.plane, params.ransac_inlier_threshold);
  if (const auto refit = least_squares_plane(cloud, fit.inliers);
      refit && passes_gate(*refit, gate, min_cos)) {
    auto refit_inliers = collect_inliers(cloud, *refit, params.ransac_inlier_threshold);
    if (refit_inliers.size() >= 3) {
      fit.plane = *refit;
      fit.inliers = std::move(refit_inliers);
    }
  }
  return fit;
}

std::vector<std::vector<std::size_t>> euclidean_cluster(const PointCloud& cloud,
                                                        double radius,
                                                        std::size_t min_size) {
  std::vector<std::vector<std::size_t>> clusters;
  if (cloud.empty()) return clusters;
  const KdTree tree(cloud.points);
  std::vector<bool> visited(cloud.size(), false);
  std::vector<std::size_t> frontier;
  for (std::size_t seed = 0; seed < cloud.size(); ++seed) {
    if (visited[seed]) continue;
    std::vector<std::size_t> members{seed};
    visited[seed] = true;
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const std::size_t current = frontier.back();
      frontier.pop_back();
      for (std::size_t n : tree.radius(cloud.points[current], radius)) {
        if (visited[n]) continue;
        visited[n] = true;
        members.push_back(n);
        frontier.push_back(n);
      }
    }
    if (members.size() < min_size) continue;
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  // Seeds are visited in index order, so each cluster's lowest member is its
  // seed and a stable sort by size keeps the lowest-member tie-break.
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return clusters;
}

SegmentationResult segment_floor_objects(const PointCloud& cloud,
                                         const Eigen::Vector3d& sensor_up,
                                         const SegParams& params) {
  params.validate();
  if (cloud.size() < 3) throw Error("floor not found");
  PlaneFit fit;
  try {
    fit = ransac_plane(cloud, params, sensor_up);
  } catch (const Error&) {
    throw Error("floor not found");
  }

  SegmentationResult result;
  result.floor_plane = fit.plane;
  result.floor_indices = fit.inliers;
  result.floor = cloud.select(fit.inliers);

  std::vector<bool> is_floor(cloud.size(), false);
  for (std::size_t i : fit.inliers) is_floor[i] = true;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!is_floor[i]) rest.push_back(i);
  }
  const PointCloud remainder = cloud.select(rest);
  const auto clusters =
      euclidean_cluster(remainder, params.cluster_radius, params.min_cluster_size);

  for (const auto& members : clusters) {
    IndexRange range{result.object_indices.size(), 0};
    for (std::size_t m : members) result.object_indices.push_back(rest[m]);
    range.end = result.object_indices.size();
    result.clusters.push_back(range);
  }
  result.objects = cloud.select(result.object_indices);
  // Cluster-major order breaks the acquisition ordering.
  result.objects.acquisition_index.reset();
  result.discarded = rest.size() - result.object_indices.size();
  return result;
}

}  // namespace mlcalib
