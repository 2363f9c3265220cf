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

#ifndef MLCALIB_SIM_SCENE_HPP
#define MLCALIB_SIM_SCENE_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mlcalib/geometry.hpp"

namespace mlcalib {

/// Synthetic multi-LiDAR scenes: an infinite floor at world z = 0 with
/// primitive objects on it, scanned by downward-tilted sensors that stop at
/// a sequence of platform poses.
///
/// Sensor frames look along +x. Scans follow a rose curve in angular
/// coordinates around the boresight,
///   polar(s)   = fov/2 * |sin(kRosetteRadialRate * s + phase)|
///   azimuth(s) = 2 pi * kRosetteAzimuthRate * s,   s = k / n,
/// which concentrates samples near the boresight like a prism-scanning
/// LiDAR. The two rates are incommensurate so a phase shift per stop yields a
/// different pattern every time.

constexpr double kRosetteRadialRate = 611.0;             // rad per scan
constexpr double kRosetteAzimuthRate = 37.529411764706;  // turns per scan

enum class PrimitiveKind { kBox, kCylinder, kCapsule };

std::string to_string(PrimitiveKind kind);
PrimitiveKind primitive_kind_from_string(const std::string& name);

/// Surface ids used in ground-truth labels.
constexpr int kFloorSurface = 0;
constexpr int kNoiseSurface = -1;

/// A primitive in its own frame, placed by `pose` (world_from_object).
/// Local axis z is the primitive axis and the origin is its center.
///   box:      dimensions = full extents (x, y, z)
///   cylinder: dimensions = (radius, radius, height), capped
///   capsule:  dimensions = (radius, radius, total length incl. caps)
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kBox;
  Pose pose;
  Eigen::Vector3d dimensions = Eigen::Vector3d::Constant(0.25);

  /// Exact signed distance in world coordinates (negative inside).
  double signed_distance(const Point3& world) const;
  /// Smallest ray parameter t >= 0 where origin + t * dir enters the
  /// surface, if any. `dir` must be unit length.
  std::optional<double> intersect(const Point3& origin, const Eigen::Vector3d& dir) const;
};

struct SceneSpec {
  std::vector<Primitive> objects;

  void validate() const;
  /// Signed distance to the nearest surface, floor included.
  double signed_distance(const Point3& world) const;
};

struct ObjectLayout {
  PrimitiveKind kind = PrimitiveKind::kBox;
  std::size_t count = 16;
  double height = 0.25;  // m
  double min_radius = 1.0;
  double max_radius = 2.2;
  double min_separation = 0.7;
};

/// Objects scattered on an annulus around the world origin, resting on the
/// floor, with random yaw. Deterministic per seed.
SceneSpec make_object_ring(const ObjectLayout& layout, std::uint64_t seed);

struct SensorMount {
  /// Sensor pose in the platform base frame.
  Pose base_from_sensor;
  double fov_deg = 70.4;
  double max_range = 8.0;  // m

  void validate() const;
};

/// Two sensors facing front and rear, tilted toward the floor.
std::vector<SensorMount> make_two_sensor_mounts();
/// Front, rear, left and right sensors with disjoint fields of view.
std::vector<SensorMount> make_four_sensor_mounts();

struct ScanSchedule {
  /// Ground-truth platform poses (world_from_base), one per stop.
  std::vector<Pose> base_poses;
  std::size_t points_per_scan = 10000;
  /// Rosette phase per stop; missing entries fall back to a golden-ratio
  /// sequence.
  std::vector<double> phase_offsets;

  void validate() const;
  double phase(std::size_t timestamp) const;
};

/// In-place rotation: `num_poses` stops evenly spread over a full turn.
ScanSchedule make_in_place_rotation(std::size_t num_poses = 16, double base_height = 0.54,
                                    std::size_t points_per_scan = 10000);

struct NoiseParams {
  bool bleeding = true;
  double discontinuity_threshold = 0.1;  // m
  int min_points = 1;
  int max_points = 3;
  double range_noise_std = 0.0;  // m, Gaussian jitter on surface returns

  void validate() const;
};

/// Unit directions of one rosette scan in the sensor frame.
std::vector<Eigen::Vector3d> rosette_directions(std::size_t n, double phase, double fov_deg);

struct RayHit {
  Point3 point = Point3::Zero();
  int surface_id = kFloorSurface;  // 0 floor, k >= 1 object k - 1
  double range = 0.0;
};

std::optional<RayHit> ray_cast(const Point3& origin, const Eigen::Vector3d& dir,
                               const SceneSpec& scene, double max_range);

/// One scan as cast: a direction per sample (sensor frame) and its return.
struct RawScan {
  std::vector<Eigen::Vector3d> directions;
  std::vector<std::optional<RayHit>> hits;  // points in the sensor frame
};

/// Scan converted to a labeled cloud. surface_ids is kNoiseSurface for
/// injected points.
struct LabeledScan {
  PointCloud cloud;
  std::vector<int> surface_ids;
  std::size_t injected = 0;
};

/// Emits the returns of `scan` in acquisition order and, for every pair of
/// consecutive returns that hit different surfaces with a range jump above
/// the threshold, 1..3 extra points along the mean ray at ranges between
/// the two surfaces, labeled as noise.
LabeledScan inject_bleeding_noise(const RawScan& scan, const NoiseParams& params,
                                  std::mt19937_64& rng);

struct GroundTruthBundle {
  ExtrinsicSet extrinsics;
  Trajectory trajectory;
  /// [sensor][timestamp][point]: 0 floor, k object k - 1, -1 noise.
  std::vector<std::vector<std::vector<int>>> surface_ids;
};

struct SimDataset {
  std::vector<std::vector<PointCloud>> clouds;  // [sensor][timestamp]
  GroundTruthBundle truth;
  /// World up direction in the reference sensor frame at the first stop.
  Eigen::Vector3d up_reference = Eigen::Vector3d::UnitZ();
};

/// Sensor-frame scan of sensor `mount` at world pose `world_from_sensor`.
RawScan cast_scan(const SceneSpec& scene, const SensorMount& mount,
                  const Pose& world_from_sensor, std::size_t points, double phase,
                  const NoiseParams& noise, std::mt19937_64& rng);

/// Renders every sensor at every stop. Throws if some scan has no returns.
SimDataset render_dataset(const SceneSpec& scene, const std::vector<SensorMount>& mounts,
                          const ScanSchedule& schedule, const NoiseParams& noise,
                          std::uint64_t seed);

struct PerturbationBounds {
  double extrinsic_translation = 0.2;     // m
  double extrinsic_rotation_deg = 5.0;
  double trajectory_translation = 0.2;    // m
  double trajectory_rotation_deg = 3.0;
};

/// Left-composes a random rigid offset: translation uniform in the ball of
/// radius max_translation, rotation about a uniform axis by an angle uniform
/// in [0, max_rotation_deg].
Pose perturb_pose(const Pose& pose, double max_translation, double max_rotation_deg,
                  std::mt19937_64& rng);

/// Perturbs every extrinsic and every trajectory pose except the first.
std::pair<ExtrinsicSet, Trajectory> perturb_parameters(const ExtrinsicSet& extrinsics,
                                                       const Trajectory& trajectory,
                                                       const PerturbationBounds& bounds,
                                                       std::uint64_t seed);

/// Stateless 64-bit mixer used to derive independent per-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace mlcalib

#endif  // MLCALIB_SIM_SCENE_HPP
