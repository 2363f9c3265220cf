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

#include "mlcalib/sim_scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mlcalib {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Real roots of a t^2 + 2 b t + c = 0 in ascending order.
std::optional<std::pair<double, double>> quadratic_roots(double a, double b, double c) {
  if (a <= 0.0) return std::nullopt;
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Numerically stable pair.
  const double q = -(b + std::copysign(sq, b));
  if (q == 0.0) return std::pair{0.0, 0.0};
  double t0 = q / a;
  double t1 = c / q;
  if (t0 > t1) std::swap(t0, t1);
  return std::pair{t0, t1};
}

void keep_min(double& best, double t) {
  if (t >= 0.0 && t < best) best = t;
}

double sphere_hit(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const Eigen::Vector3d& c,
                  double r) {
  const Eigen::Vector3d oc = o - c;
  const auto roots = quadratic_roots(d.squaredNorm(), oc.dot(d), oc.squaredNorm() - r * r);
  if (!roots) return kInf;
  if (roots->first >= 0.0) return roots->first;
  return roots->second >= 0.0 ? roots->second : kInf;
}

// Side of the infinite z-axis cylinder, restricted to |z| <= half.
void cylinder_side_hits(const Eigen::Vector3d& o, const Eigen::Vector3d& d, double r,
                        double half, double& best) {
  const auto roots = quadratic_roots(d.x() * d.x() + d.y() * d.y(),
                                     o.x() * d.x() + o.y() * d.y(),
                                     o.x() * o.x() + o.y() * o.y() - r * r);
  if (!roots) return;
  for (const double t : {roots->first, roots->second}) {
    if (std::abs(o.z() + t * d.z()) <= half) keep_min(best, t);
  }
}

std::optional<double> box_hit(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                              const Eigen::Vector3d& half) {
  double t_near = -kInf;
  double t_far = kInf;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (std::abs(o[a]) > half[a]) return std::nullopt;
      continue;
    }
    double t1 = (-half[a] - o[a]) / d[a];
    double t2 = (half[a] - o[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
  }
  if (t_near > t_far || t_far < 0.0) return std::nullopt;
  return t_near >= 0.0 ? t_near : t_far;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::Vector3d random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

}  // namespace

std::string to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kBox: return "box";
    case PrimitiveKind::kCylinder: return "cylinder";
    case PrimitiveKind::kCapsule: return "capsule";
  }
  return "unknown";
}

PrimitiveKind primitive_kind_from_string(const std::string& name) {
  if (name == "box") return PrimitiveKind::kBox;
  if (name == "cylinder") return PrimitiveKind::kCylinder;
  if (name == "capsule") return PrimitiveKind::kCapsule;
  throw Error("unknown primitive kind: " + name);
}

double Primitive::signed_distance(const Point3& world) const {
  const Eigen::Vector3d p = pose.rotation.transpose() * (world - pose.translation);
  switch (kind) {
    case PrimitiveKind::kBox: {
      const Eigen::Vector3d q = p.cwiseAbs() - dimensions / 2.0;
      return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
    }
    case PrimitiveKind::kCylinder: {
      const Eigen::Vector2d q(std::hypot(p.x(), p.y()) - dimensions.x(),
                              std::abs(p.z()) - dimensions.z() / 2.0);
      return std::min(q.maxCoeff(), 0.0) + q.cwiseMax(0.0).norm();
    }
    case PrimitiveKind::kCapsule: {
      const double r = dimensions.x();
      const double a = dimensions.z() / 2.0 - r;
      const double z = std::clamp(p.z(), -a, a);
      return (p - Eigen::Vector3d(0.0, 0.0, z)).norm() - r;
    }
  }
  return kInf;
}

std::optional<double> Primitive::intersect(const Point3& origin,
                                           const Eigen::Vector3d& dir) const {
  const Eigen::Vector3d o = pose.rotation.transpose() * (origin - pose.translation);
  const Eigen::Vector3d d = pose.rotation.transpose() * dir;
  double best = kInf;
  switch (kind) {
    case PrimitiveKind::kBox:
      return box_hit(o, d, dimensions / 2.0);
    case PrimitiveKind::kCylinder: {
      const double r = dimensions.x();
      const double half = dimensions.z() / 2.0;
      cylinder_side_hits(o, d, r, half, best);
      if (d.z() != 0.0) {
        for (const double zc : {-half, half}) {
          const double t = (zc - o.z()) / d.z();
          const Eigen::Vector3d h = o + t * d;
          if (h.x() * h.x() + h.y() * h.y() <= r * r) keep_min(best, t);
        }
      }
      break;
    }
    case PrimitiveKind::kCapsule: {
      // Union of a finite cylinder and two end balls; any cap-disk crossing
      // is preceded by a ball crossing, so the disks can be skipped.
      const double r = dimensions.x();
      const double a = dimensions.z() / 2.0 - r;
      cylinder_side_hits(o, d, r, a, best);
      keep_min(best, sphere_hit(o, d, Eigen::Vector3d(0.0, 0.0, a), r));
      keep_min(best, sphere_hit(o, d, Eigen::Vector3d(0.0, 0.0, -a), r));
      break;
    }
  }
  if (best == kInf) return std::nullopt;
  return best;
}

void SceneSpec::validate() const {
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const auto& obj = objects[k];
    const std::string where = "scene object " + std::to_string(k);
    if (!obj.pose.is_valid(1e-6)) throw Error(where + ": invalid pose");
    if (!(obj.dimensions.array() > 0.0).all() || !obj.dimensions.allFinite()) {
      throw Error(where + ": dimensions must be positive");
    }
    if (obj.kind == PrimitiveKind::kCapsule && obj.dimensions.z() < 2.0 * obj.dimensions.x()) {
      throw Error(where + ": capsule length shorter than its diameter");
    }
  }
}

double SceneSpec::signed_distance(const Point3& world) const {
  double d = world.z();
  for (const auto& obj : objects) d = std::min(d, obj.signed_distance(world));
  return d;
}

SceneSpec make_object_ring(const ObjectLayout& layout, std::uint64_t seed) {
  if (layout.height <= 0.0 || layout.min_radius < 0.0 || layout.max_radius <= layout.min_radius) {
    throw Error("make_object_ring: invalid layout");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> area(layout.min_radius * layout.min_radius,
                                              layout.max_radius * layout.max_radius);
  std::uniform_real_distribution<double> angle(-kPi, kPi);

  SceneSpec scene;
  std::vector<Eigen::Vector2d> centers;
  int attempts = 0;
  while (centers.size() < layout.count) {
    if (++attempts > 100000) throw Error("make_object_ring: cannot place objects");
    const double r = std::sqrt(area(rng));
    const double phi = angle(rng);
    const Eigen::Vector2d c(r * std::cos(phi), r * std::sin(phi));
    const bool clear = std::all_of(centers.begin(), centers.end(), [&](const auto& o) {
      return (o - c).norm() >= layout.min_separation;
    });
    if (!clear) continue;
    centers.push_back(c);

    Primitive obj;
    obj.kind = layout.kind;
    const Eigen::Matrix3d yaw = axis_angle(Eigen::Vector3d::UnitZ(), angle(rng));
    switch (layout.kind) {
      case PrimitiveKind::kBox:
        obj.dimensions = Eigen::Vector3d(0.4, 0.3, layout.height);
        obj.pose.rotation = yaw;
        break;
      case PrimitiveKind::kCylinder:
        obj.dimensions = Eigen::Vector3d(0.15, 0.15, layout.height);
        obj.pose.rotation = yaw;
        break;
      case PrimitiveKind::kCapsule:
        // Lying on its side, so its height is the diameter.
        obj.dimensions = Eigen::Vector3d(layout.height / 2.0, layout.height / 2.0, 0.55);
        obj.pose.rotation = yaw * axis_angle(Eigen::Vector3d::UnitY(), kPi / 2.0);
        break;
    }
    obj.pose.translation = Eigen::Vector3d(c.x(), c.y(), layout.height / 2.0);
    scene.objects.push_back(obj);
  }
  return scene;
}

void SensorMount::validate() const {
  if (!base_from_sensor.is_valid(1e-6)) throw Error("sensor mount: invalid pose");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw Error("sensor mount: fov out of range");
  if (!(max_range > 0.0)) throw Error("sensor mount: max_range must be positive");
}

namespace {

// Looks along base yaw `yaw_deg`, pitched down by `pitch_deg`.
SensorMount mount(double x, double y, double z, double yaw_deg, double pitch_deg) {
  SensorMount m;
  m.base_from_sensor.rotation = axis_angle(Eigen::Vector3d::UnitZ(), yaw_deg * kDegToRad) *
                                axis_angle(Eigen::Vector3d::UnitY(), pitch_deg * kDegToRad);
  m.base_from_sensor.translation = Eigen::Vector3d(x, y, z);
  return m;
}

}  // namespace

std::vector<SensorMount> make_two_sensor_mounts() {
  return {mount(0.25, 0.0, 0.34, 0.0, 35.4), mount(-0.25, 0.0, 0.28, 180.0, 34.4)};
}

std::vector<SensorMount> make_four_sensor_mounts() {
  auto mounts = make_two_sensor_mounts();
  mounts.push_back(mount(0.0, 0.2, 0.31, 90.0, 30.0));
  mounts.push_back(mount(0.0, -0.2, 0.31, -90.0, 30.0));
  return mounts;
}

void ScanSchedule::validate() const {
  if (base_poses.empty()) throw Error("scan schedule: no poses");
  if (points_per_scan == 0) throw Error("scan schedule: points_per_scan must be positive");
  for (std::size_t j = 0; j < base_poses.size(); ++j) {
    if (!base_poses[j].is_valid(1e-6)) {
      throw Error("scan schedule: invalid pose at timestamp " + std::to_string(j));
    }
  }
}

double ScanSchedule::phase(std::size_t timestamp) const {
  if (timestamp < phase_offsets.size()) return phase_offsets[timestamp];
  const double golden = 0.6180339887498949;
  const double frac = std::fmod(static_cast<double>(timestamp) * golden, 1.0);
  return frac * kPi;
}

ScanSchedule make_in_place_rotation(std::size_t num_poses, double base_height,
                                    std::size_t points_per_scan) {
  if (num_poses == 0) throw Error("make_in_place_rotation: num_poses must be positive");
  ScanSchedule schedule;
  schedule.points_per_scan = points_per_scan;
  for (std::size_t j = 0; j < num_poses; ++j) {
    Pose p;
    p.rotation = axis_angle(Eigen::Vector3d::UnitZ(),
                            2.0 * kPi * static_cast<double>(j) / static_cast<double>(num_poses));
    p.translation = Eigen::Vector3d(0.0, 0.0, base_height);
    schedule.base_poses.push_back(p);
  }
  return schedule;
}

void NoiseParams::validate() const {
  if (!(discontinuity_threshold > 0.0)) throw Error("noise: threshold must be positive");
  if (min_points < 1 || max_points < min_points) throw Error("noise: bad point count range");
  if (!(range_noise_std >= 0.0)) throw Error("noise: range_noise_std must be >= 0");
}

std::vector<Eigen::Vector3d> rosette_directions(std::size_t n, double phase, double fov_deg) {
  const double half = 0.5 * fov_deg * kDegToRad;
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n);
    const double polar = half * std::abs(std::sin(kRosetteRadialRate * s + phase));
    const double az = 2.0 * kPi * kRosetteAzimuthRate * s;
    dirs.emplace_back(std::cos(polar), std::sin(polar) * std::cos(az),
                      std::sin(polar) * std::sin(az));
  }
  return dirs;
}

std::optional<RayHit> ray_cast(const Point3& origin, const Eigen::Vector3d& dir,
                               const SceneSpec& scene, double max_range) {
  double best = kInf;
  int id = kFloorSurface;
  if (dir.z() < 0.0 && origin.z() > 0.0) best = -origin.z() / dir.z();
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const auto t = scene.objects[k].intersect(origin, dir);
    if (t && *t < best) {
      best = *t;
      id = static_cast<int>(k) + 1;
    }
  }
  if (!(best <= max_range)) return std::nullopt;
  return RayHit{origin + best * dir, id, best};
}

RawScan cast_scan(const SceneSpec& scene, const SensorMount& mount,
                  const Pose& world_from_sensor, std::size_t points, double phase,
                  const NoiseParams& noise, std::mt19937_64& rng) {
  RawScan scan;
  scan.directions = rosette_directions(points, phase, mount.fov_deg);
  scan.hits.reserve(points);
  std::normal_distribution<double> jitter(0.0, noise.range_noise_std);
  for (const auto& d : scan.directions) {
    auto hit = ray_cast(world_from_sensor.translation, world_from_sensor.rotation * d, scene,
                        mount.max_range);
    if (hit) {
      if (noise.range_noise_std > 0.0) hit->range = std::max(0.0, hit->range + jitter(rng));
      hit->point = hit->range * d;
    }
    scan.hits.push_back(hit);
  }
  return scan;
}

LabeledScan inject_bleeding_noise(const RawScan& scan, const NoiseParams& params,
                                  std::mt19937_64& rng) {
  if (scan.directions.size() != scan.hits.size()) {
    throw Error("inject_bleeding_noise: directions and hits differ in length");
  }
  LabeledScan out;
  std::vector<PointLabel> labels;
  std::uniform_int_distribution<int> count(params.min_points, params.max_points);
  const std::size_t n = scan.hits.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& a = scan.hits[k];
    if (!a) continue;
    out.cloud.points.push_back(a->point);
    out.surface_ids.push_back(a->surface_id);
    labels.push_back(PointLabel::kSurface);
    if (!params.bleeding || k + 1 >= n) continue;
    const auto& b = scan.hits[k + 1];
    if (!b || a->surface_id == b->surface_id) continue;
    if (std::abs(a->range - b->range) <= params.discontinuity_threshold) continue;

    const Eigen::Vector3d dir = (scan.directions[k] + scan.directions[k + 1]).normalized();
    const double lo = std::min(a->range, b->range);
    const double hi = std::max(a->range, b->range);
    std::uniform_real_distribution<double> range(lo, hi);
    const int m = count(rng);
    for (int e = 0; e < m; ++e) {
      double r = range(rng);
      if (r <= lo) r = std::nextafter(lo, hi);
      out.cloud.points.push_back(r * dir);
      out.surface_ids.push_back(kNoiseSurface);
      labels.push_back(PointLabel::kNoise);
      ++out.injected;
    }
  }
  std::vector<std::uint64_t> order(out.cloud.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  out.cloud.labels = std::move(labels);
  out.cloud.acquisition_index = std::move(order);
  return out;
}

SimDataset render_dataset(const SceneSpec& scene, const std::vector<SensorMount>& mounts,
                          const ScanSchedule& schedule, const NoiseParams& noise,
                          std::uint64_t seed) {
  scene.validate();
  schedule.validate();
  noise.validate();
  if (mounts.empty()) throw Error("render_dataset: no sensors");
  for (const auto& m : mounts) m.validate();

  const std::size_t ns = mounts.size();
  const std::size_t nt = schedule.base_poses.size();
  SimDataset data;
  data.clouds.assign(ns, std::vector<PointCloud>(nt));
  data.truth.surface_ids.assign(ns, std::vector<std::vector<int>>(nt));
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      std::mt19937_64 rng(mix_seed(seed, i, j));
      const Pose world_from_sensor = schedule.base_poses[j] * mounts[i].base_from_sensor;
      const RawScan raw = cast_scan(scene, mounts[i], world_from_sensor,
                                    schedule.points_per_scan, schedule.phase(j), noise, rng);
      LabeledScan labeled = inject_bleeding_noise(raw, noise, rng);
      if (labeled.cloud.empty()) {
        throw Error("render_dataset: sensor " + std::to_string(i) + " at timestamp " +
                    std::to_string(j) + " produced no points");
      }
      data.clouds[i][j] = std::move(labeled.cloud);
      data.truth.surface_ids[i][j] = std::move(labeled.surface_ids);
    }
  }

  const Pose& ref_mount = mounts[0].base_from_sensor;
  for (std::size_t i = 1; i < ns; ++i) {
    data.truth.extrinsics.transforms.push_back(ref_mount.inverse() * mounts[i].base_from_sensor);
  }
  const Pose world_from_ref0 = schedule.base_poses[0] * ref_mount;
  const Pose ref0_from_world = world_from_ref0.inverse();
  for (std::size_t j = 0; j < nt; ++j) {
    data.truth.trajectory.poses.push_back(ref0_from_world * schedule.base_poses[j] * ref_mount);
  }
  data.up_reference = world_from_ref0.rotation.transpose() * Eigen::Vector3d::UnitZ();
  return data;
}

Pose perturb_pose(const Pose& pose, double max_translation, double max_rotation_deg,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Vector3d t_dir = random_unit_vector(rng);
  const double radius = max_translation * std::cbrt(unit(rng));
  const Eigen::Vector3d r_axis = random_unit_vector(rng);
  const double angle = max_rotation_deg * kDegToRad * unit(rng);
  Pose out;
  out.rotation = axis_angle(r_axis, angle) * pose.rotation;
  out.translation = pose.translation + radius * t_dir;
  return out;
}

std::pair<ExtrinsicSet, Trajectory> perturb_parameters(const ExtrinsicSet& extrinsics,
                                                       const Trajectory& trajectory,
                                                       const PerturbationBounds& bounds,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ExtrinsicSet c = extrinsics;
  for (auto& p : c.transforms) {
    p = perturb_pose(p, bounds.extrinsic_translation, bounds.extrinsic_rotation_deg, rng);
  }
  Trajectory s = trajectory;
  for (std::size_t j = 1; j < s.size(); ++j) {
    s.poses[j] = perturb_pose(s.poses[j], bounds.trajectory_translation,
                              bounds.trajectory_rotation_deg, rng);
  }
  return {c, s};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x9e3779b97f4a7c15ULL + 1));
}

}  // namespace mlcalib
