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

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <random>

namespace mlcalib {
namespace {

Pose random_pose(std::mt19937_64& rng, double t_scale, double max_angle) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, max_angle);
  const Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  return {axis_angle(axis, u(rng)), Eigen::Vector3d(n(rng), n(rng), n(rng)) * t_scale};
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Vector3d(n(rng), n(rng), n(rng)).normalized();
}

TEST(RotationBetween, MatchesFromTwoVectors) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d u = random_unit(rng), v = random_unit(rng);
    const Eigen::Matrix3d oracle = Eigen::Quaterniond::FromTwoVectors(v, u).toRotationMatrix();
    const Eigen::Matrix3d r = rotation_between(u, v);
    EXPECT_TRUE(r.isApprox(oracle, 1e-9));
    EXPECT_TRUE((r * v).isApprox(u, 1e-12));
  }
}

TEST(RotationBetween, DegenerateInputs) {
  const Eigen::Vector3d v(0.2, -0.9, 0.4);
  EXPECT_TRUE(rotation_between(v, 3.0 * v).isIdentity(1e-15));
  const Eigen::Matrix3d half = rotation_between(-v, v);
  EXPECT_TRUE((half * v).isApprox(-v, 1e-12));
  // Axis is v x e_k for the smallest |component| k (here x).
  const Eigen::Vector3d axis = v.cross(Eigen::Vector3d::UnitX()).normalized();
  EXPECT_TRUE(half.isApprox(axis_angle(axis, kPi), 1e-12));
}

struct Rig {
  ExtrinsicSet extrinsics;
  Trajectory trajectory;
  std::vector<PlaneObservation> reference_floor;  // sensor 0, every stop
  std::vector<PlaneObservation> floor_at_t0;      // every sensor, stop 0
};

// True rig above z = 0, observed exactly; estimates perturbed afterwards.
Rig noiseless_rig(std::uint64_t seed, std::size_t sensors, std::size_t stops,
                  double perturbation) {
  std::mt19937_64 rng(seed);
  ExtrinsicSet c;
  Trajectory s;
  for (std::size_t i = 1; i < sensors; ++i) c.transforms.push_back(random_pose(rng, 0.3, 0.6));
  s.poses.push_back(Pose::identity());
  for (std::size_t j = 1; j < stops; ++j) s.poses.push_back(random_pose(rng, 0.5, 0.8));
  const Pose world_from_global{axis_angle(Eigen::Vector3d::UnitY(), 0.5),
                               Eigen::Vector3d(0, 0, 0.6)};
  const Plane floor{Eigen::Vector3d::UnitZ(), 0.0};
  Rig rig;
  for (std::size_t j = 0; j < stops; ++j) {
    for (std::size_t i = 0; i < sensors; ++i) {
      const Pose sensor = i == 0 ? s.poses[j] : s.poses[j] * c.transforms[i - 1];
      const PlaneObservation o{i, j, transform_plane((world_from_global * sensor).inverse(), floor)};
      if (i == 0) rig.reference_floor.push_back(o);
      if (j == 0) rig.floor_at_t0.push_back(o);
    }
  }
  for (auto& p : c.transforms) p = random_pose(rng, perturbation, perturbation) * p;
  for (std::size_t j = 1; j < stops; ++j) {
    s.poses[j] = random_pose(rng, perturbation, perturbation) * s.poses[j];
  }
  rig.extrinsics = c;
  rig.trajectory = s;
  return rig;
}

double plane_gap(const Plane& a, const Plane& b) {
  return std::max((a.normal - b.normal).norm(), std::abs(a.offset - b.offset));
}

TEST(RefineTrajectory, AlignsEveryStopToFirstFloor) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Rig rig = noiseless_rig(seed, 2, 10, 0.1);
    const Trajectory out = refine_trajectory(rig.trajectory, rig.reference_floor);
    EXPECT_EQ(out.poses[0].matrix(), rig.trajectory.poses[0].matrix());
    const Plane anchor = transform_plane(out.poses[0], rig.reference_floor[0].plane);
    for (const auto& o : rig.reference_floor) {
      EXPECT_LT(plane_gap(transform_plane(out.poses[o.timestamp_index], o.plane), anchor), 1e-9);
    }
  }
}

TEST(RefineExtrinsics, AlignsEverySensorToReferenceFloor) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Rig rig = noiseless_rig(seed, 4, 2, 0.1);
    const ExtrinsicSet out = refine_extrinsics(rig.extrinsics, rig.floor_at_t0);
    const Plane& anchor = rig.floor_at_t0[0].plane;
    for (std::size_t i = 1; i < 4; ++i) {
      EXPECT_LT(plane_gap(transform_plane(out.transforms[i - 1], rig.floor_at_t0[i].plane), anchor),
                1e-9);
    }
  }
}

TEST(RefineExtrinsics, MovesOnlyPlaneObservableDegreesOfFreedom) {
  const Rig rig = noiseless_rig(7, 4, 2, 0.15);
  const ExtrinsicSet out = refine_extrinsics(rig.extrinsics, rig.floor_at_t0);
  const Eigen::Vector3d n = rig.floor_at_t0[0].plane.normal;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Eigen::Matrix3d delta =
        out.transforms[i].rotation * rig.extrinsics.transforms[i].rotation.transpose();
    // No rotation about the floor normal, no translation within the floor.
    EXPECT_NEAR(log_so3(delta).dot(n), 0.0, 1e-12);
    const Eigen::Vector3d dt = out.transforms[i].translation - rig.extrinsics.transforms[i].translation;
    EXPECT_NEAR(dt.cross(n).norm(), 0.0, 1e-12);
  }
}

TEST(RoughRefinement, IsIdempotent) {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const Rig rig = noiseless_rig(seed, 3, 6, 0.1);
    const Trajectory s1 = refine_trajectory(rig.trajectory, rig.reference_floor);
    const Trajectory s2 = refine_trajectory(s1, rig.reference_floor);
    for (std::size_t j = 0; j < s1.size(); ++j) {
      EXPECT_TRUE(s2.poses[j].matrix().isApprox(s1.poses[j].matrix(), 1e-9));
    }
    const ExtrinsicSet c1 = refine_extrinsics(rig.extrinsics, rig.floor_at_t0);
    const ExtrinsicSet c2 = refine_extrinsics(c1, rig.floor_at_t0);
    for (std::size_t i = 0; i < c1.size(); ++i) {
      EXPECT_TRUE(c2.transforms[i].matrix().isApprox(c1.transforms[i].matrix(), 1e-9));
    }
  }
}

TEST(RoughRefinement, LeavesTruthUnchanged) {
  const Rig rig = noiseless_rig(50, 3, 5, 0.0);
  const Trajectory s = refine_trajectory(rig.trajectory, rig.reference_floor);
  const ExtrinsicSet c = refine_extrinsics(rig.extrinsics, rig.floor_at_t0);
  for (std::size_t j = 0; j < s.size(); ++j) {
    EXPECT_TRUE(s.poses[j].matrix().isApprox(rig.trajectory.poses[j].matrix(), 1e-12));
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_TRUE(c.transforms[i].matrix().isApprox(rig.extrinsics.transforms[i].matrix(), 1e-12));
  }
}

TEST(RoughRefinement, ReportsMissingObservations) {
  Rig rig = noiseless_rig(60, 3, 4, 0.1);
  auto partial = rig.reference_floor;
  partial.erase(partial.begin() + 2);
  EXPECT_THROW(refine_trajectory(rig.trajectory, partial), Error);
  auto t0 = rig.floor_at_t0;
  t0.pop_back();
  EXPECT_THROW(refine_extrinsics(rig.extrinsics, t0), Error);
  t0 = rig.floor_at_t0;
  t0.erase(t0.begin());
  EXPECT_THROW(refine_extrinsics(rig.extrinsics, t0), Error);
}

}  // namespace
}  // namespace mlcalib
