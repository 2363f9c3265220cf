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

#include "mlcalib/joint_optimizer.hpp"

#include <gtest/gtest.h>

#include <random>

namespace mlcalib {
namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;

Pose random_pose(std::mt19937_64& rng, double t_scale, double max_angle) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, max_angle);
  const Eigen::Vector3d axis(n(rng), n(rng), n(rng));
  return {axis_angle(axis, u(rng)), Eigen::Vector3d(n(rng), n(rng), n(rng)) * t_scale};
}

// Residual evaluated from scratch, no Jacobian code involved.
Eigen::Vector3d residual(const Correspondence& c, const Pose& src, const Pose& ext,
                         const Pose& tgt) {
  const Point3 target = c.target_timestamp ? tgt.apply(c.target_local) : c.target;
  return target - src.apply(ext.apply(c.source));
}

TEST(ResidualJacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    Correspondence c;
    c.source = Eigen::Vector3d::Random() * 3;
    c.target_local = Eigen::Vector3d::Random() * 3;
    c.target = Eigen::Vector3d::Random();
    if (trial % 2 == 0) c.target_timestamp = 2;
    const Pose src = random_pose(rng, 1, 3), ext = random_pose(rng, 1, 3), tgt = random_pose(rng, 1, 3);
    const ResidualJacobian j = residual_jacobian(c, src, ext, tgt);
    EXPECT_TRUE(j.residual.isApprox(residual(c, src, ext, tgt), 1e-12));
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
      Vector6d d = Vector6d::Zero();
      d[k] = h;
      const Eigen::Vector3d ds = (residual(c, apply_increment(src, d), ext, tgt) -
                                  residual(c, apply_increment(src, -d), ext, tgt)) / (2 * h);
      const Eigen::Vector3d de = (residual(c, src, apply_increment(ext, d), tgt) -
                                  residual(c, src, apply_increment(ext, -d), tgt)) / (2 * h);
      const Eigen::Vector3d dt = (residual(c, src, ext, apply_increment(tgt, d)) -
                                  residual(c, src, ext, apply_increment(tgt, -d))) / (2 * h);
      auto rel = [](const Eigen::Vector3d& num, const Eigen::Vector3d& ana) {
        return (num - ana).norm() / std::max(1.0, ana.norm());
      };
      EXPECT_LT(rel(ds, j.d_source_pose.col(k)), 1e-5);
      EXPECT_LT(rel(de, j.d_extrinsic.col(k)), 1e-5);
      EXPECT_LT(rel(dt, j.d_target_pose.col(k)), 1e-5);
    }
    if (!c.target_timestamp) EXPECT_TRUE(j.d_target_pose.isZero());
  }
}

TEST(ApplyIncrement, IsLeftRotationPlusTranslation) {
  std::mt19937_64 rng(2);
  const Pose p = random_pose(rng, 1, 2);
  Vector6d d;
  d << 0.1, -0.2, 0.05, 1, 2, 3;
  const Pose q = apply_increment(p, d);
  EXPECT_TRUE(q.rotation.isApprox(Eigen::AngleAxisd(d.head<3>().norm(), d.head<3>().normalized())
                                          .toRotationMatrix() * p.rotation));
  EXPECT_TRUE(q.translation.isApprox(p.translation + d.tail<3>()));
}

TEST(SensorPose, ComposesTrajectoryAndExtrinsic) {
  std::mt19937_64 rng(3);
  ExtrinsicSet c{{random_pose(rng, 1, 1), random_pose(rng, 1, 1)}};
  Trajectory s{{random_pose(rng, 1, 1), random_pose(rng, 1, 1)}};
  EXPECT_EQ(sensor_pose(c, s, 0, 1).matrix(), s.poses[1].matrix());
  EXPECT_TRUE(sensor_pose(c, s, 2, 1).matrix().isApprox(s.poses[1].matrix() * c.transforms[1].matrix()));
}

// Points scattered on a few random surfaces around the origin, world frame.
std::vector<Point3> world_points(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u(rng), b = u(rng);
    switch (i % 4) {
      case 0: pts.emplace_back(2 * a, 2 * b, 0.0); break;
      case 1: pts.emplace_back(1.5, a, 0.5 + 0.5 * b); break;
      case 2: pts.emplace_back(a, -1.2, 0.5 + 0.5 * b); break;
      default: pts.emplace_back(0.4 * a - 0.5, 0.3 * b + 0.5, 0.3 + 0.3 * std::sin(3 * a)); break;
    }
  }
  return pts;
}

PointCloud observe(const std::vector<Point3>& world, const Pose& world_from_sensor) {
  PointCloud c;
  const Pose inv = world_from_sensor.inverse();
  for (const auto& p : world) c.points.push_back(inv.apply(p));
  return c;
}

struct Problem {
  CalibrationSession truth;
  CalibrationSession start;
};

// Every sensor sees the same world points at every stop, so the true
// parameters give zero residuals.
Problem shared_view_problem(std::uint64_t seed, std::size_t sensors, std::size_t stops,
                            double perturbation) {
  std::mt19937_64 rng(seed);
  const auto world = world_points(seed, 3000);
  Problem p;
  p.truth.trajectory.poses.push_back(Pose::identity());
  for (std::size_t j = 1; j < stops; ++j) p.truth.trajectory.poses.push_back(random_pose(rng, 0.3, 0.5));
  for (std::size_t i = 1; i < sensors; ++i) p.truth.extrinsics.transforms.push_back(random_pose(rng, 0.3, 0.5));
  p.truth.clouds.resize(sensors);
  for (std::size_t i = 0; i < sensors; ++i) {
    for (std::size_t j = 0; j < stops; ++j) {
      p.truth.clouds[i].push_back(observe(world, sensor_pose(p.truth.extrinsics, p.truth.trajectory, i, j)));
    }
  }
  p.start = p.truth;
  for (auto& c : p.start.extrinsics.transforms) c = random_pose(rng, perturbation, perturbation) * c;
  for (std::size_t j = 1; j < stops; ++j) {
    p.start.trajectory.poses[j] = random_pose(rng, perturbation, perturbation) * p.start.trajectory.poses[j];
  }
  return p;
}

TEST(ReferenceMap, HoldsReferencePointsInGlobalFrame) {
  const Problem p = shared_view_problem(4, 2, 3, 0.0);
  const ReferenceMap map = build_reference_map(p.truth.trajectory, p.truth.clouds[0]);
  ASSERT_EQ(map.cloud.size(), 3 * p.truth.clouds[0][0].size());
  for (std::size_t k = 0; k < map.cloud.size(); k += 97) {
    const std::size_t j = map.timestamp_of[k];
    EXPECT_TRUE(map.cloud.points[k].isApprox(p.truth.trajectory.poses[j].apply(map.local_points[k])));
  }
  EXPECT_THROW(build_reference_map(p.truth.trajectory, std::span(p.truth.clouds[0]).first(2)), Error);
}

TEST(Associate, MatchesBruteForceWithGate) {
  Problem p = shared_view_problem(5, 2, 2, 0.05);
  for (auto& per_sensor : p.start.clouds) {
    for (auto& c : per_sensor) c.points.resize(300);
  }
  const ReferenceMap map = build_reference_map(p.start.trajectory, p.start.clouds[0]);
  const double gate = 0.05;
  const auto corr = associate(map, p.start.extrinsics, p.start.trajectory, p.start.clouds, gate);
  std::size_t k = 0;
  for (std::size_t j = 0; j < 2; ++j) {
    const Pose pose = sensor_pose(p.start.extrinsics, p.start.trajectory, 1, j);
    for (const auto& src : p.start.clouds[1][j].points) {
      const Point3 g = pose.apply(src);
      std::size_t best = 0;
      for (std::size_t m = 1; m < map.cloud.size(); ++m) {
        if ((map.cloud.points[m] - g).squaredNorm() < (map.cloud.points[best] - g).squaredNorm()) best = m;
      }
      if ((map.cloud.points[best] - g).norm() > gate) continue;
      ASSERT_LT(k, corr.size());
      EXPECT_EQ(corr[k].target, map.cloud.points[best]);
      EXPECT_EQ(corr[k].timestamp_index, j);
      ++k;
    }
  }
  EXPECT_EQ(k, corr.size());
  EXPECT_THROW(associate(map, p.start.extrinsics, p.start.trajectory, p.start.clouds, 1e-9), Error);
}

TEST(EvaluateError, SumsDistances) {
  Correspondence a, b;
  a.source = Point3(1, 0, 0);
  a.target = Point3(1, 0, 3);
  b.source = Point3(0, 0, 0);
  b.target = Point3(4, 0, 0);
  const ExtrinsicSet c{{Pose::identity()}};
  const Trajectory s{{Pose::identity()}};
  const Correspondence list[] = {a, b};
  EXPECT_DOUBLE_EQ(evaluate_error(list, c, s), 7.0);
}

// Known pairings (sensor-1 point k with reference point k at the same stop).
std::vector<Correspondence> exact_pairs(const CalibrationSession& truth) {
  std::vector<Correspondence> out;
  for (std::size_t j = 0; j < truth.num_timestamps(); ++j) {
    for (std::size_t k = 0; k < truth.clouds[1][j].size(); k += 5) {
      Correspondence c;
      c.source = truth.clouds[1][j].points[k];
      c.timestamp_index = j;
      c.target_timestamp = j;
      c.target_local = truth.clouds[0][j].points[k];
      c.target = truth.trajectory.poses[j].apply(c.target_local);
      out.push_back(c);
    }
  }
  return out;
}

TEST(SolveFixedCorrespondences, RecoversExtrinsicWithKnownPairs) {
  const Problem p = shared_view_problem(6, 2, 3, 0.1);
  OptimizerConfig config;
  config.optimize_trajectory = false;
  config.inner_max_iterations = 50;
  const auto pairs = exact_pairs(p.truth);
  const SolveResult r =
      solve_fixed_correspondences(pairs, p.start.extrinsics, p.truth.trajectory, config);
  EXPECT_FALSE(r.diverged);
  EXPECT_TRUE(r.extrinsics.transforms[0].matrix().isApprox(p.truth.extrinsics.transforms[0].matrix(), 1e-9));
  for (std::size_t k = 1; k < r.cost_trace.size(); ++k) EXPECT_LE(r.cost_trace[k], r.cost_trace[k - 1]);
}

TEST(SolveFixedCorrespondences, JointSolveHoldsFirstPose) {
  const Problem p = shared_view_problem(7, 2, 4, 0.05);
  OptimizerConfig config;
  config.inner_max_iterations = 50;
  const SolveResult r =
      solve_fixed_correspondences(exact_pairs(p.truth), p.start.extrinsics, p.start.trajectory, config);
  EXPECT_EQ(r.trajectory.poses[0].matrix(), p.start.trajectory.poses[0].matrix());
  EXPECT_LT(r.cost_trace.back(), 1e-3 * r.cost_trace.front());
}

TEST(Optimize, ConvergesFromPerturbedStart) {
  const Problem p = shared_view_problem(8, 3, 4, 0.03);
  OptimizerConfig config;
  config.max_correspondence_distance = 0.3;
  const OptimizationReport r = optimize(p.start, config);
  EXPECT_EQ(r.convergence_reason, "converged");
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LT(translation_error_m(r.extrinsics.transforms[i].translation,
                                  p.truth.extrinsics.transforms[i].translation), 1e-3);
    EXPECT_LT(rotation_error_deg(r.extrinsics.transforms[i].rotation,
                                 p.truth.extrinsics.transforms[i].rotation), 0.05);
  }
  EXPECT_EQ(r.cost_trace.size(), static_cast<std::size_t>(r.iterations));
  EXPECT_EQ(r.extrinsic_trace.size(), static_cast<std::size_t>(r.iterations));
  EXPECT_LT(r.final_cost, r.cost_trace.front());
}

TEST(Optimize, ZeroPerturbationLeavesParametersUnchanged) {
  const Problem p = shared_view_problem(9, 2, 3, 0.0);
  const OptimizationReport r = optimize(p.truth, OptimizerConfig{});
  EXPECT_EQ(r.convergence_reason, "converged");
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.extrinsics.transforms[0].matrix().isApprox(p.truth.extrinsics.transforms[0].matrix(), 1e-12));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_TRUE(r.trajectory.poses[j].matrix().isApprox(p.truth.trajectory.poses[j].matrix(), 1e-12));
  }
  EXPECT_NEAR(r.final_cost, 0.0, 1e-9);
}

TEST(Optimize, ExtrapolationDoesNotChangeFixedPoint) {
  const Problem p = shared_view_problem(10, 2, 3, 0.03);
  OptimizerConfig plain;
  plain.extrapolate = false;
  plain.max_correspondence_distance = 0.3;
  OptimizerConfig fast = plain;
  fast.extrapolate = true;
  const OptimizationReport a = optimize(p.start, plain), b = optimize(p.start, fast);
  EXPECT_LT(translation_error_m(a.extrinsics.transforms[0].translation,
                                b.extrinsics.transforms[0].translation), 1e-4);
  EXPECT_LE(b.iterations, a.iterations);
}

TEST(OptimizerConfig, RejectsInvalidValues) {
  OptimizerConfig c;
  c.outer_iterations = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.max_correspondence_distance = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.robust_loss = RobustLoss::kHuber;
  c.huber_delta = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(CalibrationSession, ValidateChecksShapes) {
  Problem p = shared_view_problem(11, 2, 2, 0.0);
  EXPECT_NO_THROW(p.truth.validate());
  p.truth.extrinsics.transforms.push_back(Pose::identity());
  EXPECT_THROW(p.truth.validate(), Error);
}

}  // namespace
}  // namespace mlcalib
