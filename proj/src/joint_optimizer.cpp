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

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mlcalib {
namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix36d = Eigen::Matrix<double, 3, 6>;

// Maps poses to 6-wide parameter blocks: extrinsics first, then trajectory
// poses 1..m-1. Pose 0 and (optionally) the whole trajectory are constant.
struct Layout {
  std::size_t num_extrinsics = 0;
  std::size_t num_timestamps = 0;
  bool optimize_trajectory = true;

  int extrinsic_block(std::size_t sensor) const {
    return sensor == 0 ? -1 : static_cast<int>(sensor - 1);
  }
  int trajectory_block(std::size_t timestamp) const {
    if (!optimize_trajectory || timestamp == 0) return -1;
    return static_cast<int>(num_extrinsics + timestamp - 1);
  }
  std::size_t num_blocks() const {
    return num_extrinsics + (optimize_trajectory && num_timestamps > 0 ? num_timestamps - 1 : 0);
  }
};

Pose target_pose_of(const Correspondence& c, const Trajectory& trajectory) {
  return c.target_timestamp ? trajectory.poses[*c.target_timestamp] : Pose::identity();
}

Point3 target_of(const Correspondence& c, const Trajectory& trajectory) {
  return c.target_timestamp ? trajectory.poses[*c.target_timestamp].apply(c.target_local)
                            : c.target;
}

Point3 predicted_of(const Correspondence& c, const ExtrinsicSet& extrinsics,
                    const Trajectory& trajectory) {
  return sensor_pose(extrinsics, trajectory, c.sensor_index, c.timestamp_index)
      .apply(c.source);
}

// rho(s) for squared norm s, and its derivative (the IRLS weight).
double loss(const OptimizerConfig& config, double s) {
  if (config.robust_loss == RobustLoss::kNone) return s;
  const double d = config.huber_delta;
  return s <= d * d ? s : 2.0 * d * std::sqrt(s) - d * d;
}
double loss_weight(const OptimizerConfig& config, double s) {
  if (config.robust_loss == RobustLoss::kNone) return 1.0;
  const double d = config.huber_delta;
  return s <= d * d ? 1.0 : d / std::sqrt(s);
}

double squared_cost(std::span<const Correspondence> correspondences,
                    const ExtrinsicSet& extrinsics, const Trajectory& trajectory,
                    const OptimizerConfig& config) {
  double sum = 0.0;
  for (const auto& c : correspondences) {
    const double s =
        (target_of(c, trajectory) - predicted_of(c, extrinsics, trajectory)).squaredNorm();
    sum += loss(config, s);
  }
  return 0.5 * sum;
}

void apply_step(const Layout& layout, const Eigen::VectorXd& step,
                ExtrinsicSet& extrinsics, Trajectory& trajectory) {
  for (std::size_t i = 0; i < layout.num_extrinsics; ++i) {
    extrinsics.transforms[i] =
        apply_increment(extrinsics.transforms[i], step.segment<6>(6 * i));
  }
  if (!layout.optimize_trajectory) return;
  for (std::size_t j = 1; j < layout.num_timestamps; ++j) {
    const int b = layout.trajectory_block(j);
    trajectory.poses[j] = apply_increment(trajectory.poses[j], step.segment<6>(6 * b));
  }
}

// Continues the motion from `before` to `after` by `gain` times that motion.
Pose extrapolate_pose(const Pose& before, const Pose& after, double gain) {
  Vector6d step;
  step.head<3>() = log_so3(after.rotation * before.rotation.transpose());
  step.tail<3>() = after.translation - before.translation;
  return apply_increment(after, gain * step);
}

}  // namespace

void CalibrationSession::validate() const {
  if (clouds.size() < 2) throw Error("session needs at least two sensors");
  if (trajectory.poses.empty()) throw Error("session trajectory is empty");
  if (extrinsics.size() != clouds.size() - 1) {
    throw Error("session needs one extrinsic per non-reference sensor");
  }
  for (const auto& per_sensor : clouds) {
    if (per_sensor.size() != trajectory.size()) {
      throw Error("session needs one cloud per sensor and timestamp");
    }
  }
}

Pose sensor_pose(const ExtrinsicSet& extrinsics, const Trajectory& trajectory,
                 std::size_t sensor, std::size_t timestamp) {
  const Pose& s = trajectory.poses[timestamp];
  if (sensor == 0) return s;
  return compose(s, extrinsics.transforms[sensor - 1]);
}

void OptimizerConfig::validate() const {
  if (outer_iterations < 1) throw Error("optimizer: outer_iterations must be at least 1");
  if (inner_max_iterations < 1) throw Error("optimizer: inner_max_iterations must be at least 1");
  if (!(max_correspondence_distance > 0.0)) {
    throw Error("optimizer: max_correspondence_distance must be positive");
  }
  if (!(gradient_tolerance > 0.0 && parameter_tolerance > 0.0 && cost_tolerance > 0.0 &&
        outer_parameter_tolerance > 0.0 && lm_initial_damping > 0.0)) {
    throw Error("optimizer: tolerances and damping must be positive");
  }
  if (robust_loss == RobustLoss::kHuber && !(huber_delta > 0.0)) {
    throw Error("optimizer: huber delta must be positive");
  }
}

ReferenceMap build_reference_map(const Trajectory& trajectory,
                                 std::span<const PointCloud> reference_clouds) {
  if (reference_clouds.size() != trajectory.size()) {
    throw Error("reference map: one cloud per timestamp required");
  }
  ReferenceMap map;
  for (std::size_t j = 0; j < reference_clouds.size(); ++j) {
    const Pose& pose = trajectory.poses[j];
    for (const auto& p : reference_clouds[j].points) {
      map.cloud.points.push_back(pose.apply(p));
      map.local_points.push_back(p);
      map.timestamp_of.push_back(j);
    }
  }
  if (map.cloud.empty()) throw Error("no reference objects");
  map.index = KdTree(map.cloud.points);
  return map;
}

std::vector<Correspondence> associate(const ReferenceMap& map,
                                      const ExtrinsicSet& extrinsics,
                                      const Trajectory& trajectory,
                                      const std::vector<std::vector<PointCloud>>& clouds,
                                      double max_distance) {
  if (map.index.empty()) throw Error("association failed: empty reference map");
  std::vector<Correspondence> out;
  const double max_sq = max_distance * max_distance;
  for (std::size_t i = 1; i < clouds.size(); ++i) {
    for (std::size_t j = 0; j < clouds[i].size(); ++j) {
      const Pose pose = sensor_pose(extrinsics, trajectory, i, j);
      for (const auto& p : clouds[i][j].points) {
        const Point3 g = pose.apply(p);
        const Neighbor nn = map.index.nearest(g);
        if (nn.distance_sq > max_sq) continue;
        Correspondence c;
        c.source = p;
        c.target = map.cloud.points[nn.index];
        c.sensor_index = i;
        c.timestamp_index = j;
        c.target_timestamp = map.timestamp_of[nn.index];
        c.target_local = map.local_points[nn.index];
        out.push_back(c);
      }
    }
  }
  if (out.empty()) throw Error("association failed");
  return out;
}

double evaluate_error(std::span<const Correspondence> correspondences,
                      const ExtrinsicSet& extrinsics, const Trajectory& trajectory) {
  double sum = 0.0;
  for (const auto& c : correspondences) {
    sum += (target_of(c, trajectory) - predicted_of(c, extrinsics, trajectory)).norm();
  }
  return sum;
}

ResidualJacobian residual_jacobian(const Correspondence& c, const Pose& source_pose,
                                   const Pose& extrinsic, const Pose& target_pose) {
  ResidualJacobian out;
  const Eigen::Vector3d rotated_source = extrinsic.rotation * c.source;
  const Eigen::Vector3d in_reference = rotated_source + extrinsic.translation;
  const Eigen::Vector3d predicted = source_pose.apply(in_reference);
  Eigen::Vector3d target = c.target;
  if (c.target_timestamp) {
    const Eigen::Vector3d rotated_target = target_pose.rotation * c.target_local;
    target = rotated_target + target_pose.translation;
    out.d_target_pose.leftCols<3>() = -skew(rotated_target);
    out.d_target_pose.rightCols<3>() = Eigen::Matrix3d::Identity();
  }
  out.residual = target - predicted;
  out.d_source_pose.leftCols<3>() = skew(source_pose.rotation * in_reference);
  out.d_source_pose.rightCols<3>() = -Eigen::Matrix3d::Identity();
  out.d_extrinsic.leftCols<3>() = source_pose.rotation * skew(rotated_source);
  out.d_extrinsic.rightCols<3>() = -source_pose.rotation;
  return out;
}

Pose apply_increment(const Pose& pose, const Eigen::Matrix<double, 6, 1>& increment) {
  Pose out;
  out.rotation = exp_so3(increment.head<3>()) * pose.rotation;
  out.translation = pose.translation + increment.tail<3>();
  return out;
}

SolveResult solve_fixed_correspondences(std::span<const Correspondence> correspondences,
                                        const ExtrinsicSet& extrinsics,
                                        const Trajectory& trajectory,
                                        const OptimizerConfig& config) {
  const Layout layout{extrinsics.size(), trajectory.size(), config.optimize_trajectory};
  const std::size_t dim = 6 * layout.num_blocks();

  SolveResult result{extrinsics, trajectory, {}, 0.0, 0, false};
  double cost = squared_cost(correspondences, result.extrinsics, result.trajectory, config);
  result.cost_trace.push_back(cost);
  if (dim == 0 || correspondences.empty()) return result;
  if (!std::isfinite(cost)) {
    result.diverged = true;
    return result;
  }

  Eigen::MatrixXd hessian(dim, dim);
  Eigen::VectorXd gradient(dim);
  double lambda = config.lm_initial_damping;
  double nu = 2.0;

  for (int iter = 0; iter < config.inner_max_iterations; ++iter) {
    result.iterations = iter + 1;
    hessian.setZero();
    gradient.setZero();
    for (const auto& c : correspondences) {
      const Pose& s = result.trajectory.poses[c.timestamp_index];
      const Pose& e = result.extrinsics.transforms[c.sensor_index - 1];
      const Pose t = target_pose_of(c, result.trajectory);
      const ResidualJacobian rj = residual_jacobian(c, s, e, t);

      std::array<int, 3> ids{};
      std::array<Matrix36d, 3> jac;
      int count = 0;
      auto add_block = [&](int id, const Matrix36d& j) {
        if (id < 0) return;
        for (int k = 0; k < count; ++k) {
          if (ids[k] == id) {
            jac[k] += j;
            return;
          }
        }
        ids[count] = id;
        jac[count] = j;
        ++count;
      };
      add_block(layout.extrinsic_block(c.sensor_index), rj.d_extrinsic);
      add_block(layout.trajectory_block(c.timestamp_index), rj.d_source_pose);
      if (c.target_timestamp && config.couple_reference_map) {
        add_block(layout.trajectory_block(*c.target_timestamp), rj.d_target_pose);
      }

      const double w = loss_weight(config, rj.residual.squaredNorm());
      for (int a = 0; a < count; ++a) {
        gradient.segment<6>(6 * ids[a]).noalias() += w * jac[a].transpose() * rj.residual;
        for (int b = a; b < count; ++b) {
          const Eigen::Matrix<double, 6, 6> block = w * jac[a].transpose() * jac[b];
          hessian.block<6, 6>(6 * ids[a], 6 * ids[b]) += block;
          if (ids[a] != ids[b]) {
            hessian.block<6, 6>(6 * ids[b], 6 * ids[a]) += block.transpose();
          }
        }
      }
    }

    if (gradient.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) break;

    bool accepted = false;
    bool stop = false;
    while (!accepted) {
      Eigen::MatrixXd damped = hessian;
      Eigen::VectorXd scale = hessian.diagonal().cwiseMax(1e-9);
      damped.diagonal() += lambda * scale;
      const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
      if (!step.allFinite()) {
        result.diverged = true;
        return result;
      }
      if (step.norm() < config.parameter_tolerance) {
        stop = true;
        break;
      }
      ExtrinsicSet candidate_e = result.extrinsics;
      Trajectory candidate_t = result.trajectory;
      apply_step(layout, step, candidate_e, candidate_t);
      const double new_cost = squared_cost(correspondences, candidate_e, candidate_t, config);
      if (std::isfinite(new_cost) && new_cost < cost) {
        const double predicted =
            0.5 * step.dot(lambda * scale.cwiseProduct(step) - gradient);
        const double rho = predicted > 0.0 ? (cost - new_cost) / predicted : 0.0;
        const double relative = (cost - new_cost) / cost;
        result.extrinsics = std::move(candidate_e);
        result.trajectory = std::move(candidate_t);
        result.max_step += step.lpNorm<Eigen::Infinity>();
        cost = new_cost;
        result.cost_trace.push_back(cost);
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        accepted = true;
        if (relative < config.cost_tolerance) stop = true;
      } else {
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e16) {
          stop = true;
          break;
        }
      }
    }
    if (stop) break;
  }
  return result;
}

OptimizationReport optimize(const CalibrationSession& session,
                            const OptimizerConfig& config) {
  session.validate();
  config.validate();

  OptimizationReport report;
  report.extrinsics = session.extrinsics;
  report.trajectory = session.trajectory;
  report.convergence_reason = "max_iterations";

  auto associate_at = [&](const ExtrinsicSet& e, const Trajectory& t) {
    const ReferenceMap map = build_reference_map(t, session.clouds[0]);
    return associate(map, e, t, session.clouds, config.max_correspondence_distance);
  };
  auto mean_error = [](const std::vector<Correspondence>& corr, const ExtrinsicSet& e,
                       const Trajectory& t) {
    return evaluate_error(corr, e, t) / static_cast<double>(corr.size());
  };

  std::vector<Correspondence> correspondences =
      associate_at(report.extrinsics, report.trajectory);
  double gain = 1.0;
  for (int it = 0; it < config.outer_iterations; ++it) {
    report.cost_trace.push_back(
        evaluate_error(correspondences, report.extrinsics, report.trajectory));
    report.correspondence_counts.push_back(correspondences.size());

    SolveResult solve = solve_fixed_correspondences(correspondences, report.extrinsics,
                                                    report.trajectory, config);
    report.iterations = it + 1;
    report.inner_cost_traces.push_back(solve.cost_trace);
    if (solve.diverged) {
      report.extrinsic_trace.push_back(report.extrinsics);
      report.convergence_reason = "diverged";
      break;
    }
    const bool converged = solve.max_step < config.outer_parameter_tolerance;
    std::vector<Correspondence> next = associate_at(solve.extrinsics, solve.trajectory);

    if (config.extrapolate && !converged) {
      ExtrinsicSet e = solve.extrinsics;
      Trajectory t = solve.trajectory;
      for (std::size_t i = 0; i < e.size(); ++i) {
        e.transforms[i] = extrapolate_pose(report.extrinsics.transforms[i], e.transforms[i], gain);
      }
      if (config.optimize_trajectory) {
        for (std::size_t j = 1; j < t.size(); ++j) {
          t.poses[j] = extrapolate_pose(report.trajectory.poses[j], t.poses[j], gain);
        }
      }
      std::vector<Correspondence> trial = associate_at(e, t);
      if (mean_error(trial, e, t) < mean_error(next, solve.extrinsics, solve.trajectory)) {
        solve.extrinsics = std::move(e);
        solve.trajectory = std::move(t);
        next = std::move(trial);
        gain = std::min(2.0 * gain, 8.0);
      } else {
        gain = std::max(0.5 * gain, 0.25);
      }
    }
    report.extrinsics = std::move(solve.extrinsics);
    report.trajectory = std::move(solve.trajectory);
    report.extrinsic_trace.push_back(report.extrinsics);
    correspondences = std::move(next);
    if (converged) {
      report.convergence_reason = "converged";
      break;
    }
  }

  report.final_cost = evaluate_error(correspondences, report.extrinsics, report.trajectory);
  report.final_correspondences = correspondences.size();
  return report;
}

}  // namespace mlcalib
