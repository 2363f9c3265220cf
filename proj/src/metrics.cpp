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

#include "mlcalib/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mlcalib {

FilterScore score_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  FilterScore s;
  s.true_positives = tp;
  s.false_positives = fp;
  s.false_negatives = fn;
  const double dtp = static_cast<double>(tp);
  if (tp + fp > 0) s.precision = dtp / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = dtp / static_cast<double>(tp + fn);
  if (s.precision + s.recall > 0.0) {
    s.f_score = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

FilterScore filter_metrics(std::span<const PointLabel> predicted,
                           std::span<const PointLabel> truth) {
  if (predicted.size() != truth.size()) {
    throw Error("filter_metrics: label vectors differ in length");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == PointLabel::kNoise;
    const bool t = truth[i] == PointLabel::kNoise;
    if (p && t) ++tp;
    else if (p) ++fp;
    else if (t) ++fn;
  }
  return score_from_counts(tp, fp, fn);
}

FilterScore combine_scores(std::span<const FilterScore> scores) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& s : scores) {
    tp += s.true_positives;
    fp += s.false_positives;
    fn += s.false_negatives;
  }
  return score_from_counts(tp, fp, fn);
}

double metric_error(const CalibrationSession& session) {
  session.validate();
  const ReferenceMap map = build_reference_map(session.trajectory, session.clouds[0]);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 1; i < session.num_sensors(); ++i) {
    for (std::size_t j = 0; j < session.num_timestamps(); ++j) {
      const Pose pose = sensor_pose(session.extrinsics, session.trajectory, i, j);
      for (const auto& p : session.clouds[i][j].points) {
        sum += std::sqrt(map.index.nearest(pose.apply(p)).distance_sq);
        ++count;
      }
    }
  }
  if (count == 0) throw Error("metric_error: calibrated sensors have no points");
  return sum / static_cast<double>(count);
}

ExtrinsicErrors extrinsic_errors(const ExtrinsicSet& estimate, const ExtrinsicSet& truth) {
  if (estimate.size() != truth.size()) {
    throw Error("extrinsic_errors: extrinsic sets differ in size");
  }
  ExtrinsicErrors out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out.translation_m.push_back(
        translation_error_m(estimate.transforms[i].translation, truth.transforms[i].translation));
    out.rotation_deg.push_back(
        rotation_error_deg(estimate.transforms[i].rotation, truth.transforms[i].rotation));
  }
  if (!truth.transforms.empty()) {
    const double n = static_cast<double>(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
      out.mean_translation_m += out.translation_m[i] / n;
      out.mean_rotation_deg += out.rotation_deg[i] / n;
    }
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace mlcalib
