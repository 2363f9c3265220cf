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

#ifndef MLCALIB_METRICS_HPP
#define MLCALIB_METRICS_HPP

#include <span>
#include <vector>

#include "mlcalib/geometry.hpp"
#include "mlcalib/joint_optimizer.hpp"

namespace mlcalib {

/// Detection quality with noise as the positive class.
struct FilterScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

/// Zero denominators give 0.
FilterScore score_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
/// Throws on length mismatch.
FilterScore filter_metrics(std::span<const PointLabel> predicted,
                           std::span<const PointLabel> truth);
/// Micro-average: sums the counts, then scores.
FilterScore combine_scores(std::span<const FilterScore> scores);

/// Mean nearest-neighbor distance from every calibrated-sensor point to the
/// reference sensor's accumulated map, under the session's C and S. No
/// distance gate. Throws if the reference map or all calibrated clouds are
/// empty.
double metric_error(const CalibrationSession& session);

struct ExtrinsicErrors {
  std::vector<double> translation_m;  // one per calibrated sensor
  std::vector<double> rotation_deg;
  double mean_translation_m = 0.0;
  double mean_rotation_deg = 0.0;
};

ExtrinsicErrors extrinsic_errors(const ExtrinsicSet& estimate, const ExtrinsicSet& truth);

double median(std::vector<double> values);

}  // namespace mlcalib

#endif  // MLCALIB_METRICS_HPP
