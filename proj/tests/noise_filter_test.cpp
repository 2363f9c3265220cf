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

#include "mlcalib/noise_filter.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace mlcalib {
namespace {

// Dense patch on a wall in front of the sensor, denser toward the boresight,
// plus sparse points floating between the sensor and the wall.
PointCloud test_cloud(std::uint64_t seed, std::size_t n = 600) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(2.0 + 0.002 * g(rng), g(rng), g(rng));
  }
  for (std::size_t i = 0; i < n / 20; ++i) {
    c.points.emplace_back(0.5 + 1.4 * u(rng), 2 * g(rng), 2 * g(rng));
  }
  return c;
}

// Independent evaluation of the filter rules straight from their definitions.
struct Oracle {
  std::vector<double> mu;
  double h_g = 0.0;

  Oracle(const PointCloud& c, int k, double cs) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::vector<double> d;
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (j != i) d.push_back((c.points[i] - c.points[j]).norm());
      }
      std::partial_sort(d.begin(), d.begin() + k, d.end());
      double s = 0.0;
      for (int m = 0; m < k; ++m) s += d[m];
      mu.push_back(s / k);
    }
    double mean = 0.0, sq = 0.0;
    for (double m : mu) mean += m;
    mean /= mu.size();
    for (double m : mu) sq += (m - mean) * (m - mean);
    h_g = mean + std::sqrt(sq / mu.size()) * cs;
  }
};

TEST(MeanKnnDistances, MatchesBruteForce) {
  const PointCloud c = test_cloud(1);
  const Oracle o(c, 20, 0.01);
  const auto mu = mean_knn_distances(c, 20);
  ASSERT_EQ(mu.size(), c.size());
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(mu[i], o.mu[i], 1e-12);
}

TEST(MeanKnnDistances, NeedsMoreThanKPoints) {
  PointCloud c;
  c.points.assign(20, Point3::Zero());
  EXPECT_THROW(mean_knn_distances(c, 20), InsufficientPointsError);
}

TEST(SorFilter, MatchesRuleLineByLine) {
  const PointCloud c = test_cloud(2);
  const Oracle o(c, 20, 0.01);
  const FilterReport r = sor_filter(c, 20, 0.01);
  EXPECT_NEAR(r.global_threshold, o.h_g, 1e-12);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(r.removed_mask[i], !(o.mu[i] < o.h_g)) << i;
  }
  EXPECT_EQ(r.kept.size() + r.removed.size(), c.size());
}

TEST(DsorFilter, MatchesRuleLineByLine) {
  const PointCloud c = test_cloud(3);
  const Oracle o(c, 20, 0.01);
  const FilterReport r = dsor_filter(c, 20, 0.01, 3.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(r.removed_mask[i], !(o.mu[i] < o.h_g * 3.0 * c.points[i].norm())) << i;
  }
}

TEST(PatternFilter, MatchesRuleLineByLine) {
  const PointCloud c = test_cloud(4);
  const Oracle o(c, 20, 0.01);
  FilterParams p;
  const FilterReport r = pattern_filter(c, p);
  // Oracle center: smallest angle to +x.
  std::size_t center = 0;
  double best = 1e9;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double angle = std::acos(std::clamp(c.points[i].normalized().x(), -1.0, 1.0));
    if (angle < best) best = angle, center = i;
  }
  EXPECT_EQ(r.observation_center, c.points[center]);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i == center) {
      EXPECT_FALSE(r.removed_mask[i]);
      continue;
    }
    const double d = (c.points[i] - c.points[center]).norm();
    EXPECT_EQ(r.removed_mask[i], !(o.mu[i] < o.h_g * 3.0 * d)) << i;
  }
}

TEST(PatternFilter, EqualsDsorWhenCenteredAtOrigin) {
  for (std::uint64_t seed = 5; seed < 10; ++seed) {
    const PointCloud c = test_cloud(seed);
    FilterParams p;
    p.observation_center = Point3::Zero();
    EXPECT_EQ(pattern_filter(c, p).removed_mask, dsor_filter(c, 20, 0.01, 3.0).removed_mask);
  }
}

bool nested(const std::vector<bool>& looser, const std::vector<bool>& stricter) {
  for (std::size_t i = 0; i < looser.size(); ++i) {
    if (looser[i] && !stricter[i]) return false;
  }
  return true;
}

TEST(PatternFilter, MonotoneInStdMultiplier) {
  const PointCloud c = test_cloud(10);
  FilterParams p;
  std::vector<bool> prev;
  for (double cs : {0.0, 0.01, 0.1, 0.5, 1.0, 3.0}) {
    p.std_multiplier = cs;
    auto mask = pattern_filter(c, p).removed_mask;
    if (!prev.empty()) EXPECT_TRUE(nested(mask, prev)) << cs;
    prev = std::move(mask);
  }
}

TEST(PatternFilter, MonotoneInRangeMultiplier) {
  const PointCloud c = test_cloud(11);
  FilterParams p;
  std::vector<bool> prev;
  for (double cr : {0.1, 0.5, 1.0, 3.0, 10.0}) {
    p.range_multiplier = cr;
    auto mask = pattern_filter(c, p).removed_mask;
    if (!prev.empty()) EXPECT_TRUE(nested(mask, prev)) << cr;
    prev = std::move(mask);
  }
}

TEST(PatternFilter, KeepsLabelsThroughPartition) {
  PointCloud c = test_cloud(12);
  c.labels = std::vector<PointLabel>(c.size(), PointLabel::kSurface);
  const FilterReport r = pattern_filter(c, FilterParams{});
  ASSERT_TRUE(r.kept.labels.has_value());
  EXPECT_EQ(r.kept.labels->size(), r.kept.size());
}

TEST(ObservationCenter, TiesPreferShorterRangeThenLowerIndex) {
  PointCloud c;
  c.points = {Point3(0, 1, 0), Point3(4, 0, 0), Point3(2, 0, 0), Point3(2, 0, 0)};
  EXPECT_EQ(observation_center_index(c, Eigen::Vector3d::UnitX()), 2u);
  EXPECT_EQ(observation_center_index(c, Eigen::Vector3d::UnitY()), 0u);
  EXPECT_THROW(observation_center_index(PointCloud{}, Eigen::Vector3d::UnitX()), Error);
}

TEST(FilterParams, RejectsInvalidValues) {
  FilterParams p;
  p.k = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.std_multiplier = -1;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.range_multiplier = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.boresight = Eigen::Vector3d(1, 1, 0);
  EXPECT_THROW(p.validate(), Error);
}

}  // namespace
}  // namespace mlcalib
