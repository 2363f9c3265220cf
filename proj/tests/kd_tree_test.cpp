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

#include "mlcalib/kd_tree.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace mlcalib {
namespace {

std::vector<Point3> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

// Linear-scan oracle: ascending (distance, index).
std::vector<Neighbor> brute_knn(const std::vector<Point3>& pts, const Point3& q, std::size_t k,
                                std::size_t exclude = KdTree::kNoExclude) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i != exclude) all.push_back({i, (pts[i] - q).squaredNorm()});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance_sq < b.distance_sq || (a.distance_sq == b.distance_sq && a.index < b.index);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

TEST(KdTree, NearestMatchesBruteForceOnThousandQueries) {
  const auto pts = random_points(5000, 1);
  const KdTree tree(pts);
  const auto queries = random_points(1000, 2);
  for (const auto& q : queries) {
    const auto oracle = brute_knn(pts, q, 1).front();
    const Neighbor got = tree.nearest(q);
    EXPECT_EQ(got.index, oracle.index);
    EXPECT_DOUBLE_EQ(got.distance_sq, oracle.distance_sq);
  }
}

TEST(KdTree, KnnMatchesBruteForce) {
  const auto pts = random_points(3000, 3);
  const KdTree tree(pts, 4);
  const auto queries = random_points(200, 4);
  for (const auto& q : queries) {
    const auto oracle = brute_knn(pts, q, 20);
    const auto got = tree.knn(q, 20);
    ASSERT_EQ(got.size(), oracle.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].index, oracle[i].index);
  }
}

TEST(KdTree, KnnExcludesSelf) {
  const auto pts = random_points(500, 5);
  const KdTree tree(pts);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto got = tree.knn(pts[i], 5, i);
    const auto oracle = brute_knn(pts, pts[i], 5, i);
    ASSERT_EQ(got.size(), 5u);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(got[j].index, oracle[j].index);
  }
}

TEST(KdTree, KnnReturnsAllWhenKExceedsSize) {
  const auto pts = random_points(7, 6);
  const KdTree tree(pts);
  EXPECT_EQ(tree.knn(Point3::Zero(), 100).size(), 7u);
}

TEST(KdTree, RadiusMatchesBruteForce) {
  const auto pts = random_points(2000, 7);
  const KdTree tree(pts);
  for (const auto& q : random_points(100, 8)) {
    std::vector<std::size_t> oracle;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if ((pts[i] - q).norm() <= 0.5) oracle.push_back(i);
    }
    EXPECT_EQ(tree.radius(q, 0.5), oracle);
  }
}

TEST(KdTree, TiesResolveToLowestIndex) {
  std::vector<Point3> pts(10, Point3(1, 1, 1));
  pts.push_back(Point3::Zero());
  const KdTree tree(pts, 2);
  EXPECT_EQ(tree.nearest(Point3(1, 1, 1)).index, 0u);
  const auto k = tree.knn(Point3(1, 1, 1), 3);
  EXPECT_EQ(k[0].index, 0u);
  EXPECT_EQ(k[1].index, 1u);
  EXPECT_EQ(k[2].index, 2u);
}

TEST(KdTree, EmptyTree) {
  const KdTree tree;
  EXPECT_TRUE(tree.empty());
  EXPECT_TRUE(tree.knn(Point3::Zero(), 3).empty());
}

}  // namespace
}  // namespace mlcalib
