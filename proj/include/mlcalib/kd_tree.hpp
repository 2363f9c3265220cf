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

#ifndef MLCALIB_KD_TREE_HPP
#define MLCALIB_KD_TREE_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mlcalib/geometry.hpp"

namespace mlcalib {

struct Neighbor {
  std::size_t index = 0;
  double distance_sq = std::numeric_limits<double>::infinity();
};

/// Static 3-d tree for exact nearest-neighbor, k-nearest and radius queries.
/// Ties on distance resolve to the lowest point index, so results agree with
/// a first-minimum linear scan.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 12);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// Requires a non-empty tree.
  Neighbor nearest(const Point3& query) const;

  /// Up to k neighbors in ascending (distance, index) order. A point whose
  /// index equals `exclude` is skipped.
  std::vector<Neighbor> knn(const Point3& query, std::size_t k,
                            std::size_t exclude = kNoExclude) const;

  /// Indices of all points with distance <= radius, ascending index order.
  std::vector<std::size_t> radius(const Point3& query, double radius) const;

  static constexpr std::size_t kNoExclude = std::numeric_limits<std::size_t>::max();

 private:
  struct Node {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void nearest_impl(std::int32_t node, const Point3& q, Neighbor& best) const;

  std::size_t leaf_size_ = 12;
  std::vector<Point3> points_;       // in tree order
  std::vector<std::size_t> index_;  // tree order -> caller index
  std::vector<Node> nodes_;
};

}  // namespace mlcalib

#endif  // MLCALIB_KD_TREE_HPP
