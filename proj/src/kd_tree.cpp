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

#include <algorithm>
#include <numeric>
#include <queue>

namespace mlcalib {
namespace {

bool closer(double d, std::size_t i, double best_d, std::size_t best_i) {
  return d < best_d || (d == best_d && i < best_i);
}

struct HeapEntry {
  double d;
  std::size_t i;
  bool operator<(const HeapEntry& o) const {
    return d < o.d || (d == o.d && i < o.i);
  }
};

}  // namespace

KdTree::KdTree(std::span<const Point3> points, std::size_t leaf_size)
    : leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error("kd-tree: too many points");
  }
  index_.resize(points.size());
  std::iota(index_.begin(), index_.end(), std::size_t{0});
  points_.assign(points.begin(), points.end());
  if (points_.empty()) return;
  nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
  std::vector<Point3> ordered(points_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) ordered[i] = points[index_[i]];
  points_ = std::move(ordered);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{-1, -1, begin, end, 0, 0.0});
  if (end - begin <= leaf_size_) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[index_[i]]);
    hi = hi.cwiseMax(points_[index_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident: keep as leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid,
                   index_.begin() + end, [&](std::size_t a, std::size_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[index_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.left = left;
  node.right = right;
  node.axis = axis;
  node.split = split;
  return id;
}

void KdTree::nearest_impl(std::int32_t id, const Point3& q, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d = (points_[i] - q).squaredNorm();
      if (closer(d, index_[i], best.distance_sq, best.index)) {
        best = {index_[i], d};
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t first = diff < 0.0 ? node.left : node.right;
  const std::int32_t second = diff < 0.0 ? node.right : node.left;
  nearest_impl(first, q, best);
  if (diff * diff <= best.distance_sq) nearest_impl(second, q, best);
}

Neighbor KdTree::nearest(const Point3& query) const {
  if (points_.empty()) throw Error("kd-tree: nearest query on empty tree");
  Neighbor best{std::numeric_limits<std::size_t>::max(),
                std::numeric_limits<double>::infinity()};
  nearest_impl(0, query, best);
  return best;
}

std::vector<Neighbor> KdTree::knn(const Point3& query, std::size_t k,
                                  std::size_t exclude) const {
  std::vector<Neighbor> out;
  if (k == 0 || points_.empty()) return out;
  std::priority_queue<HeapEntry> heap;
  auto worst = [&]() {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().d;
  };

  // Iterative descent with an explicit stack of (node, lower bound).
  std::vector<std::pair<std::int32_t, double>> stack;
  stack.reserve(64);
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > worst()) continue;
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if (index_[i] == exclude) continue;
        const double d = (points_[i] - query).squaredNorm();
        if (heap.size() < k) {
          heap.push({d, index_[i]});
        } else if (HeapEntry{d, index_[i]} < heap.top()) {
          heap.pop();
          heap.push({d, index_[i]});
        }
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    stack.emplace_back(far, std::max(bound, diff * diff));
    stack.emplace_back(near, bound);
  }

  out.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = {heap.top().i, heap.top().d};
    heap.pop();
  }
  return out;
}

std::vector<std::size_t> KdTree::radius(const Point3& query, double radius) const {
  std::vector<std::size_t> out;
  if (points_.empty() || radius < 0.0) return out;
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((points_[i] - query).squaredNorm() <= r2) out.push_back(index_[i]);
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    if (diff <= radius) stack.push_back(node.left);
    if (diff >= -radius) stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mlcalib
