#include "mvf/kdtree.h"

#include <algorithm>

namespace mvf {

namespace {
constexpr int kLeafSize = 8;
}

KdTree3::KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = int(i);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, int(points_.size()));
  }
}

int KdTree3::build(int first, int count) {
  const int node_index = int(nodes_.size());
  nodes_.emplace_back();

  if (count <= kLeafSize) {
    nodes_[node_index].first = first;
    nodes_[node_index].count = count;
    return node_index;
  }

  Aabb box;
  for (int i = first; i < first + count; ++i) box.expand(points_[order_[i]]);
  const Vec3 extent = box.max - box.min;
  int axis = 0;
  if (extent[1] > extent[0]) axis = 1;
  if (extent[2] > extent[axis]) axis = 2;

  auto begin = order_.begin() + first;
  auto mid = begin + count / 2;
  std::nth_element(begin, mid, begin + count, [&](int a, int b) {
    if (points_[a][axis] != points_[b][axis])
      return points_[a][axis] < points_[b][axis];
    return a < b;
  });

  const double split = points_[*mid][axis];
  const int half = count / 2;
  const int left = build(first, half);
  const int right = build(first + half, count - half);
  nodes_[node_index].axis = axis;
  nodes_[node_index].split = split;
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

void KdTree3::search(int node_index, const Vec3& query, Result* best) const {
  const Node& node = nodes_[node_index];
  if (node.axis < 0) {
    for (int i = node.first; i < node.first + node.count; ++i) {
      const int idx = order_[i];
      const double d2 = (points_[idx] - query).squaredNorm();
      if (d2 < best->squared_distance ||
          (d2 == best->squared_distance && idx < best->index)) {
        best->squared_distance = d2;
        best->index = idx;
      }
    }
    return;
  }

  const double delta = query[node.axis] - node.split;
  const int near = delta < 0.0 ? node.left : node.right;
  const int far = delta < 0.0 ? node.right : node.left;
  search(near, query, best);
  // The far side may hold an equidistant point with a lower index, so it
  // is culled only when strictly farther.
  if (delta * delta <= best->squared_distance) search(far, query, best);
}

KdTree3::Result KdTree3::nearest(const Vec3& query,
                                 double max_squared_distance) const {
  Result best;
  if (points_.empty()) return best;
  best.squared_distance = max_squared_distance;
  best.index = -1;
  Result found = best;
  search(0, query, &found);
  if (found.index < 0) {
    // Nothing within the cap; report an explicit miss.
    return Result{-1, std::numeric_limits<double>::infinity()};
  }
  return found;
}

}  // namespace mvf
