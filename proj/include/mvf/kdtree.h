#pragma once

#include <vector>

#include "mvf/geometry.h"

namespace mvf {

// Static 3D kd-tree for nearest-neighbor queries. Distance ties resolve
// to the lowest point index, so results match an ascending linear scan
// exactly.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::vector<Vec3> points);

  size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  struct Result {
    int index = -1;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  // Nearest point, optionally capped: when max_squared_distance is finite
  // and no point lies within it, index stays -1.
  Result nearest(const Vec3& query,
                 double max_squared_distance =
                     std::numeric_limits<double>::infinity()) const;

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;     // -1 marks a leaf
    int left = -1;
    int right = -1;
    int first = 0;
    int count = 0;
  };

  int build(int first, int count);
  void search(int node, const Vec3& query, Result* best) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace mvf
