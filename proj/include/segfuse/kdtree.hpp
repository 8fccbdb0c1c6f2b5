#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace segfuse {

using Point3 = std::array<double, 3>;

/// Static 3-d tree for exact nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(std::vector<Point3> points);

  bool empty() const noexcept { return points_.empty(); }
  std::size_t size() const noexcept { return points_.size(); }

  /// Smallest squared Euclidean distance from query to any stored point.
  /// Requires a non-empty tree.
  double nearest_squared_distance(const Point3& query) const;

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    std::size_t left = 0;   // 0 marks a leaf
    std::size_t right = 0;
    int axis = 0;
    double split = 0.0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Point3& query, double& best) const;

  std::vector<Point3> points_;
  std::vector<Node> nodes_;
};

}  // namespace segfuse
