#include "segfuse/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace segfuse {

namespace {

constexpr std::size_t kLeafSize = 12;

double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree::KdTree(std::vector<Point3> points) : points_(std::move(points)) {
  if (!points_.empty()) {
    nodes_.reserve(2 * (points_.size() / kLeafSize + 1));
    build(0, points_.size());
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Point3 lo = points_[begin], hi = points_[begin];
  for (std::size_t n = begin + 1; n < end; ++n) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], points_[n][a]);
      hi[a] = std::max(hi[a], points_[n][a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(points_.begin() + static_cast<std::ptrdiff_t>(begin),
                   points_.begin() + static_cast<std::ptrdiff_t>(mid),
                   points_.begin() + static_cast<std::ptrdiff_t>(end),
                   [axis](const Point3& a, const Point3& b) { return a[axis] < b[axis]; });

  const double split = points_[mid][axis];
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::search(std::size_t id, const Point3& query, double& best) const {
  const Node& node = nodes_[id];
  if (node.left == 0) {
    for (std::size_t n = node.begin; n < node.end; ++n) {
      best = std::min(best, squared_distance(query, points_[n]));
    }
    return;
  }
  // Points left of mid are <= split, points right are >= split.
  const double delta = query[node.axis] - node.split;
  const std::size_t near = delta < 0.0 ? node.left : node.right;
  const std::size_t far = delta < 0.0 ? node.right : node.left;
  search(near, query, best);
  if (delta * delta < best) search(far, query, best);
}

double KdTree::nearest_squared_distance(const Point3& query) const {
  double best = std::numeric_limits<double>::infinity();
  search(0, query, best);
  return best;
}

}  // namespace segfuse
