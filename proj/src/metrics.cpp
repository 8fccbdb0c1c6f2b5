#include "segfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "segfuse/error.hpp"
#include "segfuse/kdtree.hpp"

namespace segfuse {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Dice: return "DICE";
    case Metric::Ravd: return "RAVD";
    case Metric::Assd: return "ASSD";
    case Metric::Mssd: return "MSSD";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (Metric metric : kAllMetrics) {
    if (to_string(metric) == name) return metric;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

MetricVector to_vector(const MetricSet& m) { return {m.dice, m.ravd_percent, m.assd_mm, m.mssd_mm}; }

double value_of(const MetricSet& m, Metric metric) {
  return to_vector(m)[static_cast<std::size_t>(metric)];
}

namespace {

std::size_t intersection_size(const BinaryMask& x, const BinaryMask& y) {
  const auto a = x.labels();
  const auto b = y.labels();
  std::size_t count = 0;
  for (std::size_t n = 0; n < a.size(); ++n) count += a[n] & b[n];
  return count;
}

std::vector<Point3> world_points(const std::vector<Voxel>& voxels, const GridMeta& meta) {
  const auto& s = meta.spacing();
  std::vector<Point3> points;
  points.reserve(voxels.size());
  for (const Voxel& v : voxels) {
    points.push_back({static_cast<double>(v.i) * s[0], static_cast<double>(v.j) * s[1],
                      static_cast<double>(v.k) * s[2]});
  }
  return points;
}

std::vector<double> directed_distances(const std::vector<Point3>& from, const KdTree& to) {
  std::vector<double> out;
  out.reserve(from.size());
  for (const Point3& p : from) out.push_back(std::sqrt(to.nearest_squared_distance(p)));
  return out;
}

}  // namespace

double dice(const BinaryMask& x, const BinaryMask& y) {
  require_compatible(x.meta(), y.meta());
  const std::size_t total = cardinality(x) + cardinality(y);
  if (total == 0) throw Error(ErrorCode::BothEmpty, "dice is undefined for two empty masks");
  return 2.0 * static_cast<double>(intersection_size(x, y)) / static_cast<double>(total);
}

double ravd(const BinaryMask& x, const BinaryMask& y) {
  require_compatible(x.meta(), y.meta());
  const auto size_y = static_cast<double>(cardinality(y));
  if (size_y == 0.0) throw Error(ErrorCode::EmptyGroundTruth, "ravd needs a non-empty ground truth");
  const auto size_x = static_cast<double>(cardinality(x));
  return 100.0 * std::abs(size_x - size_y) / size_y;
}

SurfaceDistanceResult surface_distances(const BinaryMask& x, const BinaryMask& y) {
  require_compatible(x.meta(), y.meta());
  const auto border_x = world_points(border_voxels(x), x.meta());
  const auto border_y = world_points(border_voxels(y), y.meta());
  if (border_x.empty() || border_y.empty()) {
    throw Error(ErrorCode::EmptySegmentation, "surface distances need two non-empty masks");
  }
  const KdTree tree_x(border_x);
  const KdTree tree_y(border_y);
  return {directed_distances(border_x, tree_y), directed_distances(border_y, tree_x)};
}

double assd(const SurfaceDistanceResult& d) {
  const double sum = std::accumulate(d.dists_x_to_y.begin(), d.dists_x_to_y.end(), 0.0) +
                     std::accumulate(d.dists_y_to_x.begin(), d.dists_y_to_x.end(), 0.0);
  return sum / static_cast<double>(d.dists_x_to_y.size() + d.dists_y_to_x.size());
}

double assd(const BinaryMask& x, const BinaryMask& y) { return assd(surface_distances(x, y)); }

double mssd(const SurfaceDistanceResult& d) {
  double best = 0.0;
  for (double v : d.dists_x_to_y) best = std::max(best, v);
  for (double v : d.dists_y_to_x) best = std::max(best, v);
  return best;
}

double mssd(const BinaryMask& x, const BinaryMask& y) { return mssd(surface_distances(x, y)); }

MetricSet evaluate_case(const BinaryMask& candidate, const BinaryMask& truth) {
  require_compatible(candidate.meta(), truth.meta());
  if (cardinality(truth) == 0) {
    throw Error(ErrorCode::EmptyGroundTruth, "cannot evaluate against an empty ground truth");
  }
  MetricSet m;
  m.dice = dice(candidate, truth);
  m.ravd_percent = ravd(candidate, truth);
  if (cardinality(candidate) == 0) {
    m.assd_mm = m.mssd_mm = truth.meta().world_diagonal_mm();
    m.degenerate = true;
    return m;
  }
  const SurfaceDistanceResult d = surface_distances(candidate, truth);
  m.assd_mm = assd(d);
  m.mssd_mm = mssd(d);
  return m;
}

}  // namespace segfuse
