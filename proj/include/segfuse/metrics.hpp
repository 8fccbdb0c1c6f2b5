#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "segfuse/volume.hpp"

namespace segfuse {

struct MetricSet {
  double dice = 0.0;
  double ravd_percent = 0.0;
  double assd_mm = 0.0;
  double mssd_mm = 0.0;
  /// Set when the candidate was empty and the distances are the sentinel.
  bool degenerate = false;
};

enum class Metric { Dice, Ravd, Assd, Mssd };

inline constexpr Metric kAllMetrics[] = {Metric::Dice, Metric::Ravd, Metric::Assd, Metric::Mssd};

/// Column names used in tables: DICE, RAVD, ASSD, MSSD.
std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);
constexpr bool higher_is_better(Metric metric) noexcept { return metric == Metric::Dice; }

/// Metric values in kAllMetrics order.
using MetricVector = std::array<double, 4>;
MetricVector to_vector(const MetricSet& m);
double value_of(const MetricSet& m, Metric metric);

/// Directed border-to-border nearest distances in mm.
struct SurfaceDistanceResult {
  std::vector<double> dists_x_to_y;
  std::vector<double> dists_y_to_x;
};

/// 2|X & Y| / (|X| + |Y|). Throws BothEmpty when both masks are empty.
double dice(const BinaryMask& x, const BinaryMask& y);

/// 100 * | |X| - |Y| | / |Y|. Throws EmptyGroundTruth when Y is empty.
double ravd(const BinaryMask& x, const BinaryMask& y);

/// Exact voxel-centre distances between the border voxels of x and y, with
/// voxel (i, j, k) at world point (i*sx, j*sy, k*sz). Throws
/// EmptySegmentation when either mask is empty.
SurfaceDistanceResult surface_distances(const BinaryMask& x, const BinaryMask& y);

/// Mean over both directed distance lists.
double assd(const SurfaceDistanceResult& distances);
double assd(const BinaryMask& x, const BinaryMask& y);

/// Maximum over both directed distance lists.
double mssd(const SurfaceDistanceResult& distances);
double mssd(const BinaryMask& x, const BinaryMask& y);

/// All four metrics of a candidate against the ground truth. An empty
/// candidate yields dice 0, ravd 100 and the grid's world diagonal as both
/// distances, with `degenerate` set.
MetricSet evaluate_case(const BinaryMask& candidate, const BinaryMask& truth);

}  // namespace segfuse
