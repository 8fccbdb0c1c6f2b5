#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "segfuse/volume.hpp"

namespace segfuse {

struct Ellipsoid {
  /// Centre in (fractional) voxel coordinates.
  std::array<double, 3> center_voxel{};
  /// Semi-axes in mm.
  std::array<double, 3> semi_axes_mm{};
};

struct PhantomSpec {
  GridMeta grid;
  /// The phantom is the union of these shapes.
  std::vector<Ellipsoid> shapes;
  std::uint64_t seed = 0;
};

/// A voxel is foreground iff its world point lies strictly inside at least
/// one ellipsoid. Throws EmptyPhantom when no voxel qualifies.
BinaryMask make_phantom(const PhantomSpec& spec);

/// Organ-like union of three ellipsoids, placed and sized from the seed
/// relative to the grid's physical extent.
PhantomSpec random_phantom_spec(const GridMeta& grid, std::uint64_t seed);

/// How a simulated segmenter distorts the truth.
struct SegmenterProfile {
  /// Applications of smooth_box3 after noise.
  int blur_passes = 0;
  /// Positive values grow the segmentation, negative shrink it.
  double boundary_bias_mm = 0.0;
  /// Std-dev of additive Gaussian noise on the probabilities.
  double noise_sigma = 0.0;
  /// Width (mm) of the logistic probability ramp across the boundary.
  double temperature = 1.0;
};

/// Four deliberately different profiles used by the synthetic pipeline.
std::vector<SegmenterProfile> default_segmenter_profiles();

/// Exact Euclidean distance (mm) from every voxel centre to the nearest
/// voxel centre of the opposite label, shifted by half the smallest spacing
/// and signed positive inside. Foreground voxels are always > 0 and
/// background voxels always < 0.
ScalarVolume signed_distance_mm(const BinaryMask& truth);

/// p = logistic((d + bias) / temperature) on the signed distance, plus
/// seeded Gaussian noise, clamped to [0, 1], then blurred.
ScalarVolume simulate_segmenter(const BinaryMask& truth, const SegmenterProfile& profile,
                                std::uint64_t seed);

/// Same, reusing a precomputed signed_distance_mm field.
ScalarVolume simulate_from_distance(const ScalarVolume& signed_distance,
                                    const SegmenterProfile& profile, std::uint64_t seed);

/// One synthetic case: a random phantom and one map per profile. The
/// phantom uses derive_seed(seed, index) and segmenter m uses
/// derive_seed(that, m + 1).
struct SyntheticCase {
  BinaryMask truth;
  std::vector<ScalarVolume> maps;
};

SyntheticCase make_synthetic_case(const GridMeta& grid, std::uint64_t seed, std::size_t index,
                                  const std::vector<SegmenterProfile>& profiles);

}  // namespace segfuse
