#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace segfuse {

struct Voxel {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  friend bool operator==(const Voxel&, const Voxel&) = default;
};

/// Voxel counts and physical spacing (mm) of a 3D grid. Linear layout is
/// x-fastest: index = i + nx * (j + ny * k).
class GridMeta {
 public:
  using Dims = std::array<std::size_t, 3>;
  using Spacing = std::array<double, 3>;

  /// Throws Error(InvalidArgument) unless all dims >= 1 and all spacings > 0.
  GridMeta(Dims dims, Spacing spacing);

  const Dims& dims() const noexcept { return dims_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  std::size_t nx() const noexcept { return dims_[0]; }
  std::size_t ny() const noexcept { return dims_[1]; }
  std::size_t nz() const noexcept { return dims_[2]; }
  std::size_t voxel_count() const noexcept { return dims_[0] * dims_[1] * dims_[2]; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + dims_[0] * (j + dims_[1] * k);
  }
  Voxel voxel(std::size_t index) const noexcept;

  /// Length in mm of the diagonal of the grid's physical extent (n * s per axis).
  double world_diagonal_mm() const noexcept;

  bool compatible(const GridMeta& other) const noexcept {
    return dims_ == other.dims_ && spacing_ == other.spacing_;
  }

  friend bool operator==(const GridMeta&, const GridMeta&) = default;

 private:
  Dims dims_;
  Spacing spacing_;
};

/// Real-valued volume; used for probability maps and combiner supports.
class ScalarVolume {
 public:
  ScalarVolume(GridMeta meta, std::vector<float> values);
  explicit ScalarVolume(GridMeta meta, float fill = 0.0f);

  const GridMeta& meta() const noexcept { return meta_; }
  std::span<const float> values() const noexcept { return values_; }
  float operator[](std::size_t index) const noexcept { return values_[index]; }
  float at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return values_[meta_.index(i, j, k)];
  }

  /// Moves the payload out, leaving the volume empty.
  std::vector<float> release() && { return std::move(values_); }

 private:
  GridMeta meta_;
  std::vector<float> values_;
};

/// Foreground / background labelling, labels are 0 or 1.
class BinaryMask {
 public:
  /// Throws Error(InvalidArgument) on length mismatch or labels other than 0/1.
  BinaryMask(GridMeta meta, std::vector<std::uint8_t> labels);
  explicit BinaryMask(GridMeta meta);

  const GridMeta& meta() const noexcept { return meta_; }
  std::span<const std::uint8_t> labels() const noexcept { return labels_; }
  bool operator[](std::size_t index) const noexcept { return labels_[index] != 0; }
  bool at(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return labels_[meta_.index(i, j, k)] != 0;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  GridMeta meta_;
  std::vector<std::uint8_t> labels_;
};

/// Throws Error(IncompatibleGrids) when dims or spacing differ.
void require_compatible(const GridMeta& a, const GridMeta& b);

/// label = 1 iff value > threshold.
BinaryMask binarize(const ScalarVolume& volume, double threshold = 0.5);

std::size_t cardinality(const BinaryMask& mask);

/// Foreground voxels with at least one 6-connected neighbour that is
/// background or outside the grid, in ascending linear-index order.
std::vector<Voxel> border_voxels(const BinaryMask& mask);

/// Mean over the 3x3x3 neighbourhood with replicate padding at the grid
/// border.
ScalarVolume smooth_box3(const ScalarVolume& volume);

/// Converts labels to 0.0 / 1.0 reals.
ScalarVolume to_scalar(const BinaryMask& mask);

}  // namespace segfuse
