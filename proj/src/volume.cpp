#include "segfuse/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "segfuse/error.hpp"

namespace segfuse {

GridMeta::GridMeta(Dims dims, Spacing spacing) : dims_(dims), spacing_(spacing) {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims_[axis] < 1) {
      throw Error(ErrorCode::InvalidArgument, "grid dimension " + std::to_string(axis) + " is zero");
    }
    if (!(spacing_[axis] > 0.0) || !std::isfinite(spacing_[axis])) {
      throw Error(ErrorCode::InvalidArgument,
                  "grid spacing " + std::to_string(axis) + " must be positive and finite");
    }
  }
}

Voxel GridMeta::voxel(std::size_t index) const noexcept {
  Voxel v;
  v.i = index % dims_[0];
  index /= dims_[0];
  v.j = index % dims_[1];
  v.k = index / dims_[1];
  return v;
}

double GridMeta::world_diagonal_mm() const noexcept {
  double sum = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double extent = static_cast<double>(dims_[axis]) * spacing_[axis];
    sum += extent * extent;
  }
  return std::sqrt(sum);
}

ScalarVolume::ScalarVolume(GridMeta meta, std::vector<float> values)
    : meta_(std::move(meta)), values_(std::move(values)) {
  if (values_.size() != meta_.voxel_count()) {
    throw Error(ErrorCode::InvalidArgument,
                "volume has " + std::to_string(values_.size()) + " values, grid needs " +
                    std::to_string(meta_.voxel_count()));
  }
}

ScalarVolume::ScalarVolume(GridMeta meta, float fill)
    : meta_(std::move(meta)), values_(meta_.voxel_count(), fill) {}

BinaryMask::BinaryMask(GridMeta meta, std::vector<std::uint8_t> labels)
    : meta_(std::move(meta)), labels_(std::move(labels)) {
  if (labels_.size() != meta_.voxel_count()) {
    throw Error(ErrorCode::InvalidArgument,
                "mask has " + std::to_string(labels_.size()) + " labels, grid needs " +
                    std::to_string(meta_.voxel_count()));
  }
  if (std::any_of(labels_.begin(), labels_.end(), [](std::uint8_t l) { return l > 1; })) {
    throw Error(ErrorCode::InvalidArgument, "mask labels must be 0 or 1");
  }
}

BinaryMask::BinaryMask(GridMeta meta)
    : meta_(std::move(meta)), labels_(meta_.voxel_count(), 0) {}

void require_compatible(const GridMeta& a, const GridMeta& b) {
  if (!a.compatible(b)) {
    throw Error(ErrorCode::IncompatibleGrids, "grids differ in dimensions or spacing");
  }
}

BinaryMask binarize(const ScalarVolume& volume, double threshold) {
  const auto values = volume.values();
  std::vector<std::uint8_t> labels(values.size());
  for (std::size_t n = 0; n < values.size(); ++n) {
    labels[n] = static_cast<double>(values[n]) > threshold ? 1 : 0;
  }
  return BinaryMask(volume.meta(), std::move(labels));
}

std::size_t cardinality(const BinaryMask& mask) {
  const auto labels = mask.labels();
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

std::vector<Voxel> border_voxels(const BinaryMask& mask) {
  const GridMeta& meta = mask.meta();
  const std::size_t nx = meta.nx(), ny = meta.ny(), nz = meta.nz();
  const auto labels = mask.labels();
  const std::size_t stride_y = nx, stride_z = nx * ny;

  std::vector<Voxel> border;
  std::size_t n = 0;
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i, ++n) {
        if (!labels[n]) continue;
        const bool on_border = i == 0 || i + 1 == nx || j == 0 || j + 1 == ny || k == 0 ||
                               k + 1 == nz || !labels[n - 1] || !labels[n + 1] ||
                               !labels[n - stride_y] || !labels[n + stride_y] ||
                               !labels[n - stride_z] || !labels[n + stride_z];
        if (on_border) border.push_back({i, j, k});
      }
    }
  }
  return border;
}

namespace {

// 3x3 in-plane sum of slice k with replicate padding.
void plane_sum(std::span<const float> values, std::size_t nx, std::size_t ny, std::size_t k,
               std::vector<double>& row_sums, std::vector<double>& out) {
  const float* slice = values.data() + k * nx * ny;
  for (std::size_t j = 0; j < ny; ++j) {
    const float* row = slice + j * nx;
    double* dst = row_sums.data() + j * nx;
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == nx ? i : i + 1;
      dst[i] = static_cast<double>(row[lo]) + row[i] + row[hi];
    }
  }
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t lo = j == 0 ? 0 : j - 1;
    const std::size_t hi = j + 1 == ny ? j : j + 1;
    const double* a = row_sums.data() + lo * nx;
    const double* b = row_sums.data() + j * nx;
    const double* c = row_sums.data() + hi * nx;
    double* dst = out.data() + j * nx;
    for (std::size_t i = 0; i < nx; ++i) dst[i] = a[i] + b[i] + c[i];
  }
}

}  // namespace

ScalarVolume smooth_box3(const ScalarVolume& volume) {
  const GridMeta& meta = volume.meta();
  const std::size_t nx = meta.nx(), ny = meta.ny(), nz = meta.nz();
  const std::size_t plane = nx * ny;
  const auto values = volume.values();

  std::vector<double> row_sums(plane), prev(plane), cur(plane), next(plane);
  plane_sum(values, nx, ny, 0, row_sums, cur);
  prev = cur;
  plane_sum(values, nx, ny, std::min<std::size_t>(1, nz - 1), row_sums, next);

  std::vector<float> out(values.size());
  for (std::size_t k = 0; k < nz; ++k) {
    float* dst = out.data() + k * plane;
    for (std::size_t n = 0; n < plane; ++n) {
      dst[n] = static_cast<float>((prev[n] + cur[n] + next[n]) / 27.0);
    }
    if (k + 1 < nz) {
      std::swap(prev, cur);
      std::swap(cur, next);
      plane_sum(values, nx, ny, std::min(k + 2, nz - 1), row_sums, next);
    }
  }
  return ScalarVolume(meta, std::move(out));
}

ScalarVolume to_scalar(const BinaryMask& mask) {
  const auto labels = mask.labels();
  std::vector<float> values(labels.begin(), labels.end());
  return ScalarVolume(mask.meta(), std::move(values));
}

}  // namespace segfuse
