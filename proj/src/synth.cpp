#include "segfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segfuse/error.hpp"
#include "segfuse/rng.hpp"

namespace segfuse {

BinaryMask make_phantom(const PhantomSpec& spec) {
  if (spec.shapes.empty()) throw Error(ErrorCode::InvalidArgument, "phantom has no shapes");
  for (const Ellipsoid& e : spec.shapes) {
    for (double a : e.semi_axes_mm) {
      if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "ellipsoid semi-axes must be positive");
    }
  }
  const GridMeta& g = spec.grid;
  const auto& s = g.spacing();
  std::vector<std::uint8_t> labels(g.voxel_count(), 0);
  std::size_t inside = 0;
  for (const Ellipsoid& e : spec.shapes) {
    const std::array<double, 3> centre{e.center_voxel[0] * s[0], e.center_voxel[1] * s[1],
                                       e.center_voxel[2] * s[2]};
    for (std::size_t k = 0; k < g.nz(); ++k) {
      const double dz = (static_cast<double>(k) * s[2] - centre[2]) / e.semi_axes_mm[2];
      if (dz * dz >= 1.0) continue;
      for (std::size_t j = 0; j < g.ny(); ++j) {
        const double dy = (static_cast<double>(j) * s[1] - centre[1]) / e.semi_axes_mm[1];
        const double rest = dz * dz + dy * dy;
        if (rest >= 1.0) continue;
        std::uint8_t* row = labels.data() + g.index(0, j, k);
        for (std::size_t i = 0; i < g.nx(); ++i) {
          const double dx = (static_cast<double>(i) * s[0] - centre[0]) / e.semi_axes_mm[0];
          if (rest + dx * dx < 1.0 && !row[i]) {
            row[i] = 1;
            ++inside;
          }
        }
      }
    }
  }
  if (inside == 0) throw Error(ErrorCode::EmptyPhantom, "no voxel centre lies inside the phantom");
  return BinaryMask(spec.grid, std::move(labels));
}

PhantomSpec random_phantom_spec(const GridMeta& grid, std::uint64_t seed) {
  SplitMix64 rng(derive_seed(seed, 0x5048414e544f4dULL));
  const auto& d = grid.dims();
  const auto& s = grid.spacing();
  std::array<double, 3> extent{}, mid{};
  for (int a = 0; a < 3; ++a) {
    extent[a] = static_cast<double>(d[a] - 1) * s[a];
    mid[a] = 0.5 * static_cast<double>(d[a] - 1);
  }

  PhantomSpec spec{grid, {}, seed};
  // Main body.
  Ellipsoid body;
  for (int a = 0; a < 3; ++a) {
    body.center_voxel[a] = mid[a] + rng.uniform(-0.05, 0.05) * static_cast<double>(d[a] - 1);
    body.semi_axes_mm[a] = std::max(rng.uniform(0.22, 0.3) * extent[a], 0.6 * s[a]);
  }
  spec.shapes.push_back(body);
  // Two lobes attached to the body.
  for (int lobe = 0; lobe < 2; ++lobe) {
    Ellipsoid e;
    for (int a = 0; a < 3; ++a) {
      const double offset = rng.uniform(-0.6, 0.6) * body.semi_axes_mm[a] / s[a];
      e.center_voxel[a] = body.center_voxel[a] + offset;
      e.semi_axes_mm[a] = std::max(rng.uniform(0.35, 0.6) * body.semi_axes_mm[a], 0.6 * s[a]);
    }
    spec.shapes.push_back(e);
  }
  return spec;
}

std::vector<SegmenterProfile> default_segmenter_profiles() {
  return {
      {0, 2.0, 0.20, 1.0},
      {1, -2.0, 0.25, 2.0},
      {0, 1.0, 0.30, 0.5},
      {2, -1.0, 0.35, 1.5},
  };
}

namespace {

// One line of the separable squared distance transform (Felzenszwalb and
// Huttenlocher lower envelope) with sample spacing `step`.
void edt_line(const double* f, double* out, std::size_t n, double step, std::vector<std::size_t>& v,
              std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double w = step * step;
  std::size_t first = n;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] < inf) {
      first = q;
      break;
    }
  }
  if (first == n) {
    std::fill(out, out + n, inf);
    return;
  }
  std::size_t k = 0;
  v[0] = first;
  z[0] = -inf;
  z[1] = inf;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (f[q] == inf) continue;
    const auto qd = static_cast<double>(q);
    const auto intersect = [&](std::size_t p) {
      const auto pd = static_cast<double>(p);
      return ((f[q] + w * qd * qd) - (f[p] + w * pd * pd)) / (2.0 * w * (qd - pd));
    };
    // z[0] is -inf, so k never underflows.
    double sep = intersect(v[k]);
    while (sep <= z[k]) sep = intersect(v[--k]);
    ++k;
    v[k] = q;
    z[k] = sep;
    z[k + 1] = inf;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto qd = static_cast<double>(q);
    while (z[k + 1] < qd) ++k;
    const double diff = qd - static_cast<double>(v[k]);
    out[q] = w * diff * diff + f[v[k]];
  }
}

// Squared distance (mm^2) from each voxel to the nearest voxel whose label
// equals `target`.
std::vector<float> squared_distance_to(const BinaryMask& mask, std::uint8_t target) {
  const GridMeta& g = mask.meta();
  const std::size_t nx = g.nx(), ny = g.ny(), nz = g.nz();
  const auto& s = g.spacing();
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto labels = mask.labels();

  std::vector<float> dist(labels.size());
  const std::size_t longest = std::max({nx, ny, nz});
  std::vector<double> in(longest), out(longest), z(longest + 1);
  std::vector<std::size_t> v(longest);

  const auto pass = [&](std::size_t n, std::size_t stride, double step, auto&& starts) {
    for (std::size_t base : starts) {
      for (std::size_t q = 0; q < n; ++q) in[q] = dist[base + q * stride];
      edt_line(in.data(), out.data(), n, step, v, z);
      for (std::size_t q = 0; q < n; ++q) dist[base + q * stride] = static_cast<float>(out[q]);
    }
  };

  for (std::size_t n = 0; n < labels.size(); ++n) {
    dist[n] = labels[n] == target ? 0.0f : static_cast<float>(inf);
  }
  std::vector<std::size_t> starts;
  starts.reserve(ny * nz);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j) starts.push_back(g.index(0, j, k));
  pass(nx, 1, s[0], starts);
  starts.clear();
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t i = 0; i < nx; ++i) starts.push_back(g.index(i, 0, k));
  pass(ny, nx, s[1], starts);
  starts.clear();
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) starts.push_back(g.index(i, j, 0));
  pass(nz, nx * ny, s[2], starts);
  return dist;
}

}  // namespace

ScalarVolume signed_distance_mm(const BinaryMask& truth) {
  const GridMeta& g = truth.meta();
  const auto& s = g.spacing();
  const double half = 0.5 * std::min({s[0], s[1], s[2]});
  const double cap = g.world_diagonal_mm();
  const auto labels = truth.labels();

  std::vector<float> out = squared_distance_to(truth, 0);  // inside: distance to background
  {
    const std::vector<float> to_fg = squared_distance_to(truth, 1);
    for (std::size_t n = 0; n < out.size(); ++n) {
      if (labels[n]) {
        out[n] = static_cast<float>(std::min(std::sqrt(static_cast<double>(out[n])), cap) - half);
      } else {
        out[n] = static_cast<float>(-(std::min(std::sqrt(static_cast<double>(to_fg[n])), cap) - half));
      }
    }
  }
  return ScalarVolume(g, std::move(out));
}

ScalarVolume simulate_from_distance(const ScalarVolume& signed_distance,
                                    const SegmenterProfile& profile, std::uint64_t seed) {
  if (profile.blur_passes < 0 || profile.noise_sigma < 0.0 || !(profile.temperature > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid segmenter profile");
  }
  const auto d = signed_distance.values();
  const std::uint64_t noise_seed = derive_seed(seed, 0x4e4f495345ULL);
  std::vector<float> p(d.size());
  for (std::size_t n = 0; n < d.size(); ++n) {
    double value = 1.0 / (1.0 + std::exp(-(d[n] + profile.boundary_bias_mm) / profile.temperature));
    if (profile.noise_sigma > 0.0) value += profile.noise_sigma * normal_at(noise_seed, n);
    p[n] = static_cast<float>(std::clamp(value, 0.0, 1.0));
  }
  ScalarVolume map(signed_distance.meta(), std::move(p));
  for (int pass = 0; pass < profile.blur_passes; ++pass) map = smooth_box3(map);
  return map;
}

ScalarVolume simulate_segmenter(const BinaryMask& truth, const SegmenterProfile& profile,
                                std::uint64_t seed) {
  if (cardinality(truth) == 0) {
    throw Error(ErrorCode::InvalidArgument, "cannot simulate a segmenter for an empty truth");
  }
  return simulate_from_distance(signed_distance_mm(truth), profile, seed);
}

SyntheticCase make_synthetic_case(const GridMeta& grid, std::uint64_t seed, std::size_t index,
                                  const std::vector<SegmenterProfile>& profiles) {
  const std::uint64_t case_seed = derive_seed(seed, index);
  SyntheticCase result{make_phantom(random_phantom_spec(grid, case_seed)), {}};
  const ScalarVolume distance = signed_distance_mm(result.truth);
  for (std::size_t m = 0; m < profiles.size(); ++m) {
    result.maps.push_back(simulate_from_distance(distance, profiles[m], derive_seed(case_seed, m + 1)));
  }
  return result;
}

}  // namespace segfuse
