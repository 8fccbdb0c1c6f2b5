// Brute-force reference implementations used to check the library. They
// share no code with it and favour obviousness over speed.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "segfuse/rng.hpp"
#include "segfuse/volume.hpp"

namespace oracle {

using segfuse::BinaryMask;
using segfuse::GridMeta;
using segfuse::ScalarVolume;

template <class A, class B>
bool same(const A& a, const B& b) {
  return std::ranges::equal(a, b);
}

inline BinaryMask random_mask(const GridMeta& grid, double density, std::uint64_t seed) {
  segfuse::SplitMix64 rng(seed);
  std::vector<std::uint8_t> labels(grid.voxel_count());
  for (auto& l : labels) l = rng.uniform() < density ? 1 : 0;
  return BinaryMask(grid, std::move(labels));
}

inline ScalarVolume random_volume(const GridMeta& grid, std::uint64_t seed) {
  segfuse::SplitMix64 rng(seed);
  std::vector<float> values(grid.voxel_count());
  for (auto& v : values) v = static_cast<float>(rng.uniform());
  return ScalarVolume(grid, std::move(values));
}

/// Replicate-padded 27-point mean, direct triple loop.
inline std::vector<double> box_mean(const ScalarVolume& v) {
  const auto& m = v.meta();
  const long nx = static_cast<long>(m.nx()), ny = static_cast<long>(m.ny()), nz = static_cast<long>(m.nz());
  const auto clampl = [](long a, long n) { return std::min(std::max(a, 0L), n - 1); };
  std::vector<double> out(m.voxel_count());
  for (long k = 0; k < nz; ++k)
    for (long j = 0; j < ny; ++j)
      for (long i = 0; i < nx; ++i) {
        double sum = 0.0;
        for (long dk = -1; dk <= 1; ++dk)
          for (long dj = -1; dj <= 1; ++dj)
            for (long di = -1; di <= 1; ++di) {
              sum += v.at(clampl(i + di, nx), clampl(j + dj, ny), clampl(k + dk, nz));
            }
        out[m.index(i, j, k)] = sum / 27.0;
      }
  return out;
}

inline bool is_border(const BinaryMask& mask, long i, long j, long k) {
  const auto& m = mask.meta();
  if (!mask.at(i, j, k)) return false;
  const long n[3] = {static_cast<long>(m.nx()), static_cast<long>(m.ny()), static_cast<long>(m.nz())};
  const long offsets[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (const auto& o : offsets) {
    const long a = i + o[0], b = j + o[1], c = k + o[2];
    if (a < 0 || b < 0 || c < 0 || a >= n[0] || b >= n[1] || c >= n[2]) return true;
    if (!mask.at(a, b, c)) return true;
  }
  return false;
}

struct Point {
  double x, y, z;
};

inline std::vector<Point> border_points(const BinaryMask& mask) {
  const auto& m = mask.meta();
  std::vector<Point> pts;
  for (std::size_t k = 0; k < m.nz(); ++k)
    for (std::size_t j = 0; j < m.ny(); ++j)
      for (std::size_t i = 0; i < m.nx(); ++i)
        if (is_border(mask, static_cast<long>(i), static_cast<long>(j), static_cast<long>(k))) {
          pts.push_back({static_cast<double>(i) * m.spacing()[0], static_cast<double>(j) * m.spacing()[1],
                         static_cast<double>(k) * m.spacing()[2]});
        }
  return pts;
}

/// All-pairs directed distances from every border point of a to those of b.
inline std::vector<double> directed(const BinaryMask& a, const BinaryMask& b) {
  const auto pa = border_points(a), pb = border_points(b);
  std::vector<double> out;
  for (const Point& p : pa) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& q : pb) {
      best = std::min(best, std::hypot(p.x - q.x, p.y - q.y, p.z - q.z));
    }
    out.push_back(best);
  }
  return out;
}

inline std::pair<double, double> assd_mssd(const BinaryMask& a, const BinaryMask& b) {
  auto d = directed(a, b);
  const auto e = directed(b, a);
  d.insert(d.end(), e.begin(), e.end());
  const double sum = std::accumulate(d.begin(), d.end(), 0.0);
  return {sum / static_cast<double>(d.size()), *std::max_element(d.begin(), d.end())};
}

/// Average ranks, 1-based.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t a = 0; a < v.size(); ++a) {
    double below = 0.0, equal = 0.0;
    for (std::size_t b = 0; b < v.size(); ++b) {
      if (v[b] < v[a]) below += 1.0;
      if (v[b] == v[a]) equal += 1.0;
    }
    r[a] = below + (equal + 1.0) / 2.0;
  }
  return r;
}

/// Two-sided exact signed-rank p by enumerating all 2^n sign patterns of the
/// non-zero differences.
inline double signed_rank_enumerated(const std::vector<double>& d) {
  std::vector<double> nz;
  for (double v : d)
    if (v != 0.0) nz.push_back(v);
  std::vector<double> mags;
  for (double v : nz) mags.push_back(std::abs(v));
  const auto ranks = average_ranks(mags);
  const double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
  double observed = 0.0;
  for (std::size_t m = 0; m < nz.size(); ++m)
    if (nz[m] > 0) observed += ranks[m];
  const double dev = std::abs(observed - total / 2.0);
  const std::uint64_t patterns = std::uint64_t{1} << nz.size();
  std::uint64_t extreme = 0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0.0;
    for (std::size_t m = 0; m < nz.size(); ++m)
      if (mask >> m & 1u) w += ranks[m];
    if (std::abs(w - total / 2.0) >= dev - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(patterns);
}

/// Two-sided exact rank-sum p by enumerating every choice of positions for
/// the x sample among the pooled order (no ties).
inline double rank_sum_enumerated(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size(), m = y.size(), total = n + m;
  double u_obs = 0.0;
  for (double a : x)
    for (double b : y) u_obs += a > b ? 1.0 : 0.0;
  const double centre = static_cast<double>(n * m) / 2.0;
  const double dev = std::abs(u_obs - centre);
  // Positions 0..total-1 in pooled order; x occupies the chosen subset.
  std::vector<bool> pick(total, false);
  std::fill(pick.end() - static_cast<long>(n), pick.end(), true);
  std::uint64_t count = 0, extreme = 0;
  do {
    double u = 0.0, ys_below = 0.0;
    for (std::size_t p = 0; p < total; ++p) {
      if (pick[p]) {
        u += ys_below;
      } else {
        ys_below += 1.0;
      }
    }
    ++count;
    if (std::abs(u - centre) >= dev - 1e-9) ++extreme;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return static_cast<double>(extreme) / static_cast<double>(count);
}

/// Regularised incomplete beta via the Lentz continued fraction.
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x)) / a;
  const double tiny = 1e-300;
  double f = 1.0, c = 1.0, d = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const int m = i / 2;
    double num;
    if (i == 0) {
      num = 1.0;
    } else if (i % 2 == 0) {
      num = (m * (b - m) * x) / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    } else {
      num = -((a + m) * (a + b + m) * x) / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    }
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    const double cd = c * d;
    f *= cd;
    if (std::abs(1.0 - cd) < 1e-15) break;
  }
  return front * (f - 1.0);
}

/// Two-sided Student-t tail probability.
inline double student_two_sided(double t, double df) {
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  const double mu = mean(v);
  double s = 0.0;
  for (double a : v) s += (a - mu) * (a - mu);
  return s / static_cast<double>(v.size() - 1);
}

inline double welch_p(const std::vector<double>& x, const std::vector<double>& y) {
  const double ax = sample_variance(x) / static_cast<double>(x.size());
  const double ay = sample_variance(y) / static_cast<double>(y.size());
  const double t = (mean(x) - mean(y)) / std::sqrt(ax + ay);
  const double df = (ax + ay) * (ax + ay) /
                    (ax * ax / static_cast<double>(x.size() - 1) + ay * ay / static_cast<double>(y.size() - 1));
  return student_two_sided(t, df);
}

/// Lilliefors p-value by direct simulation, used to cross-check the table.
inline double lilliefors_simulated_p(double statistic, std::size_t n, std::size_t replicates,
                                     std::uint64_t seed) {
  segfuse::SplitMix64 rng(seed);
  std::size_t exceed = 0;
  std::vector<double> s(n);
  for (std::size_t r = 0; r < replicates; ++r) {
    for (double& v : s) v = rng.normal();
    std::sort(s.begin(), s.end());
    const double mu = mean(s), sd = std::sqrt(sample_variance(s));
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = 0.5 * std::erfc(-(s[i] - mu) / sd / std::sqrt(2.0));
      d = std::max({d, static_cast<double>(i + 1) / static_cast<double>(n) - f,
                    f - static_cast<double>(i) / static_cast<double>(n)});
    }
    if (d >= statistic) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(replicates);
}

}  // namespace oracle
