#include "segfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "segfuse/error.hpp"

namespace segfuse {

ForegroundPrior::ForegroundPrior(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "foreground prior must lie strictly inside (0, 1), got " + std::to_string(value));
  }
}

std::string_view to_string(CombinerKind kind) {
  switch (kind) {
    case CombinerKind::MajorityVote: return "majority";
    case CombinerKind::Average: return "average";
    case CombinerKind::Product: return "product";
    case CombinerKind::MinMax: return "minmax";
  }
  return "unknown";
}

CombinerKind parse_combiner(std::string_view name) {
  for (CombinerKind kind : kAllCombiners) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown combiner '" + std::string(name) + "'");
}

ForegroundPrior estimate_prior(std::span<const BinaryMask> training_masks) {
  if (training_masks.empty()) {
    throw Error(ErrorCode::EmptyInput, "no training masks to estimate the prior from");
  }
  std::size_t foreground = 0, total = 0;
  for (const BinaryMask& mask : training_masks) {
    foreground += cardinality(mask);
    total += mask.meta().voxel_count();
  }
  const double proportion = static_cast<double>(foreground) / static_cast<double>(total);
  return ForegroundPrior(std::clamp(proportion, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon));
}

namespace {

void check_members(std::span<const ScalarVolume> maps) {
  if (maps.size() < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "an ensemble needs at least two members, got " + std::to_string(maps.size()));
  }
  for (std::size_t m = 1; m < maps.size(); ++m) require_compatible(maps[0].meta(), maps[m].meta());
}

double clamp_probability(float p) {
  return std::clamp(static_cast<double>(p), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

}  // namespace

BinaryMask combine_majority(std::span<const ScalarVolume> maps) {
  check_members(maps);
  const std::size_t count = maps[0].meta().voxel_count();
  const std::size_t members = maps.size();
  std::vector<std::uint8_t> votes(count, 0);
  for (const ScalarVolume& map : maps) {
    const auto values = map.values();
    for (std::size_t n = 0; n < count; ++n) votes[n] += values[n] > 0.5f ? 1 : 0;
  }
  // votes > N/2  <=>  2 * votes > N
  for (auto& v : votes) v = 2 * static_cast<std::size_t>(v) > members ? 1 : 0;
  return BinaryMask(maps[0].meta(), std::move(votes));
}

AverageResult combine_average(std::span<const ScalarVolume> maps) {
  check_members(maps);
  const std::size_t count = maps[0].meta().voxel_count();
  std::vector<double> sums(count, 0.0);
  for (const ScalarVolume& map : maps) {
    const auto values = map.values();
    for (std::size_t n = 0; n < count; ++n) sums[n] += values[n];
  }
  const double members = static_cast<double>(maps.size());
  std::vector<float> support(count);
  std::vector<std::uint8_t> labels(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double mean = sums[n] / members;
    support[n] = static_cast<float>(mean);
    labels[n] = mean > 0.5 ? 1 : 0;
  }
  return {ScalarVolume(maps[0].meta(), std::move(support)),
          BinaryMask(maps[0].meta(), std::move(labels))};
}

TwoClassResult combine_product(std::span<const ScalarVolume> maps, ForegroundPrior prior) {
  check_members(maps);
  const std::size_t count = maps[0].meta().voxel_count();
  std::vector<double> log_f(count, -std::log(prior.value()));
  std::vector<double> log_b(count, -std::log(1.0 - prior.value()));
  for (const ScalarVolume& map : maps) {
    const auto values = map.values();
    for (std::size_t n = 0; n < count; ++n) {
      const double p = clamp_probability(values[n]);
      log_f[n] += std::log(p);
      log_b[n] += std::log(1.0 - p);
    }
  }
  std::vector<float> support_f(count), support_b(count);
  std::vector<std::uint8_t> labels(count);
  for (std::size_t n = 0; n < count; ++n) {
    support_f[n] = static_cast<float>(log_f[n]);
    support_b[n] = static_cast<float>(log_b[n]);
    labels[n] = log_f[n] > log_b[n] ? 1 : 0;
  }
  return {ScalarVolume(maps[0].meta(), std::move(support_f)),
          ScalarVolume(maps[0].meta(), std::move(support_b)),
          BinaryMask(maps[0].meta(), std::move(labels))};
}

namespace {

struct MinSupports {
  std::vector<double> foreground;
  std::vector<double> background;
};

MinSupports minmax_supports(std::span<const ScalarVolume> maps) {
  const std::size_t count = maps[0].meta().voxel_count();
  MinSupports s{std::vector<double>(count, std::numeric_limits<double>::infinity()),
                std::vector<double>(count, std::numeric_limits<double>::infinity())};
  for (const ScalarVolume& map : maps) {
    const auto values = map.values();
    for (std::size_t n = 0; n < count; ++n) {
      const double p = values[n];
      s.foreground[n] = std::min(s.foreground[n], p);
      s.background[n] = std::min(s.background[n], 1.0 - p);
    }
  }
  return s;
}

}  // namespace

TwoClassResult combine_minmax(std::span<const ScalarVolume> maps) {
  check_members(maps);
  const MinSupports s = minmax_supports(maps);
  const std::size_t count = s.foreground.size();
  std::vector<float> support_f(count), support_b(count);
  std::vector<std::uint8_t> labels(count);
  for (std::size_t n = 0; n < count; ++n) {
    support_f[n] = static_cast<float>(s.foreground[n]);
    support_b[n] = static_cast<float>(s.background[n]);
    labels[n] = s.foreground[n] > s.background[n] ? 1 : 0;
  }
  return {ScalarVolume(maps[0].meta(), std::move(support_f)),
          ScalarVolume(maps[0].meta(), std::move(support_b)),
          BinaryMask(maps[0].meta(), std::move(labels))};
}

namespace {

// P_f / (P_f + P_b) in the probability domain. A 0/0 support pair maps to
// 0.5, which thresholds to background like any other tie.
ScalarVolume normalise_minmax(std::span<const ScalarVolume> maps) {
  const MinSupports s = minmax_supports(maps);
  std::vector<float> out(s.foreground.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double sum = s.foreground[n] + s.background[n];
    out[n] = sum > 0.0 ? static_cast<float>(s.foreground[n] / sum) : 0.5f;
  }
  return ScalarVolume(maps[0].meta(), std::move(out));
}

// exp(lf) / (exp(lf) + exp(lb)) evaluated as a logistic of the difference.
ScalarVolume normalise_product(std::span<const ScalarVolume> maps, ForegroundPrior prior) {
  const std::size_t count = maps[0].meta().voxel_count();
  std::vector<double> diff(count, std::log(1.0 - prior.value()) - std::log(prior.value()));
  for (const ScalarVolume& map : maps) {
    const auto values = map.values();
    for (std::size_t n = 0; n < count; ++n) {
      const double p = clamp_probability(values[n]);
      diff[n] += std::log(p) - std::log(1.0 - p);
    }
  }
  std::vector<float> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    out[n] = static_cast<float>(1.0 / (1.0 + std::exp(-diff[n])));
  }
  return ScalarVolume(maps[0].meta(), std::move(out));
}

}  // namespace

FusedCase fuse_case_detailed(std::span<const ScalarVolume> maps, CombinerKind kind,
                             ForegroundPrior prior, bool smoothing) {
  check_members(maps);
  if (!smoothing) {
    switch (kind) {
      case CombinerKind::MajorityVote: return {combine_majority(maps), std::nullopt};
      case CombinerKind::Average: {
        auto result = combine_average(maps);
        return {std::move(result.mask), std::move(result.support)};
      }
      case CombinerKind::Product: {
        auto result = combine_product(maps, prior);
        return {std::move(result.mask), normalise_product(maps, prior)};
      }
      case CombinerKind::MinMax: {
        return {combine_minmax(maps).mask, normalise_minmax(maps)};
      }
    }
  }

  std::vector<ScalarVolume> smoothed;
  smoothed.reserve(maps.size());
  for (const ScalarVolume& map : maps) smoothed.push_back(smooth_box3(map));

  switch (kind) {
    case CombinerKind::MajorityVote: {
      ScalarVolume votes = smooth_box3(to_scalar(combine_majority(smoothed)));
      return {binarize(votes, 0.5), std::nullopt};
    }
    case CombinerKind::Average: {
      ScalarVolume support = smooth_box3(combine_average(smoothed).support);
      BinaryMask mask = binarize(support, 0.5);
      return {std::move(mask), std::move(support)};
    }
    case CombinerKind::Product: {
      ScalarVolume support = smooth_box3(normalise_product(smoothed, prior));
      BinaryMask mask = binarize(support, 0.5);
      return {std::move(mask), std::move(support)};
    }
    case CombinerKind::MinMax: {
      ScalarVolume support = smooth_box3(normalise_minmax(smoothed));
      BinaryMask mask = binarize(support, 0.5);
      return {std::move(mask), std::move(support)};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown combiner kind");
}

BinaryMask fuse_case(std::span<const ScalarVolume> maps, CombinerKind kind, ForegroundPrior prior,
                     bool smoothing) {
  return std::move(fuse_case_detailed(maps, kind, prior, smoothing).mask);
}

}  // namespace segfuse
