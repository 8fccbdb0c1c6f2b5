#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "segfuse/volume.hpp"

namespace segfuse {

/// Clamp applied to probabilities before logs and to the estimated prior.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// Prior probability of the foreground class, strictly inside (0, 1).
class ForegroundPrior {
 public:
  explicit ForegroundPrior(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

enum class CombinerKind { MajorityVote, Average, Product, MinMax };

inline constexpr CombinerKind kAllCombiners[] = {CombinerKind::MajorityVote, CombinerKind::Average,
                                                 CombinerKind::Product, CombinerKind::MinMax};

/// Short method names used in result tables: majority, average, product, minmax.
std::string_view to_string(CombinerKind kind);
/// Accepts the short names above; throws Error(InvalidArgument) otherwise.
CombinerKind parse_combiner(std::string_view name);

/// Proportion of foreground voxels over all masks, clamped to
/// [kProbabilityEpsilon, 1 - kProbabilityEpsilon].
ForegroundPrior estimate_prior(std::span<const BinaryMask> training_masks);

struct AverageResult {
  ScalarVolume support;
  BinaryMask mask;
};

/// Per-voxel class supports of a two-class combiner. For the product rule
/// the supports are natural-log values.
struct TwoClassResult {
  ScalarVolume support_foreground;
  ScalarVolume support_background;
  BinaryMask mask;
};

// All combiners take N >= 2 compatible maps; ties go to background.

/// Foreground iff more than N/2 members exceed 0.5.
BinaryMask combine_majority(std::span<const ScalarVolume> maps);

/// Support is the mean probability; foreground iff it exceeds 0.5.
AverageResult combine_average(std::span<const ScalarVolume> maps);

/// P_f = -ln(P_f0) + sum ln(p_i), P_b = -ln(1 - P_f0) + sum ln(1 - p_i),
/// with every p_i clamped to [eps, 1 - eps]. Foreground iff P_f > P_b.
TwoClassResult combine_product(std::span<const ScalarVolume> maps, ForegroundPrior prior);

/// P_f = min p_i, P_b = min (1 - p_i). Foreground iff P_f > P_b.
TwoClassResult combine_minmax(std::span<const ScalarVolume> maps);

struct FusedCase {
  BinaryMask mask;
  /// Ensemble probability that was thresholded (smoothed when smoothing is
  /// on). Absent for majority vote, which has no continuous support.
  std::optional<ScalarVolume> support;
};

/// Full fusion pipeline. With smoothing: every input is box-smoothed, the
/// combiner is applied, its output is normalised to P_f / (P_f + P_b)
/// (the 0/1 vote field for majority vote), box-smoothed again and
/// thresholded at 0.5. Without smoothing the combiner's own decision is
/// returned.
FusedCase fuse_case_detailed(std::span<const ScalarVolume> maps, CombinerKind kind,
                             ForegroundPrior prior, bool smoothing);

BinaryMask fuse_case(std::span<const ScalarVolume> maps, CombinerKind kind, ForegroundPrior prior,
                     bool smoothing);

}  // namespace segfuse
