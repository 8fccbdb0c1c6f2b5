#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segfuse/metrics.hpp"

namespace segfuse {

// ---------------------------------------------------------------------------
// Lilliefors normality test
// ---------------------------------------------------------------------------

/// Monte Carlo null distribution of the Lilliefors statistic, one row of
/// quantiles per sample size.
///
/// Text layout (whitespace separated, '#' starts a comment line):
///
///     version 1
///     seed <u64>
///     replicates <count>
///     levels <L> <level_0> ... <level_{L-1}>
///     n <size> <q_0> ... <q_{L-1}>          (one line per sample size)
///
/// Levels are ascending CDF probabilities from 0 (replicate minimum) to 1
/// (replicate maximum); q_i is the statistic's quantile at level_i.
class LillieforsTable {
 public:
  static constexpr int kVersion = 1;
  static constexpr std::uint64_t kDefaultSeed = 20200117;
  static constexpr std::size_t kDefaultReplicates = 100000;
  static constexpr std::size_t kMinSize = 4;
  static constexpr std::size_t kMaxSize = 50;
  static constexpr std::size_t kDefaultLevels = 201;

  /// Runs the simulation for every size in [n_min, n_max]. Each size draws
  /// from its own stream derived from (seed, n).
  static LillieforsTable generate(std::uint64_t seed, std::size_t replicates, std::size_t n_min,
                                  std::size_t n_max, std::size_t level_count = kDefaultLevels);

  /// Throws Error(ParseError) on malformed text.
  static LillieforsTable parse(std::string_view text);

  /// The table shipped with the library (data/lilliefors_null.txt).
  static const LillieforsTable& builtin();

  std::string serialize() const;

  /// Upper-tail probability of `statistic` for sample size n. Sizes above
  /// the largest tabulated one use that row with the statistic rescaled by
  /// sqrt(n / n_max). The smallest reported value is 1 / (replicates + 1).
  double p_value(std::size_t n, double statistic) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t replicates() const noexcept { return replicates_; }
  const std::vector<double>& levels() const noexcept { return levels_; }
  const std::map<std::size_t, std::vector<double>>& rows() const noexcept { return rows_; }

 private:
  std::uint64_t seed_ = 0;
  std::size_t replicates_ = 0;
  std::vector<double> levels_;
  std::map<std::size_t, std::vector<double>> rows_;
};

/// Kolmogorov-Smirnov distance between the empirical CDF and the normal CDF
/// with the sample's own mean and (n - 1) standard deviation. Throws
/// DegenerateSample for zero variance.
double lilliefors_statistic(std::span<const double> sample);

struct NormalityResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool normal = true;
};

/// Requires n >= 4. normal = (p_value >= alpha).
NormalityResult lilliefors_normality(std::span<const double> sample, double alpha,
                                     const LillieforsTable& table = LillieforsTable::builtin());

// ---------------------------------------------------------------------------
// Location tests (all p-values two-sided)
// ---------------------------------------------------------------------------

/// t = mean(d) / (sd(d) / sqrt(n)), d = x - y, n - 1 degrees of freedom.
double paired_t_test(std::span<const double> x, std::span<const double> y);

/// Welch's unequal-variance t-test.
double two_sample_t_test(std::span<const double> x, std::span<const double> y);

/// Zero differences are dropped; at least 5 must remain. Exact enumeration
/// for n <= 12, tie-corrected normal approximation with continuity
/// correction above.
double wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);
inline constexpr std::size_t kSignedRankExactMax = 12;

/// Each sample needs n >= 3. Exact when n * m <= 400 and there are no ties,
/// tie-corrected normal approximation with continuity correction otherwise.
double mann_whitney_u(std::span<const double> x, std::span<const double> y);
inline constexpr std::size_t kRankSumExactMaxProduct = 400;

// ---------------------------------------------------------------------------
// Comparison protocol
// ---------------------------------------------------------------------------

enum class TestKind { PairedT, WilcoxonSignedRank, TwoSampleT, MannWhitneyU };
std::string_view to_string(TestKind kind);

enum class Better { First, Second, Neither };

struct ComparisonResult {
  TestKind test_used = TestKind::PairedT;
  double p_value = 1.0;
  bool significant = false;
  /// Which sample is better under the metric's polarity; Neither unless
  /// significant.
  Better better = Better::Neither;
};

inline constexpr double kDefaultAlpha = 0.05;

/// Lilliefors on x - y selects the paired t-test (normal) or the signed-rank
/// test. A zero-variance difference counts as non-normal.
ComparisonResult compare_paired(std::span<const double> x, std::span<const double> y,
                                double alpha, bool higher_is_better,
                                const LillieforsTable& table = LillieforsTable::builtin());

/// Welch t-test when both samples pass Lilliefors, Mann-Whitney otherwise.
ComparisonResult compare_unpaired(std::span<const double> x, std::span<const double> y,
                                  double alpha, bool higher_is_better,
                                  const LillieforsTable& table = LillieforsTable::builtin());

// ---------------------------------------------------------------------------
// Win/loss bookkeeping and overfitting
// ---------------------------------------------------------------------------

enum class Verdict { EnsembleWins, MemberWins, NoDifference };
std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct CellKey {
  std::string dataset;
  std::string metric;
  std::string member;
  std::string ensemble;

  auto operator<=>(const CellKey&) const = default;
};

/// Verdicts of every (dataset, metric, member, ensemble) comparison.
class WinLossTable {
 public:
  WinLossTable(std::vector<std::string> datasets, std::vector<std::string> metrics,
               std::vector<std::string> members, std::vector<std::string> ensembles);

  /// Throws Error(InvalidArgument) when a key names an unknown axis value.
  void set(const CellKey& key, Verdict verdict);
  std::optional<Verdict> get(const CellKey& key) const;

  const std::vector<std::string>& datasets() const noexcept { return datasets_; }
  const std::vector<std::string>& metrics() const noexcept { return metrics_; }
  const std::vector<std::string>& members() const noexcept { return members_; }
  const std::vector<std::string>& ensembles() const noexcept { return ensembles_; }
  const std::map<CellKey, Verdict>& cells() const noexcept { return cells_; }

 private:
  std::vector<std::string> datasets_, metrics_, members_, ensembles_;
  std::map<CellKey, Verdict> cells_;
};

/// wins - losses per ensemble. Throws IncompleteTable when any cell is unset.
std::map<std::string, int> aggregate_scores(const WinLossTable& table);

/// Training value minus testing value per metric, no polarity flip.
MetricVector overfit_magnitude(const MetricVector& train, const MetricVector& test);
MetricVector overfit_magnitude(const MetricSet& train, const MetricSet& test);

}  // namespace segfuse
