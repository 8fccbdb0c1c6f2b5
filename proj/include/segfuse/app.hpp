#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segfuse/fusion.hpp"
#include "segfuse/io.hpp"
#include "segfuse/stats.hpp"

namespace segfuse {

/// Run configuration, read from JSON:
///
///   {
///     "manifest": "cases/manifest.json",
///     "combiners": ["majority", "average", "product", "minmax"],
///     "smoothing": true,
///     "prior": "estimate" | 0.07,
///     "alpha": 0.05,
///     "output_dir": "out",
///     "paired": true,
///     "jobs": 1
///   }
///
/// Every key is optional except "manifest". Relative paths resolve against
/// the config file's directory. "estimate" takes the foreground proportion
/// of the training cases' ground truths.
struct RunConfig {
  std::filesystem::path manifest;
  std::vector<CombinerKind> combiners{std::begin(kAllCombiners), std::end(kAllCombiners)};
  bool smoothing = true;
  std::optional<double> prior;
  double alpha = kDefaultAlpha;
  std::filesystem::path output_dir = "segfuse_out";
  bool paired = true;
  std::size_t jobs = 1;
};

/// Throws SchemaError for unknown keys, wrong types or out-of-range values.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// Throws SchemaError unless alpha and an explicit prior lie in (0, 1) and
/// at least one combiner is listed.
void validate(const RunConfig& config);

/// Outcome of one command. Per-case problems go to `errors` and do not stop
/// the remaining cases.
struct CommandStatus {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  /// 0 when every case succeeded, 2 otherwise.
  int exit_code() const noexcept { return errors.empty() ? 0 : 2; }
};

/// Exit code for configuration errors (bad config, unreadable manifest).
inline constexpr int kConfigErrorExit = 1;

// ---------------------------------------------------------------------------
// Library-level compositions the commands are built from
// ---------------------------------------------------------------------------

/// Prior from the config, or estimated from the training ground truths.
/// Throws InvalidArgument when estimation is requested without training cases.
ForegroundPrior resolve_prior(const RunConfig& config, const Manifest& manifest);

/// One row per segmenter (its map, smoothed when smoothing is on, binarised
/// at 0.5) and per combiner (fuse_case).
std::vector<ResultRow> evaluate_methods(const std::string& case_id, const BinaryMask& truth,
                                        const std::vector<ScalarVolume>& maps,
                                        const std::vector<std::string>& segmenter_names,
                                        const std::vector<CombinerKind>& combiners,
                                        ForegroundPrior prior, bool smoothing);

struct ComparisonRow {
  CellKey key;
  ComparisonResult result;
  Verdict verdict = Verdict::NoDifference;
};

/// Every (metric, member, ensemble) comparison of one dataset's per-case
/// results. Ensembles are the methods named after a combiner, members are
/// the rest. Throws IncompleteTable when a method lacks a case.
std::vector<ComparisonRow> compare_methods(const std::string& dataset,
                                           const std::vector<ResultRow>& rows, double alpha,
                                           bool paired,
                                           const LillieforsTable& table = LillieforsTable::builtin());

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Writes <output_dir>/<case>/<combiner>_mask.mhd and, where the combiner has
/// one, <combiner>_support.mhd.
CommandStatus run_combine(const RunConfig& config);

/// Writes results_{train,test}.csv and means_{train,test}.csv.
CommandStatus run_evaluate(const RunConfig& config);

struct CompareInput {
  std::string dataset;
  std::filesystem::path results;
};

/// Writes comparisons.csv and scores.csv into output_dir.
CommandStatus run_compare(const std::vector<CompareInput>& inputs, double alpha, bool paired,
                          const std::filesystem::path& output_dir);

/// Writes glyph.svg from the test means (ensembles only when at least two
/// are present) and overfit.html from train and test means.
CommandStatus run_report(const std::filesystem::path& train_means,
                         const std::filesystem::path& test_means, const std::string& title,
                         const std::filesystem::path& output_dir);

struct SynthOptions {
  std::filesystem::path output_dir = "synthetic";
  std::size_t cases = 20;
  std::size_t train_cases = 10;
  GridMeta grid{{64, 64, 40}, {1.0, 1.0, 1.5}};
  std::uint64_t seed = 1;
  std::string dataset = "synthetic";
};

/// Writes one directory per case (truth.mhd, seg<m>.mhd) and manifest.json.
CommandStatus run_synth(const SynthOptions& options);

}  // namespace segfuse
