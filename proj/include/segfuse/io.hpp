#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "segfuse/metrics.hpp"
#include "segfuse/volume.hpp"

namespace segfuse {

// ---------------------------------------------------------------------------
// Volumes: MetaImage-style header (.mhd) plus raw payload
// ---------------------------------------------------------------------------
//
// Header, one "Key = Value" per line, written in this order:
//
//   ObjectType = Image
//   NDims = 3
//   BinaryData = True
//   BinaryDataByteOrderMSB = False
//   CompressedData = False
//   DimSize = nx ny nz
//   ElementSpacing = sx sy sz
//   ElementType = MET_FLOAT | MET_UCHAR
//   ElementDataFile = <file name relative to the header>
//
// MET_FLOAT holds probabilities as 32-bit IEEE little-endian floats,
// MET_UCHAR holds mask labels {0, 1}. Payload order is x-fastest. Spacing
// values are written in shortest round-trip form.

using Volume = std::variant<ScalarVolume, BinaryMask>;

/// Probability tolerance: values within this distance outside [0, 1] are
/// clamped on read, anything further is ValueOutOfRange.
inline constexpr double kProbabilityReadTolerance = 1e-6;

Volume read_volume(const std::filesystem::path& header_path);
/// Throws ParseError when the file holds the other element type.
ScalarVolume read_probability_map(const std::filesystem::path& header_path);
BinaryMask read_mask(const std::filesystem::path& header_path);

/// Writes `<path>` and `<path stem>.raw` next to it. Throws IoFailure.
void write_volume(const ScalarVolume& volume, const std::filesystem::path& header_path);
void write_volume(const BinaryMask& mask, const std::filesystem::path& header_path);

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

enum class Split { Train, Test };
std::string_view to_string(Split split);

struct CaseManifest {
  std::string case_id;
  std::filesystem::path ground_truth;
  std::vector<std::filesystem::path> segmenter_maps;
  Split split = Split::Test;
};

/// JSON document:
///
///   {
///     "dataset": "name",                      (optional)
///     "segmenter_names": ["a", "b", ...],     (optional, default seg1..segN)
///     "cases": [
///       {"case_id": "...", "split": "train" | "test",
///        "ground_truth": "path.mhd", "segmenter_maps": ["p1.mhd", ...]}
///     ]
///   }
///
/// Relative paths resolve against the manifest's directory. Every case needs
/// the same number (>= 2) of segmenter maps, and no path may repeat within a
/// case.
struct Manifest {
  std::string dataset;
  std::vector<std::string> segmenter_names;
  std::vector<CaseManifest> cases;
};

/// Throws SchemaError or DuplicateCase.
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string case_id;
  std::string method;
  MetricSet metrics;
};

/// CSV with header case_id,method,DICE,RAVD,ASSD,MSSD, values fixed to four
/// decimals, rows sorted by case then method.
void write_results(std::vector<ResultRow> rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

/// Per-method means, CSV header method,DICE,RAVD,ASSD,MSSD.
using MethodMeans = std::map<std::string, MetricVector>;
MethodMeans mean_by_method(const std::vector<ResultRow>& rows);
void write_means(const MethodMeans& means, const std::filesystem::path& path);
MethodMeans read_means(const std::filesystem::path& path);

/// Shared helpers for the text writers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string format_fixed(double value, int decimals);

}  // namespace segfuse
