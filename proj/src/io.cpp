#include "segfuse/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "segfuse/error.hpp"

namespace segfuse {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  // Avoid "-0.0000" so identical magnitudes print identically.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

template <typename T>
T parse_number(const std::string& token, const std::string& what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::ParseError, "bad " + what + " value '" + token + "'");
  }
  return v;
}

// ---------------------------------------------------------------------------
// Volume header
// ---------------------------------------------------------------------------

enum class ElementType { Float, UChar };

struct Header {
  GridMeta meta;
  ElementType type;
  fs::path data_file;
};

Header parse_header(const fs::path& header_path) {
  const std::string text = read_text_file(header_path);
  std::map<std::string, std::string> fields;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, header_path.string() + ": line without '=': " + line);
    }
    fields[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  const auto require = [&](const std::string& key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw Error(ErrorCode::ParseError, header_path.string() + ": missing " + key);
    }
    return it->second;
  };
  const auto expect = [&](const std::string& key, const std::string& wanted) {
    const auto it = fields.find(key);
    if (it != fields.end() && it->second != wanted) {
      throw Error(ErrorCode::ParseError,
                  header_path.string() + ": unsupported " + key + " = " + it->second);
    }
  };

  if (require("ObjectType") != "Image") {
    throw Error(ErrorCode::ParseError, header_path.string() + ": ObjectType must be Image");
  }
  if (require("NDims") != "3") {
    throw Error(ErrorCode::ParseError, header_path.string() + ": NDims must be 3");
  }
  expect("BinaryData", "True");
  expect("BinaryDataByteOrderMSB", "False");
  expect("ElementByteOrderMSB", "False");
  expect("CompressedData", "False");
  expect("ElementNumberOfChannels", "1");

  const auto dim_tokens = split_ws(require("DimSize"));
  const auto spacing_tokens = split_ws(require("ElementSpacing"));
  if (dim_tokens.size() != 3 || spacing_tokens.size() != 3) {
    throw Error(ErrorCode::ParseError, header_path.string() + ": DimSize/ElementSpacing need 3 values");
  }
  GridMeta::Dims dims{};
  GridMeta::Spacing spacing{};
  for (int a = 0; a < 3; ++a) {
    dims[a] = parse_number<std::size_t>(dim_tokens[a], "DimSize");
    spacing[a] = parse_number<double>(spacing_tokens[a], "ElementSpacing");
  }
  std::optional<GridMeta> meta;
  try {
    meta.emplace(dims, spacing);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, header_path.string() + ": " + e.what());
  }

  const std::string& type_name = require("ElementType");
  ElementType type;
  if (type_name == "MET_FLOAT") {
    type = ElementType::Float;
  } else if (type_name == "MET_UCHAR") {
    type = ElementType::UChar;
  } else {
    throw Error(ErrorCode::ParseError, header_path.string() + ": unsupported ElementType " + type_name);
  }

  const std::string& data_name = require("ElementDataFile");
  if (data_name == "LOCAL" || data_name.empty()) {
    throw Error(ErrorCode::ParseError, header_path.string() + ": ElementDataFile must name a file");
  }
  fs::path data_file = data_name;
  if (data_file.is_relative()) data_file = header_path.parent_path() / data_file;
  return {*meta, type, data_file};
}

std::string read_payload(const fs::path& path) { return read_text_file(path); }

fs::path raw_path_for(const fs::path& header_path) {
  fs::path raw = header_path;
  raw.replace_extension(".raw");
  if (raw == header_path) raw += ".raw";
  return raw;
}

std::string header_text(const GridMeta& meta, const char* element_type, const fs::path& raw) {
  std::string h;
  h += "ObjectType = Image\n";
  h += "NDims = 3\n";
  h += "BinaryData = True\n";
  h += "BinaryDataByteOrderMSB = False\n";
  h += "CompressedData = False\n";
  h += "DimSize = " + std::to_string(meta.nx()) + " " + std::to_string(meta.ny()) + " " +
       std::to_string(meta.nz()) + "\n";
  const auto& s = meta.spacing();
  h += "ElementSpacing = " + shortest(s[0]) + " " + shortest(s[1]) + " " + shortest(s[2]) + "\n";
  h += std::string("ElementType = ") + element_type + "\n";
  h += "ElementDataFile = " + raw.filename().string() + "\n";
  return h;
}

}  // namespace

Volume read_volume(const fs::path& header_path) {
  const Header header = parse_header(header_path);
  const std::string payload = read_payload(header.data_file);
  const std::size_t count = header.meta.voxel_count();

  if (header.type == ElementType::UChar) {
    if (payload.size() != count) {
      throw Error(ErrorCode::PayloadSizeMismatch, header.data_file.string() + ": expected " +
                                                      std::to_string(count) + " bytes, found " +
                                                      std::to_string(payload.size()));
    }
    std::vector<std::uint8_t> labels(payload.begin(), payload.end());
    for (std::size_t n = 0; n < count; ++n) {
      if (labels[n] > 1) {
        throw Error(ErrorCode::ParseError, header.data_file.string() + ": invalid mask label " +
                                               std::to_string(labels[n]) + " at voxel " +
                                               std::to_string(n));
      }
    }
    return BinaryMask(header.meta, std::move(labels));
  }

  if (payload.size() != 4 * count) {
    throw Error(ErrorCode::PayloadSizeMismatch, header.data_file.string() + ": expected " +
                                                    std::to_string(4 * count) + " bytes, found " +
                                                    std::to_string(payload.size()));
  }
  std::vector<float> values(count);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t n = 0; n < count; ++n) {
    const unsigned char* b = bytes + 4 * n;
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                               static_cast<std::uint32_t>(b[1]) << 8 |
                               static_cast<std::uint32_t>(b[2]) << 16 |
                               static_cast<std::uint32_t>(b[3]) << 24;
    float v = std::bit_cast<float>(bits);
    if (!(v >= 0.0f && v <= 1.0f)) {
      const double dv = v;
      if (!(dv >= -kProbabilityReadTolerance && dv <= 1.0 + kProbabilityReadTolerance)) {
        throw Error(ErrorCode::ValueOutOfRange, header.data_file.string() + ": probability " +
                                                    std::to_string(dv) + " at voxel " +
                                                    std::to_string(n));
      }
      v = std::clamp(v, 0.0f, 1.0f);
    }
    values[n] = v;
  }
  return ScalarVolume(header.meta, std::move(values));
}

ScalarVolume read_probability_map(const fs::path& header_path) {
  Volume v = read_volume(header_path);
  if (auto* map = std::get_if<ScalarVolume>(&v)) return std::move(*map);
  throw Error(ErrorCode::ParseError, header_path.string() + ": expected MET_FLOAT probabilities");
}

BinaryMask read_mask(const fs::path& header_path) {
  Volume v = read_volume(header_path);
  if (auto* mask = std::get_if<BinaryMask>(&v)) return std::move(*mask);
  throw Error(ErrorCode::ParseError, header_path.string() + ": expected MET_UCHAR mask");
}

void write_volume(const ScalarVolume& volume, const fs::path& header_path) {
  const fs::path raw = raw_path_for(header_path);
  const auto values = volume.values();
  std::string payload(4 * values.size(), '\0');
  for (std::size_t n = 0; n < values.size(); ++n) {
    const auto bits = std::bit_cast<std::uint32_t>(values[n]);
    for (int b = 0; b < 4; ++b) payload[4 * n + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  write_text_file(raw, payload);
  write_text_file(header_path, header_text(volume.meta(), "MET_FLOAT", raw));
}

void write_volume(const BinaryMask& mask, const fs::path& header_path) {
  const fs::path raw = raw_path_for(header_path);
  const auto labels = mask.labels();
  write_text_file(raw, std::string(labels.begin(), labels.end()));
  write_text_file(header_path, header_text(mask.meta(), "MET_UCHAR", raw));
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::string_view to_string(Split split) { return split == Split::Train ? "train" : "test"; }

Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("manifest is not valid JSON: ") + e.what());
  }
  const auto schema = [](const std::string& msg) { return Error(ErrorCode::SchemaError, msg); };
  if (!doc.is_object()) throw schema("manifest must be a JSON object");

  Manifest manifest;
  try {
    manifest.dataset = doc.value("dataset", std::string("dataset"));
    if (!doc.contains("cases") || !doc["cases"].is_array()) throw schema("manifest needs a 'cases' array");
    if (doc["cases"].empty()) throw schema("manifest has no cases");

    std::set<std::string> seen;
    std::size_t member_count = 0;
    for (const json& c : doc["cases"]) {
      if (!c.is_object()) throw schema("every case must be an object");
      CaseManifest cm;
      cm.case_id = c.at("case_id").get<std::string>();
      if (cm.case_id.empty() || cm.case_id.find_first_of(",\n\r/\\") != std::string::npos) {
        throw schema("case_id '" + cm.case_id + "' is empty or contains , / \\ or newlines");
      }
      if (!seen.insert(cm.case_id).second) {
        throw Error(ErrorCode::DuplicateCase, "case_id '" + cm.case_id + "' appears twice");
      }
      const std::string split = c.value("split", std::string("test"));
      if (split == "train") {
        cm.split = Split::Train;
      } else if (split == "test") {
        cm.split = Split::Test;
      } else {
        throw schema("case '" + cm.case_id + "': split must be train or test");
      }
      const auto resolve = [&](const std::string& p) {
        fs::path path = p;
        return path.is_relative() ? (base_dir / path).lexically_normal() : path.lexically_normal();
      };
      cm.ground_truth = resolve(c.at("ground_truth").get<std::string>());
      for (const json& m : c.at("segmenter_maps")) cm.segmenter_maps.push_back(resolve(m.get<std::string>()));
      if (cm.segmenter_maps.size() < 2) {
        throw schema("case '" + cm.case_id + "' has fewer than two segmenter maps");
      }
      if (member_count == 0) member_count = cm.segmenter_maps.size();
      if (cm.segmenter_maps.size() != member_count) {
        throw schema("case '" + cm.case_id + "' has a different number of segmenter maps");
      }
      std::set<fs::path> paths(cm.segmenter_maps.begin(), cm.segmenter_maps.end());
      paths.insert(cm.ground_truth);
      if (paths.size() != cm.segmenter_maps.size() + 1) {
        throw schema("case '" + cm.case_id + "' repeats a file path");
      }
      manifest.cases.push_back(std::move(cm));
    }

    if (doc.contains("segmenter_names")) {
      manifest.segmenter_names = doc["segmenter_names"].get<std::vector<std::string>>();
      if (manifest.segmenter_names.size() != member_count) {
        throw schema("segmenter_names must list one name per segmenter map");
      }
      std::set<std::string> names(manifest.segmenter_names.begin(), manifest.segmenter_names.end());
      if (names.size() != member_count) throw schema("segmenter_names must be distinct");
    } else {
      for (std::size_t m = 0; m < member_count; ++m) {
        manifest.segmenter_names.push_back("seg" + std::to_string(m + 1));
      }
    }
  } catch (const json::exception& e) {
    throw schema(std::string("manifest field error: ") + e.what());
  }
  return manifest;
}

Manifest load_manifest(const fs::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
  using nlohmann::ordered_json;
  const fs::path base = path.parent_path();
  const auto rel = [&](const fs::path& p) { return p.lexically_relative(base).generic_string(); };
  ordered_json doc;
  doc["dataset"] = manifest.dataset;
  doc["segmenter_names"] = manifest.segmenter_names;
  ordered_json cases = ordered_json::array();
  for (const CaseManifest& c : manifest.cases) {
    ordered_json entry;
    entry["case_id"] = c.case_id;
    entry["split"] = std::string(to_string(c.split));
    entry["ground_truth"] = rel(c.ground_truth);
    ordered_json maps = ordered_json::array();
    for (const auto& m : c.segmenter_maps) maps.push_back(rel(m));
    entry["segmenter_maps"] = maps;
    cases.push_back(entry);
  }
  doc["cases"] = cases;
  write_text_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kResultsHeader = "case_id,method,DICE,RAVD,ASSD,MSSD";
constexpr const char* kMeansHeader = "method,DICE,RAVD,ASSD,MSSD";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void check_field(const std::string& s) {
  if (s.empty() || s.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "table field '" + s + "' is empty or has , or newlines");
  }
}

std::string metric_columns(const MetricVector& v) {
  return format_fixed(v[0], 4) + "," + format_fixed(v[1], 4) + "," + format_fixed(v[2], 4) + "," +
         format_fixed(v[3], 4);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header,
                                               std::size_t columns) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw Error(ErrorCode::ParseError, path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != columns) {
      throw Error(ErrorCode::ParseError, path.string() + ": malformed row '" + line + "'");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

void write_results(std::vector<ResultRow> rows, const fs::path& path) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.case_id, a.method) < std::tie(b.case_id, b.method);
  });
  std::string text = std::string(kResultsHeader) + "\n";
  for (const ResultRow& r : rows) {
    check_field(r.case_id);
    check_field(r.method);
    text += r.case_id + "," + r.method + "," + metric_columns(to_vector(r.metrics)) + "\n";
  }
  write_text_file(path, text);
}

std::vector<ResultRow> read_results(const fs::path& path) {
  std::vector<ResultRow> rows;
  for (const auto& f : read_csv(path, kResultsHeader, 6)) {
    ResultRow r;
    r.case_id = f[0];
    r.method = f[1];
    r.metrics.dice = parse_number<double>(f[2], "DICE");
    r.metrics.ravd_percent = parse_number<double>(f[3], "RAVD");
    r.metrics.assd_mm = parse_number<double>(f[4], "ASSD");
    r.metrics.mssd_mm = parse_number<double>(f[5], "MSSD");
    rows.push_back(std::move(r));
  }
  return rows;
}

MethodMeans mean_by_method(const std::vector<ResultRow>& rows) {
  std::map<std::string, std::pair<MetricVector, std::size_t>> sums;
  for (const ResultRow& r : rows) {
    auto& [sum, count] = sums[r.method];
    const MetricVector v = to_vector(r.metrics);
    for (std::size_t m = 0; m < v.size(); ++m) sum[m] += v[m];
    ++count;
  }
  MethodMeans means;
  for (const auto& [method, entry] : sums) {
    MetricVector mean = entry.first;
    for (double& v : mean) v /= static_cast<double>(entry.second);
    means[method] = mean;
  }
  return means;
}

void write_means(const MethodMeans& means, const fs::path& path) {
  std::string text = std::string(kMeansHeader) + "\n";
  for (const auto& [method, v] : means) {
    check_field(method);
    text += method + "," + metric_columns(v) + "\n";
  }
  write_text_file(path, text);
}

MethodMeans read_means(const fs::path& path) {
  MethodMeans means;
  for (const auto& f : read_csv(path, kMeansHeader, 5)) {
    MetricVector v{};
    for (std::size_t m = 0; m < 4; ++m) v[m] = parse_number<double>(f[m + 1], "metric");
    means[f[0]] = v;
  }
  return means;
}

}  // namespace segfuse
