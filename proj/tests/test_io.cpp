#include <cstring>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "segfuse/error.hpp"
#include "segfuse/io.hpp"
#include "temp_dir.hpp"

using namespace segfuse;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

void write_bytes(const fs::path& path, const std::string& bytes) { write_text_file(path, bytes); }

std::string float_header(const std::string& dims, const std::string& data) {
  return "ObjectType = Image\nNDims = 3\nBinaryData = True\nBinaryDataByteOrderMSB = False\n"
         "CompressedData = False\nDimSize = " +
         dims + "\nElementSpacing = 1 1 1\nElementType = MET_FLOAT\nElementDataFile = " + data + "\n";
}

}  // namespace

TEST_CASE("volume round-trip is bit exact") {
  TempDir dir("io_roundtrip");
  const GridMeta g({5, 3, 2}, {0.7, 0.7, 2.5});
  const ScalarVolume v = oracle::random_volume(g, 4);
  write_volume(v, dir / "map.mhd");
  CHECK(fs::exists(dir / "map.raw"));
  const ScalarVolume back = read_probability_map(dir / "map.mhd");
  CHECK(back.meta() == g);
  CHECK(oracle::same(back.values(), v.values()));

  const BinaryMask m = oracle::random_mask(g, 0.5, 4);
  write_volume(m, dir / "mask.mhd");
  const BinaryMask mb = read_mask(dir / "mask.mhd");
  CHECK(mb.meta() == g);
  CHECK(oracle::same(mb.labels(), m.labels()));
  CHECK(std::holds_alternative<BinaryMask>(read_volume(dir / "mask.mhd")));
  CHECK(code_of([&] { read_mask(dir / "map.mhd"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { read_probability_map(dir / "mask.mhd"); }) == ErrorCode::ParseError);

  // Re-writing what was read gives identical files.
  write_volume(back, dir / "again.mhd");
  CHECK(read_text_file(dir / "again.raw") == read_text_file(dir / "map.raw"));
}

TEST_CASE("header layout") {
  TempDir dir("io_header");
  write_volume(BinaryMask(GridMeta({2, 3, 4}, {0.5, 1, 1.25})), dir / "m.mhd");
  CHECK(read_text_file(dir / "m.mhd") ==
        "ObjectType = Image\nNDims = 3\nBinaryData = True\nBinaryDataByteOrderMSB = False\n"
        "CompressedData = False\nDimSize = 2 3 4\nElementSpacing = 0.5 1 1.25\n"
        "ElementType = MET_UCHAR\nElementDataFile = m.raw\n");
}

TEST_CASE("hand-written little-endian payload decodes") {
  TempDir dir("io_hand");
  write_text_file(dir / "h.mhd", float_header("2 1 1", "h.raw"));
  // 0.25f = 0x3E800000, 1.0f = 0x3F800000, little-endian.
  write_bytes(dir / "h.raw", std::string("\x00\x00\x80\x3E\x00\x00\x80\x3F", 8));
  const ScalarVolume v = read_probability_map(dir / "h.mhd");
  CHECK(v[0] == 0.25f);
  CHECK(v[1] == 1.0f);
}

TEST_CASE("malformed volumes") {
  TempDir dir("io_bad");
  const GridMeta g({2, 2, 2}, {1, 1, 1});
  write_volume(ScalarVolume(g, 0.5f), dir / "v.mhd");

  SUBCASE("short payload") {
    write_bytes(dir / "v.raw", std::string(7 * 4, '\0'));
    CHECK(code_of([&] { read_volume(dir / "v.mhd"); }) == ErrorCode::PayloadSizeMismatch);
  }
  SUBCASE("mask label 2") {
    write_volume(BinaryMask(g), dir / "m.mhd");
    std::string bytes(8, '\0');
    bytes[5] = 2;
    write_bytes(dir / "m.raw", bytes);
    CHECK(code_of([&] { read_mask(dir / "m.mhd"); }) == ErrorCode::ParseError);
  }
  SUBCASE("probabilities out of range") {
    std::string bytes(32, '\0');
    const float big = 1.5f, tiny_over = 1.0000005f;
    std::memcpy(bytes.data() + 4, &big, 4);
    write_bytes(dir / "v.raw", bytes);
    CHECK(code_of([&] { read_volume(dir / "v.mhd"); }) == ErrorCode::ValueOutOfRange);
    std::memcpy(bytes.data() + 4, &tiny_over, 4);
    write_bytes(dir / "v.raw", bytes);
    CHECK(read_probability_map(dir / "v.mhd")[1] == 1.0f);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + 4, &nan, 4);
    write_bytes(dir / "v.raw", bytes);
    CHECK(code_of([&] { read_volume(dir / "v.mhd"); }) == ErrorCode::ValueOutOfRange);
  }
  SUBCASE("header problems") {
    write_text_file(dir / "x.mhd", "ObjectType = Image\nNDims = 2\n");
    CHECK(code_of([&] { read_volume(dir / "x.mhd"); }) == ErrorCode::ParseError);
    write_text_file(dir / "x.mhd", float_header("2 2", "v.raw"));
    CHECK(code_of([&] { read_volume(dir / "x.mhd"); }) == ErrorCode::ParseError);
    write_text_file(dir / "x.mhd", float_header("2 2 2", "LOCAL"));
    CHECK(code_of([&] { read_volume(dir / "x.mhd"); }) == ErrorCode::ParseError);
    std::string msb = float_header("2 2 2", "v.raw");
    msb.replace(msb.find("MSB = False"), 11, "MSB = True");
    write_text_file(dir / "x.mhd", msb);
    CHECK(code_of([&] { read_volume(dir / "x.mhd"); }) == ErrorCode::ParseError);
    std::string dbl = float_header("2 2 2", "v.raw");
    dbl.replace(dbl.find("MET_FLOAT"), 9, "MET_DOUBLE");
    write_text_file(dir / "x.mhd", dbl);
    CHECK(code_of([&] { read_volume(dir / "x.mhd"); }) == ErrorCode::ParseError);
  }
  SUBCASE("missing files") {
    CHECK(code_of([&] { read_volume(dir / "nope.mhd"); }) == ErrorCode::IoFailure);
    fs::remove(dir / "v.raw");
    CHECK(code_of([&] { read_volume(dir / "v.mhd"); }) == ErrorCode::IoFailure);
  }
}

TEST_CASE("manifest parsing") {
  const fs::path base = "/data/run";
  const std::string ok = R"({
    "dataset": "liver",
    "segmenter_names": ["a", "b"],
    "cases": [
      {"case_id": "c1", "split": "train", "ground_truth": "c1/gt.mhd", "segmenter_maps": ["c1/a.mhd", "c1/b.mhd"]},
      {"case_id": "c2", "ground_truth": "/abs/gt.mhd", "segmenter_maps": ["x.mhd", "y.mhd"]}
    ]})";
  const Manifest m = parse_manifest(ok, base);
  CHECK(m.dataset == "liver");
  CHECK(m.segmenter_names == std::vector<std::string>{"a", "b"});
  REQUIRE(m.cases.size() == 2);
  CHECK(m.cases[0].split == Split::Train);
  CHECK(m.cases[1].split == Split::Test);
  CHECK(m.cases[0].ground_truth == fs::path("/data/run/c1/gt.mhd"));
  CHECK(m.cases[1].ground_truth == fs::path("/abs/gt.mhd"));

  const auto schema_code = [&](const std::string& text) {
    return code_of([&] { parse_manifest(text, base); });
  };
  CHECK(schema_code("[1]") == ErrorCode::SchemaError);
  CHECK(schema_code("{not json") == ErrorCode::SchemaError);
  CHECK(schema_code(R"({"cases": []})") == ErrorCode::SchemaError);
  CHECK(schema_code(R"({"cases": [{"case_id": "c", "ground_truth": "g", "segmenter_maps": ["a"]}]})") ==
        ErrorCode::SchemaError);
  CHECK(schema_code(R"({"cases": [{"case_id": "c", "ground_truth": "g", "segmenter_maps": ["a", "a"]}]})") ==
        ErrorCode::SchemaError);
  CHECK(schema_code(R"({"cases": [{"case_id": "c", "split": "val", "ground_truth": "g", "segmenter_maps": ["a", "b"]}]})") ==
        ErrorCode::SchemaError);
  CHECK(schema_code(R"({"cases": [{"case_id": "c,1", "ground_truth": "g", "segmenter_maps": ["a", "b"]}]})") ==
        ErrorCode::SchemaError);
  CHECK(schema_code(R"({"cases": [
      {"case_id": "c", "ground_truth": "g", "segmenter_maps": ["a", "b"]},
      {"case_id": "d", "ground_truth": "g", "segmenter_maps": ["a", "b", "e"]}]})") == ErrorCode::SchemaError);
  CHECK(schema_code(R"({"cases": [
      {"case_id": "c", "ground_truth": "g", "segmenter_maps": ["a", "b"]},
      {"case_id": "c", "ground_truth": "g", "segmenter_maps": ["a", "b"]}]})") == ErrorCode::DuplicateCase);
  CHECK(schema_code(R"({"segmenter_names": ["p", "p"],
      "cases": [{"case_id": "c", "ground_truth": "g", "segmenter_maps": ["a", "b"]}]})") == ErrorCode::SchemaError);

  const Manifest d = parse_manifest(R"({"cases": [{"case_id": "c", "ground_truth": "g", "segmenter_maps": ["a", "b", "c"]}]})", base);
  CHECK(d.segmenter_names == std::vector<std::string>{"seg1", "seg2", "seg3"});
}

TEST_CASE("manifest write then load") {
  TempDir dir("io_manifest");
  Manifest m;
  m.dataset = "demo";
  m.segmenter_names = {"u", "v"};
  m.cases.push_back({"c01", dir.path() / "c01/truth.mhd", {dir.path() / "c01/seg1.mhd", dir.path() / "c01/seg2.mhd"}, Split::Train});
  m.cases.push_back({"c02", dir.path() / "c02/truth.mhd", {dir.path() / "c02/seg1.mhd", dir.path() / "c02/seg2.mhd"}, Split::Test});
  write_manifest(m, dir / "manifest.json");
  CHECK(read_text_file(dir / "manifest.json").find("\"c01/truth.mhd\"") != std::string::npos);
  const Manifest back = load_manifest(dir / "manifest.json");
  CHECK(back.dataset == m.dataset);
  CHECK(back.segmenter_names == m.segmenter_names);
  REQUIRE(back.cases.size() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(back.cases[c].case_id == m.cases[c].case_id);
    CHECK(back.cases[c].split == m.cases[c].split);
    CHECK(back.cases[c].ground_truth == m.cases[c].ground_truth.lexically_normal());
    CHECK(back.cases[c].segmenter_maps == m.cases[c].segmenter_maps);
  }
}

TEST_CASE("results and means tables") {
  TempDir dir("io_results");
  std::vector<ResultRow> rows = {
      {"c2", "average", {0.9, 1.5, 0.25, 3.0, false}},
      {"c1", "seg1", {0.81234, -0.0, 1.0, 2.0, false}},
      {"c1", "average", {0.95, 2.5, 0.5, 4.0, false}},
  };
  write_results(rows, dir / "r.csv");
  CHECK(read_text_file(dir / "r.csv") ==
        "case_id,method,DICE,RAVD,ASSD,MSSD\n"
        "c1,average,0.9500,2.5000,0.5000,4.0000\n"
        "c1,seg1,0.8123,0.0000,1.0000,2.0000\n"
        "c2,average,0.9000,1.5000,0.2500,3.0000\n");
  const auto back = read_results(dir / "r.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[1].metrics.dice == 0.8123);

  const MethodMeans means = mean_by_method(back);
  CHECK(means.at("average")[0] == doctest::Approx(0.925));
  CHECK(means.at("average")[3] == doctest::Approx(3.5));
  write_means(means, dir / "m.csv");
  CHECK(read_text_file(dir / "m.csv") ==
        "method,DICE,RAVD,ASSD,MSSD\naverage,0.9250,2.0000,0.3750,3.5000\nseg1,0.8123,0.0000,1.0000,2.0000\n");
  CHECK(read_means(dir / "m.csv").at("seg1")[2] == 1.0);

  write_text_file(dir / "bad.csv", "case,method\n");
  CHECK(code_of([&] { read_results(dir / "bad.csv"); }) == ErrorCode::ParseError);
  write_text_file(dir / "bad.csv", "case_id,method,DICE,RAVD,ASSD,MSSD\nc1,a,0.5,x,1,1\n");
  CHECK(code_of([&] { read_results(dir / "bad.csv"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { write_results({{"a,b", "m", {}}}, dir / "x.csv"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("fixed formatting") {
  CHECK(format_fixed(0.12346, 4) == "0.1235");
  CHECK(format_fixed(-0.00001, 4) == "0.0000");
  CHECK(format_fixed(2.0, 2) == "2.00");
}
