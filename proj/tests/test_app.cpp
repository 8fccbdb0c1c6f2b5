#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "segfuse/app.hpp"
#include "segfuse/error.hpp"
#include "segfuse/synth.hpp"
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

SynthOptions small_synth(const fs::path& dir, std::size_t cases, std::size_t train) {
  SynthOptions o;
  o.output_dir = dir;
  o.cases = cases;
  o.train_cases = train;
  o.grid = GridMeta({20, 20, 12}, {1.0, 1.0, 1.5});
  o.seed = 5;
  return o;
}

}  // namespace

TEST_CASE("run config parsing") {
  const RunConfig d = parse_run_config(R"({"manifest": "m.json"})", "/cfg");
  CHECK(d.manifest == fs::path("/cfg/m.json"));
  CHECK(d.combiners.size() == 4);
  CHECK(d.smoothing);
  CHECK_FALSE(d.prior);
  CHECK(d.alpha == 0.05);
  CHECK(d.paired);
  CHECK(d.jobs == 1);

  const RunConfig c = parse_run_config(
      R"({"manifest": "/m.json", "combiners": ["product", "average"], "smoothing": false,
          "prior": 0.07, "alpha": 0.01, "output_dir": "out", "paired": false, "jobs": 3})",
      "/cfg");
  CHECK(c.combiners == std::vector<CombinerKind>{CombinerKind::Product, CombinerKind::Average});
  CHECK_FALSE(c.smoothing);
  CHECK(c.prior == 0.07);
  CHECK(c.output_dir == fs::path("/cfg/out"));
  CHECK_FALSE(c.paired);
  CHECK(c.jobs == 3);
  CHECK_FALSE(parse_run_config(R"({"manifest": "m", "prior": "estimate"})", "/").prior);

  for (const char* bad : {R"({})", R"({"manifest": "m", "colour": 1})", R"({"manifest": "m", "alpha": 1.5})",
                          R"({"manifest": "m", "prior": 0})", R"({"manifest": "m", "prior": "guess"})",
                          R"({"manifest": "m", "combiners": []})", R"({"manifest": "m", "combiners": ["median"]})",
                          R"({"manifest": "m", "combiners": ["average", "average"]})",
                          R"({"manifest": "m", "jobs": 0})", R"({"manifest": 3})", "not json"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { parse_run_config(bad, "/"); }) == ErrorCode::SchemaError);
  }
}

TEST_CASE("prior resolution") {
  TempDir dir("app_prior");
  run_synth(small_synth(dir.path(), 3, 2));
  const Manifest m = load_manifest(dir / "manifest.json");
  RunConfig config;
  config.manifest = dir / "manifest.json";
  config.prior = 0.2;
  CHECK(resolve_prior(config, m).value() == 0.2);
  config.prior.reset();
  std::vector<BinaryMask> truths = {read_mask(m.cases[0].ground_truth), read_mask(m.cases[1].ground_truth)};
  CHECK(resolve_prior(config, m).value() == estimate_prior(truths).value());

  Manifest test_only = m;
  for (auto& c : test_only.cases) c.split = Split::Test;
  CHECK(code_of([&] { resolve_prior(config, test_only); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("evaluate_methods rows") {
  const GridMeta g({20, 20, 12}, {1, 1, 1.5});
  const SyntheticCase sc = make_synthetic_case(g, 1, 0, default_segmenter_profiles());
  const std::vector<std::string> names = {"a", "b", "c", "d"};
  const auto rows = evaluate_methods("x", sc.truth, sc.maps, names, {CombinerKind::Average, CombinerKind::MinMax},
                                     ForegroundPrior(0.5), true);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].method == "a");
  CHECK(rows[4].method == "average");
  CHECK(rows[5].method == "minmax");
  CHECK(rows[0].metrics.dice == evaluate_case(binarize(smooth_box3(sc.maps[0])), sc.truth).dice);
  const auto raw = evaluate_methods("x", sc.truth, sc.maps, names, {}, ForegroundPrior(0.5), false);
  CHECK(raw[1].metrics.dice == evaluate_case(binarize(sc.maps[1]), sc.truth).dice);
  CHECK(code_of([&] { evaluate_methods("x", sc.truth, sc.maps, {"a"}, {}, ForegroundPrior(0.5), true); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("compare_methods orientation and completeness") {
  std::vector<ResultRow> rows;
  for (int c = 0; c < 12; ++c) {
    const std::string id = "c" + std::to_string(c);
    const double jitter = 0.001 * ((c * 7) % 5);
    rows.push_back({id, "seg1", {0.80 + jitter, 10.0 + c, 3.0 + jitter, 20.0 + c, false}});
    rows.push_back({id, "average", {0.90 + jitter * 1.3, 2.0 + c * 0.5, 1.0 + jitter, 5.0, false}});
  }
  const auto out = compare_methods("d", rows, 0.05, true);
  REQUIRE(out.size() == 4);
  for (const auto& r : out) {
    CAPTURE(r.key.metric);
    CHECK(r.key.member == "seg1");
    CHECK(r.key.ensemble == "average");
    CHECK(r.verdict == Verdict::EnsembleWins);
  }
  rows.pop_back();
  CHECK(code_of([&] { compare_methods("d", rows, 0.05, true); }) == ErrorCode::IncompleteTable);
  std::vector<ResultRow> members_only = {{"c", "seg1", {}}, {"c", "seg2", {}}};
  CHECK(code_of([&] { compare_methods("d", members_only, 0.05, true); }) == ErrorCode::IncompleteTable);
}

TEST_CASE("synth, combine and evaluate end to end") {
  TempDir dir("app_e2e");
  const fs::path data = dir / "data";
  CHECK(run_synth(small_synth(data, 6, 3)).exit_code() == 0);
  const Manifest m = load_manifest(data / "manifest.json");
  REQUIRE(m.cases.size() == 6);
  CHECK(m.cases[0].case_id == "case00");
  CHECK(m.cases[2].split == Split::Train);
  CHECK(m.cases[3].split == Split::Test);
  CHECK(m.segmenter_names.size() == 4);

  RunConfig config;
  config.manifest = data / "manifest.json";
  config.output_dir = dir / "out";
  config.jobs = 3;
  const CommandStatus combined = run_combine(config);
  CHECK(combined.exit_code() == 0);
  CHECK(fs::exists(dir / "out/case04/product_mask.mhd"));
  CHECK(fs::exists(dir / "out/case04/product_support.mhd"));
  CHECK(fs::exists(dir / "out/case04/majority_mask.mhd"));
  CHECK_FALSE(fs::exists(dir / "out/case04/majority_support.mhd"));

  const CommandStatus evaluated = run_evaluate(config);
  CHECK(evaluated.exit_code() == 0);
  const auto test_rows = read_results(dir / "out/results_test.csv");
  CHECK(test_rows.size() == 3 * 8);
  CHECK(read_results(dir / "out/results_train.csv").size() == 3 * 8);
  const MethodMeans means = read_means(dir / "out/means_test.csv");
  CHECK(means.size() == 8);
  const MethodMeans recomputed = mean_by_method(test_rows);
  for (const auto& [method, v] : recomputed) {
    for (int k = 0; k < 4; ++k) CHECK(std::abs(means.at(method)[k] - v[k]) <= 5e-5);
  }

  // Parallel and serial runs agree byte for byte.
  RunConfig serial = config;
  serial.jobs = 1;
  serial.output_dir = dir / "serial";
  run_evaluate(serial);
  CHECK(read_text_file(dir / "serial/results_test.csv") == read_text_file(dir / "out/results_test.csv"));

  CHECK(run_report(dir / "out/means_train.csv", dir / "out/means_test.csv", "demo", dir / "rep").exit_code() == 0);
  CHECK(fs::exists(dir / "rep/glyph.svg"));
  CHECK(fs::exists(dir / "rep/overfit.html"));

  // A missing map fails only that case.
  fs::remove(data / "case05/seg2.raw");
  const CommandStatus partial = run_evaluate(config);
  CHECK(partial.exit_code() == 2);
  REQUIRE(partial.errors.size() == 1);
  CHECK(partial.errors[0].rfind("case05", 0) == 0);
  CHECK(read_results(dir / "out/results_test.csv").size() == 2 * 8);
}

TEST_CASE("compare writes verdicts and scores") {
  TempDir dir("app_compare");
  std::vector<ResultRow> rows;
  for (int c = 0; c < 10; ++c) {
    const std::string id = "c" + std::to_string(c);
    rows.push_back({id, "seg1", {0.8 + 0.01 * c, 5.0 + c, 2.0 + 0.1 * c, 10.0 + c, false}});
    rows.push_back({id, "average", {0.9 + 0.011 * c, 1.0 + 0.5 * c, 1.0 + 0.05 * c, 4.0 + 0.3 * c, false}});
  }
  write_results(rows, dir / "r.csv");
  CHECK(run_compare({{"d", dir / "r.csv"}}, 0.05, true, dir / "cmp").exit_code() == 0);
  CHECK(read_text_file(dir / "cmp/scores.csv") == "ensemble,score\naverage,4\n");
  const std::string cmp = read_text_file(dir / "cmp/comparisons.csv");
  CHECK(cmp.rfind("dataset,metric,member,ensemble,test,p_value,verdict\n", 0) == 0);
  CHECK(std::count(cmp.begin(), cmp.end(), '\n') == 5);
}

TEST_CASE("segmenter names may not shadow combiners") {
  TempDir dir("app_names");
  run_synth(small_synth(dir.path(), 2, 1));
  Manifest m = load_manifest(dir / "manifest.json");
  m.segmenter_names[0] = "average";
  write_manifest(m, dir / "manifest.json");
  RunConfig config;
  config.manifest = dir / "manifest.json";
  config.output_dir = dir / "out";
  CHECK(code_of([&] { run_evaluate(config); }) == ErrorCode::SchemaError);
}
