#include "segfuse/app.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"
#include "segfuse/error.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/report.hpp"
#include "segfuse/synth.hpp"

namespace segfuse {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void validate(const RunConfig& config) {
  if (config.manifest.empty()) throw Error(ErrorCode::SchemaError, "config needs a manifest path");
  if (config.combiners.empty()) throw Error(ErrorCode::SchemaError, "config lists no combiners");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error(ErrorCode::SchemaError, "alpha must lie in (0, 1)");
  }
  if (config.prior && !(*config.prior > 0.0 && *config.prior < 1.0)) {
    throw Error(ErrorCode::SchemaError, "prior must lie in (0, 1)");
  }
  if (config.jobs == 0) throw Error(ErrorCode::SchemaError, "jobs must be at least 1");
}

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
  using nlohmann::json;
  static const std::set<std::string> known = {"manifest", "combiners", "smoothing", "prior",
                                              "alpha",    "output_dir", "paired",   "jobs"};
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!known.contains(item.key())) {
      throw Error(ErrorCode::SchemaError, "unknown config key '" + item.key() + "'");
    }
  }

  RunConfig config;
  const auto resolve = [&](const std::string& p) {
    fs::path path = p;
    return path.is_relative() ? (base_dir / path).lexically_normal() : path;
  };
  try {
    if (doc.contains("manifest")) config.manifest = resolve(doc["manifest"].get<std::string>());
    if (doc.contains("output_dir")) config.output_dir = resolve(doc["output_dir"].get<std::string>());
    if (doc.contains("combiners")) {
      config.combiners.clear();
      for (const auto& name : doc["combiners"]) {
        const CombinerKind kind = parse_combiner(name.get<std::string>());
        if (std::find(config.combiners.begin(), config.combiners.end(), kind) != config.combiners.end()) {
          throw Error(ErrorCode::SchemaError, "combiner listed twice");
        }
        config.combiners.push_back(kind);
      }
    }
    if (doc.contains("smoothing")) config.smoothing = doc["smoothing"].get<bool>();
    if (doc.contains("paired")) config.paired = doc["paired"].get<bool>();
    if (doc.contains("alpha")) config.alpha = doc["alpha"].get<double>();
    if (doc.contains("jobs")) config.jobs = doc["jobs"].get<std::size_t>();
    if (doc.contains("prior")) {
      const json& prior = doc["prior"];
      if (prior.is_string()) {
        if (prior.get<std::string>() != "estimate") {
          throw Error(ErrorCode::SchemaError, "prior must be \"estimate\" or a number");
        }
      } else {
        config.prior = prior.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("config field error: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    throw Error(ErrorCode::SchemaError, e.what());
  }
  validate(config);
  return config;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_text_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Compositions
// ---------------------------------------------------------------------------

namespace {

// Runs task(i) for i in [0, count) on up to `jobs` threads. Each task owns
// its result slot, so output order never depends on scheduling.
template <typename Task>
void for_each_index(std::size_t count, std::size_t jobs, Task task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
}

std::vector<ScalarVolume> load_maps(const CaseManifest& c) {
  std::vector<ScalarVolume> maps;
  maps.reserve(c.segmenter_maps.size());
  for (const auto& path : c.segmenter_maps) maps.push_back(read_probability_map(path));
  return maps;
}

void check_method_names(const Manifest& manifest) {
  for (const auto& name : manifest.segmenter_names) {
    for (CombinerKind kind : kAllCombiners) {
      if (name == to_string(kind)) {
        throw Error(ErrorCode::SchemaError, "segmenter name '" + name + "' clashes with a combiner");
      }
    }
  }
}

bool needs_prior(const RunConfig& config) {
  return std::find(config.combiners.begin(), config.combiners.end(), CombinerKind::Product) !=
         config.combiners.end();
}

struct CaseOutcome {
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
  std::string error;
};

}  // namespace

ForegroundPrior resolve_prior(const RunConfig& config, const Manifest& manifest) {
  if (config.prior) return ForegroundPrior(*config.prior);
  std::vector<BinaryMask> truths;
  for (const CaseManifest& c : manifest.cases) {
    if (c.split == Split::Train) truths.push_back(read_mask(c.ground_truth));
  }
  if (truths.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "prior estimation needs training cases; give an explicit prior instead");
  }
  return estimate_prior(truths);
}

std::vector<ResultRow> evaluate_methods(const std::string& case_id, const BinaryMask& truth,
                                        const std::vector<ScalarVolume>& maps,
                                        const std::vector<std::string>& segmenter_names,
                                        const std::vector<CombinerKind>& combiners,
                                        ForegroundPrior prior, bool smoothing) {
  if (segmenter_names.size() != maps.size()) {
    throw Error(ErrorCode::InvalidArgument, "one name per segmenter map is required");
  }
  std::vector<ResultRow> rows;
  for (std::size_t m = 0; m < maps.size(); ++m) {
    require_compatible(truth.meta(), maps[m].meta());
    const BinaryMask candidate = smoothing ? binarize(smooth_box3(maps[m]), 0.5) : binarize(maps[m], 0.5);
    rows.push_back({case_id, segmenter_names[m], evaluate_case(candidate, truth)});
  }
  for (CombinerKind kind : combiners) {
    const BinaryMask fused = fuse_case(maps, kind, prior, smoothing);
    rows.push_back({case_id, std::string(to_string(kind)), evaluate_case(fused, truth)});
  }
  return rows;
}

std::vector<ComparisonRow> compare_methods(const std::string& dataset,
                                           const std::vector<ResultRow>& rows, double alpha,
                                           bool paired, const LillieforsTable& table) {
  // method -> case -> metrics
  std::map<std::string, std::map<std::string, MetricSet>> by_method;
  std::set<std::string> cases;
  for (const ResultRow& r : rows) {
    if (!by_method[r.method].emplace(r.case_id, r.metrics).second) {
      throw Error(ErrorCode::DuplicateCase, "case '" + r.case_id + "' repeats for " + r.method);
    }
    cases.insert(r.case_id);
  }
  std::vector<std::string> members, ensembles;
  for (const auto& [method, per_case] : by_method) {
    if (per_case.size() != cases.size()) {
      throw Error(ErrorCode::IncompleteTable, "method '" + method + "' lacks some cases");
    }
    bool is_ensemble = false;
    for (CombinerKind kind : kAllCombiners) is_ensemble = is_ensemble || method == to_string(kind);
    (is_ensemble ? ensembles : members).push_back(method);
  }
  if (members.empty() || ensembles.empty()) {
    throw Error(ErrorCode::IncompleteTable, "comparison needs at least one segmenter and one ensemble");
  }

  std::vector<ComparisonRow> out;
  for (Metric metric : kAllMetrics) {
    for (const auto& member : members) {
      for (const auto& ensemble : ensembles) {
        std::vector<double> x, y;
        for (const auto& c : cases) {
          x.push_back(value_of(by_method[ensemble][c], metric));
          y.push_back(value_of(by_method[member][c], metric));
        }
        ComparisonRow row;
        row.key = {dataset, std::string(to_string(metric)), member, ensemble};
        row.result = paired ? compare_paired(x, y, alpha, higher_is_better(metric), table)
                            : compare_unpaired(x, y, alpha, higher_is_better(metric), table);
        row.verdict = row.result.better == Better::First    ? Verdict::EnsembleWins
                      : row.result.better == Better::Second ? Verdict::MemberWins
                                                            : Verdict::NoDifference;
        out.push_back(std::move(row));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

CommandStatus run_combine(const RunConfig& config) {
  validate(config);
  const Manifest manifest = load_manifest(config.manifest);
  // Without Product the prior is unused, so a missing training split is fine.
  const ForegroundPrior prior =
      needs_prior(config) ? resolve_prior(config, manifest) : ForegroundPrior(0.5);
  fs::create_directories(config.output_dir);

  std::vector<std::string> errors(manifest.cases.size());
  for_each_index(manifest.cases.size(), config.jobs, [&](std::size_t i) {
    const CaseManifest& c = manifest.cases[i];
    try {
      const auto maps = load_maps(c);
      const fs::path dir = config.output_dir / c.case_id;
      fs::create_directories(dir);
      for (CombinerKind kind : config.combiners) {
        const FusedCase fused = fuse_case_detailed(maps, kind, prior, config.smoothing);
        const std::string stem(to_string(kind));
        write_volume(fused.mask, dir / (stem + "_mask.mhd"));
        if (fused.support) write_volume(*fused.support, dir / (stem + "_support.mhd"));
      }
    } catch (const std::exception& e) {
      errors[i] = c.case_id + ": " + e.what();
    }
  });

  CommandStatus status;
  for (auto& e : errors) {
    if (!e.empty()) status.errors.push_back(std::move(e));
  }
  return status;
}

CommandStatus run_evaluate(const RunConfig& config) {
  validate(config);
  const Manifest manifest = load_manifest(config.manifest);
  check_method_names(manifest);
  const ForegroundPrior prior =
      needs_prior(config) ? resolve_prior(config, manifest) : ForegroundPrior(0.5);
  fs::create_directories(config.output_dir);

  std::vector<CaseOutcome> outcomes(manifest.cases.size());
  for_each_index(manifest.cases.size(), config.jobs, [&](std::size_t i) {
    const CaseManifest& c = manifest.cases[i];
    try {
      const BinaryMask truth = read_mask(c.ground_truth);
      const auto maps = load_maps(c);
      outcomes[i].rows = evaluate_methods(c.case_id, truth, maps, manifest.segmenter_names,
                                          config.combiners, prior, config.smoothing);
      for (const ResultRow& r : outcomes[i].rows) {
        if (r.metrics.degenerate) {
          outcomes[i].warnings.push_back(c.case_id + ": " + r.method +
                                         " produced an empty segmentation, distances set to the grid diagonal");
        }
      }
    } catch (const std::exception& e) {
      outcomes[i].error = c.case_id + ": " + e.what();
    }
  });

  CommandStatus status;
  std::vector<ResultRow> train, test;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (!o.error.empty()) status.errors.push_back(std::move(o.error));
    for (auto& w : o.warnings) status.warnings.push_back(std::move(w));
    auto& target = manifest.cases[i].split == Split::Train ? train : test;
    for (auto& r : o.rows) target.push_back(std::move(r));
  }
  write_results(train, config.output_dir / "results_train.csv");
  write_results(test, config.output_dir / "results_test.csv");
  // Means come from the rounded rows as written, so they can be recomputed
  // from the files.
  write_means(mean_by_method(read_results(config.output_dir / "results_train.csv")),
              config.output_dir / "means_train.csv");
  write_means(mean_by_method(read_results(config.output_dir / "results_test.csv")),
              config.output_dir / "means_test.csv");
  return status;
}

namespace {

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", p);
  return buf;
}

}  // namespace

CommandStatus run_compare(const std::vector<CompareInput>& inputs, double alpha, bool paired,
                          const fs::path& output_dir) {
  if (inputs.empty()) throw Error(ErrorCode::InvalidArgument, "no results to compare");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");

  std::vector<ComparisonRow> all;
  for (const CompareInput& input : inputs) {
    auto rows = compare_methods(input.dataset, read_results(input.results), alpha, paired);
    all.insert(all.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }

  std::set<std::string> datasets, metrics, members, ensembles;
  for (const auto& r : all) {
    datasets.insert(r.key.dataset);
    metrics.insert(r.key.metric);
    members.insert(r.key.member);
    ensembles.insert(r.key.ensemble);
  }
  WinLossTable table({datasets.begin(), datasets.end()}, {metrics.begin(), metrics.end()},
                     {members.begin(), members.end()}, {ensembles.begin(), ensembles.end()});
  std::string text = "dataset,metric,member,ensemble,test,p_value,verdict\n";
  for (const auto& r : all) {
    table.set(r.key, r.verdict);
    text += r.key.dataset + "," + r.key.metric + "," + r.key.member + "," + r.key.ensemble + "," +
            std::string(to_string(r.result.test_used)) + "," + format_p(r.result.p_value) + "," +
            std::string(to_string(r.verdict)) + "\n";
  }
  fs::create_directories(output_dir);
  write_text_file(output_dir / "comparisons.csv", text);

  std::string scores = "ensemble,score\n";
  for (const auto& [ensemble, score] : aggregate_scores(table)) {
    scores += ensemble + "," + std::to_string(score) + "\n";
  }
  write_text_file(output_dir / "scores.csv", scores);
  return {};
}

CommandStatus run_report(const fs::path& train_means, const fs::path& test_means,
                         const std::string& title, const fs::path& output_dir) {
  const MethodMeans train = read_means(train_means);
  const MethodMeans test = read_means(test_means);

  MethodMeans ensembles;
  for (CombinerKind kind : kAllCombiners) {
    const auto it = test.find(std::string(to_string(kind)));
    if (it != test.end()) ensembles.insert(*it);
  }
  const GlyphLayout glyph = glyph_layout(ensembles.size() >= 2 ? ensembles : test);
  const OverfitMatrix overfit = overfit_matrix(train, test);

  fs::create_directories(output_dir);
  write_text_file(output_dir / "glyph.svg", render_glyph_svg(glyph, title + " glyph plot"));
  write_text_file(output_dir / "overfit.html",
                  render_overfit_html(overfit, title + " overfitting magnitude"));

  CommandStatus status;
  status.warnings = glyph.warnings;
  status.warnings.insert(status.warnings.end(), overfit.warnings.begin(), overfit.warnings.end());
  return status;
}

CommandStatus run_synth(const SynthOptions& options) {
  if (options.cases == 0 || options.train_cases > options.cases) {
    throw Error(ErrorCode::InvalidArgument, "need cases >= 1 and train_cases <= cases");
  }
  const auto profiles = default_segmenter_profiles();
  fs::create_directories(options.output_dir);

  Manifest manifest;
  manifest.dataset = options.dataset;
  for (std::size_t m = 0; m < profiles.size(); ++m) {
    manifest.segmenter_names.push_back("seg" + std::to_string(m + 1));
  }
  const std::size_t width = std::to_string(options.cases - 1).size();
  for (std::size_t i = 0; i < options.cases; ++i) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "case%0*zu", static_cast<int>(std::max<std::size_t>(width, 2)), i);
    const std::string id = id_buf;
    const fs::path dir = options.output_dir / id;
    fs::create_directories(dir);
    const SyntheticCase sc = make_synthetic_case(options.grid, options.seed, i, profiles);
    CaseManifest entry{id, dir / "truth.mhd", {}, i < options.train_cases ? Split::Train : Split::Test};
    write_volume(sc.truth, entry.ground_truth);
    for (std::size_t m = 0; m < sc.maps.size(); ++m) {
      entry.segmenter_maps.push_back(dir / (manifest.segmenter_names[m] + ".mhd"));
      write_volume(sc.maps[m], entry.segmenter_maps.back());
    }
    manifest.cases.push_back(std::move(entry));
  }
  write_manifest(manifest, options.output_dir / "manifest.json");
  return {};
}

}  // namespace segfuse
