// segfuse command-line front end.
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "segfuse/app.hpp"
#include "segfuse/error.hpp"

namespace fs = std::filesystem;
using namespace segfuse;

namespace {

// Flags shared by combine and evaluate. Values given on the command line
// override the config file.
struct RunFlags {
  std::string config;
  std::string manifest;
  std::string output;
  std::vector<std::string> combiners;
  std::optional<double> prior;
  std::optional<double> alpha;
  std::optional<std::size_t> jobs;
  bool no_smoothing = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", f.manifest, "Case manifest (overrides config)");
  cmd->add_option("-o,--output", f.output, "Output directory (overrides config)");
  cmd->add_option("--combiners", f.combiners, "majority, average, product, minmax")->delimiter(',');
  cmd->add_option("--prior", f.prior, "Explicit foreground prior in (0, 1)");
  cmd->add_option("--alpha", f.alpha, "Significance level");
  cmd->add_option("-j,--jobs", f.jobs, "Cases processed in parallel");
  cmd->add_flag("--no-smoothing", f.no_smoothing, "Skip the 3x3x3 smoothing steps");
}

RunConfig build_config(const RunFlags& f) {
  RunConfig config;
  if (!f.config.empty()) config = load_run_config(f.config);
  if (!f.manifest.empty()) config.manifest = f.manifest;
  if (!f.output.empty()) config.output_dir = f.output;
  if (!f.combiners.empty()) {
    config.combiners.clear();
    for (const auto& name : f.combiners) config.combiners.push_back(parse_combiner(name));
  }
  if (f.prior) config.prior = f.prior;
  if (f.alpha) config.alpha = *f.alpha;
  if (f.jobs) config.jobs = *f.jobs;
  if (f.no_smoothing) config.smoothing = false;
  validate(config);
  return config;
}

int report_status(const char* command, const CommandStatus& status) {
  for (const auto& w : status.warnings) std::cerr << command << ": warning: " << w << "\n";
  for (const auto& e : status.errors) std::cerr << command << ": error: " << e << "\n";
  if (!status.errors.empty()) {
    std::cerr << command << ": " << status.errors.size() << " case(s) failed\n";
  }
  return status.exit_code();
}

std::vector<std::size_t> parse_triple_size(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, 'x');) out.push_back(std::stoul(part));
  if (out.size() != 3) throw Error(ErrorCode::InvalidArgument, "expected NXxNYxNZ, got " + text);
  return out;
}

std::vector<double> parse_triple_real(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) out.push_back(std::stod(part));
  if (out.size() != 3) throw Error(ErrorCode::InvalidArgument, "expected SX,SY,SZ, got " + text);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuse, evaluate and compare 3D segmentation probability maps"};
  app.require_subcommand(1);

  RunFlags combine_flags, evaluate_flags;
  auto* combine = app.add_subcommand("combine", "Fuse every case's maps with the configured combiners");
  add_run_flags(combine, combine_flags);
  auto* evaluate = app.add_subcommand("evaluate", "Score segmenters and ensembles against ground truth");
  add_run_flags(evaluate, evaluate_flags);

  auto* compare = app.add_subcommand("compare", "Statistical comparison of ensembles against segmenters");
  std::string compare_config, compare_output;
  std::vector<std::string> compare_results;
  std::optional<double> compare_alpha;
  bool unpaired = false;
  compare->add_option("--config", compare_config, "JSON run configuration")->check(CLI::ExistingFile);
  compare->add_option("--results", compare_results,
                      "Per-case results as [dataset=]path, repeatable (default: <output>/results_test.csv)");
  compare->add_option("-o,--output", compare_output, "Output directory");
  compare->add_option("--alpha", compare_alpha, "Significance level");
  compare->add_flag("--unpaired", unpaired, "Use the non-paired protocol");

  auto* report = app.add_subcommand("report", "Render the glyph plot and the overfitting matrix");
  std::string report_config, report_output, train_means, test_means, title;
  report->add_option("--config", report_config, "JSON run configuration")->check(CLI::ExistingFile);
  report->add_option("--train-means", train_means, "Training means CSV");
  report->add_option("--test-means", test_means, "Testing means CSV");
  report->add_option("--title", title, "Title used in the artifacts");
  report->add_option("-o,--output", report_output, "Output directory");

  auto* synth = app.add_subcommand("synth", "Generate phantom cases and simulated segmenter maps");
  SynthOptions synth_options;
  std::string synth_dims = "64x64x40", synth_spacing = "1,1,1.5";
  synth->add_option("-o,--output", synth_options.output_dir, "Output directory")->required();
  synth->add_option("--cases", synth_options.cases, "Number of cases")->check(CLI::PositiveNumber);
  synth->add_option("--train", synth_options.train_cases, "How many of the cases form the training split");
  synth->add_option("--dims", synth_dims, "Grid size NXxNYxNZ");
  synth->add_option("--spacing", synth_spacing, "Voxel spacing SX,SY,SZ in mm");
  synth->add_option("--seed", synth_options.seed, "Random seed")->required();
  synth->add_option("--dataset", synth_options.dataset, "Dataset name stored in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every usage error is a configuration error.
    return app.exit(e) == 0 ? 0 : kConfigErrorExit;
  }

  try {
    if (*combine) {
      const RunConfig config = build_config(combine_flags);
      return report_status("combine", run_combine(config));
    }
    if (*evaluate) {
      const RunConfig config = build_config(evaluate_flags);
      return report_status("evaluate", run_evaluate(config));
    }
    if (*compare) {
      std::optional<RunConfig> config;
      if (!compare_config.empty()) config = load_run_config(compare_config);
      fs::path out = !compare_output.empty() ? fs::path(compare_output)
                     : config                ? config->output_dir
                                             : fs::path(".");
      std::vector<CompareInput> inputs;
      std::string default_dataset = "dataset";
      if (config) default_dataset = load_manifest(config->manifest).dataset;
      for (const auto& spec : compare_results) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
          inputs.push_back({default_dataset, spec});
        } else {
          inputs.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
        }
      }
      if (inputs.empty()) inputs.push_back({default_dataset, out / "results_test.csv"});
      const double alpha = compare_alpha ? *compare_alpha : config ? config->alpha : kDefaultAlpha;
      const bool paired = config ? config->paired && !unpaired : !unpaired;
      return report_status("compare", run_compare(inputs, alpha, paired, out));
    }
    if (*report) {
      std::optional<RunConfig> config;
      if (!report_config.empty()) config = load_run_config(report_config);
      const fs::path base = config ? config->output_dir : fs::path(".");
      const fs::path out = !report_output.empty() ? fs::path(report_output) : base;
      if (train_means.empty()) train_means = (base / "means_train.csv").string();
      if (test_means.empty()) test_means = (base / "means_test.csv").string();
      if (title.empty()) title = config ? load_manifest(config->manifest).dataset : "segfuse";
      return report_status("report", run_report(train_means, test_means, title, out));
    }
    if (*synth) {
      const auto d = parse_triple_size(synth_dims);
      const auto s = parse_triple_real(synth_spacing);
      synth_options.grid = GridMeta({d[0], d[1], d[2]}, {s[0], s[1], s[2]});
      return report_status("synth", run_synth(synth_options));
    }
  } catch (const std::exception& e) {
    std::cerr << app.get_subcommands().front()->get_name() << ": " << e.what() << "\n";
    return kConfigErrorExit;
  }
  return kConfigErrorExit;
}
