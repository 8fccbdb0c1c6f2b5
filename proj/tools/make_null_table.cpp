// Regenerates data/lilliefors_null.txt.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "segfuse/error.hpp"
#include "segfuse/io.hpp"
#include "segfuse/stats.hpp"

int main(int argc, char** argv) {
  using segfuse::LillieforsTable;
  CLI::App app{"Monte Carlo null table for the Lilliefors statistic"};
  std::uint64_t seed = LillieforsTable::kDefaultSeed;
  std::size_t replicates = LillieforsTable::kDefaultReplicates;
  std::size_t n_min = LillieforsTable::kMinSize;
  std::size_t n_max = LillieforsTable::kMaxSize;
  std::size_t levels = LillieforsTable::kDefaultLevels;
  std::string output;
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--replicates", replicates, "Samples per size")->check(CLI::PositiveNumber);
  app.add_option("--n-min", n_min, "Smallest sample size")->check(CLI::Range(4, 1000));
  app.add_option("--n-max", n_max, "Largest sample size")->check(CLI::Range(4, 1000));
  app.add_option("--levels", levels, "Number of quantile levels")->check(CLI::Range(2, 100000));
  app.add_option("-o,--output", output, "Output file (stdout if omitted)");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto table = LillieforsTable::generate(seed, replicates, n_min, n_max, levels);
    if (output.empty()) {
      std::cout << table.serialize();
    } else {
      segfuse::write_text_file(output, table.serialize());
    }
  } catch (const segfuse::Error& e) {
    std::cerr << "make_null_table: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
