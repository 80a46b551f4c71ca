// Batch runner: reads a JSON experiment spec, runs every cell and
// repetition, and writes metrics.csv, summary.csv and bounds.json.

#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "csm/experiment_spec.hpp"

namespace {

// Exit codes, one per error family.
int exit_code_for(csm::ErrorCategory category) {
  using csm::ErrorCategory;
  switch (category) {
    case ErrorCategory::Parse: return 3;
    case ErrorCategory::Constraint: return 4;
    case ErrorCategory::InvalidConfiguration:
    case ErrorCategory::AssumptionViolation: return 5;
    case ErrorCategory::Io: return 6;
    default: return 7;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated stable-marriage bandit simulator"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir;
  bool sweep = false;
  bool quiet = false;

  app.add_option("config", config_path, "JSON experiment spec")->required();
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--workers", workers, "Parallel repetitions (default: hardware threads)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "Output directory (overrides CSM_MAB_OUT_DIR and the spec)");
  app.add_flag("--sweep", sweep, "Treat K/N lists and ranges as sweep axes");
  app.add_flag("-q,--quiet", quiet, "Suppress the progress summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto spec = csm::parse_config_file(config_path, sweep);
    if (seed) spec.base.seed = *seed;
    if (out_dir.empty()) {
      if (const char* env = std::getenv("CSM_MAB_OUT_DIR"); env && *env) out_dir = env;
    }
    if (out_dir.empty()) out_dir = spec.out_dir;

    const auto results = csm::run_spec(spec, workers);
    const auto files = csm::emit_metrics(results, spec, out_dir);
    if (!quiet) {
      std::size_t runs = 0;
      for (const auto& cell : results) runs += cell.runs.size();
      std::cout << results.size() << " cell(s), " << runs << " run(s)\n"
                << "  " << files.metrics.string() << '\n'
                << "  " << files.summary.string() << '\n'
                << "  " << files.bounds.string() << '\n';
    }
  } catch (const csm::Error& e) {
    std::cerr << "error [" << csm::to_string(e.category()) << "]: " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
