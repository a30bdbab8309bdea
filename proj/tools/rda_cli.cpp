#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "rda/errors.h"
#include "rda/experiment.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train and compare classifiers with the S-measure regularizer"};
  std::string config_path, out_dir, suite;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Key-value experiment file");
  app.add_option("--out", out_dir, "Output directory (overrides experiment.out)");
  app.add_option("--seed", seed, "Base seed (overrides experiment.seed)");
  app.add_option("--verify", suite, "Run a check suite: projection, gradients, convergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!suite.empty()) {
      return rda::run_verify(suite, std::cout) ? kExitOk : kExitConfig;
    }
    if (config_path.empty()) {
      std::cerr << "error: --config or --verify is required\n";
      return kExitConfig;
    }
    auto config = rda::load_experiment_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seed) config.seed = *seed;
    rda::run_experiment(config, std::cout);
    return kExitOk;
  } catch (const rda::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
