#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rda/datagen.h"
#include "rda/trainer.h"

namespace rda {

// A sweep: every (mode, alpha) pair is trained once per repeat. Repeat i uses
// seed + i for both data generation and training.
struct ExperimentConfig {
  TrainConfig train;  // alpha and mode are taken from the lists below
  GenSpec data;
  std::size_t test_size = 2000;
  std::optional<std::filesystem::path> data_csv;  // replaces the generator
  std::vector<double> alphas{0.0};
  std::vector<ProjectionMode> modes{ProjectionMode::outer};
  int repeats = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys and bad values
// throw ConfigError naming the key; malformed lines throw ParseError.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Every key with its resolved value, in the format parse_experiment_config reads.
std::string echo_config(const ExperimentConfig& config);

struct RunRecord {
  ProjectionMode mode;
  double alpha;
  std::uint64_t seed;
  std::filesystem::path trace_file;
};

struct SummaryRow {
  ProjectionMode mode;
  double alpha;
  std::string metric;
  double mean;
  double std;  // sample standard deviation, 0 for a single run
  std::size_t runs;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
};

// Writes traces/<mode>_alpha<alpha>_seed<seed>.csv, the final weights of each
// run as checkpoints/<same name>.rdat, summary.csv,
// projections.csv (when the sweep has more than one mode) and config.txt
// under out_dir. Throws ConfigError / DivergenceError.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log);

// Final-epoch metrics plus total projections, aggregated over the runs of each
// (mode, alpha) group. Reads only the trace files.
std::vector<SummaryRow> summarize_traces(const std::vector<RunRecord>& runs);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

// Parsed trace CSV: column name -> values, one per epoch.
std::map<std::string, std::vector<double>> read_trace_csv(const std::filesystem::path& path);

// On-demand checks; print one line per property and return true when all
// pass. Throws ConfigError("verify", ...) for an unknown suite.
bool run_verify(const std::string& suite, std::ostream& out);

}  // namespace rda
