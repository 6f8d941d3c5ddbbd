#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oam/config_io.hpp"
#include "oam/csv.hpp"

namespace oam {

// Column layout of each pipeline's CSV.
std::vector<std::string> pipeline_columns(Pipeline p);

// Seed of trial t, shared by every sweep point so that points differ only in
// the swept parameter.
std::uint64_t trial_seed(std::uint64_t master, int trial);

struct RunOptions {
  std::function<void(const std::string&)> progress;  // optional status lines
};

// Runs the pipeline and returns the table, comments included. No timestamp
// is written here so the result is reproducible.
CsvTable run_pipeline(const ExperimentSpec& spec, const RunOptions& options = {});

struct ExperimentSummary {
  std::string path;
  std::size_t rows = 0;
};

// Writes <out_dir>/<name>-<pipeline>.csv through a temporary file that is
// removed if the pipeline throws.
ExperimentSummary run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                 const RunOptions& options = {});

}  // namespace oam
