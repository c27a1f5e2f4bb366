#pragma once

#include <string>

#include "lab/config.hpp"

namespace lab {

inline constexpr const char* kVersion = "0.1.0";

struct RunResult {
  std::string report_json;  // full report, includes wall-clock timing
  std::string summary_csv;  // timing-free; byte-identical across reruns
  bool invariants_ok = false;
};

// Executes the experiment described by the config. Per-entry failures are
// recorded in the result (and clear invariants_ok) rather than thrown;
// configuration problems (bad dataset path, bad builtin spec) throw.
RunResult run_experiment(const ExperimentConfig& config);

struct OutputPaths {
  std::string report;
  std::string summary;
};

// Writes <output>.report.json and <output>.summary.csv next to each other.
OutputPaths write_outputs(const ExperimentConfig& config,
                          const RunResult& result);

// Shortest-faithful decimal rendering used for every CSV number.
std::string format_g17(double value);

}  // namespace lab
