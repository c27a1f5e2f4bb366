#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lab/loss.hpp"
#include "lab/model.hpp"

namespace lab {

enum class ExperimentKind {
  kTheorem1Sweep,   // critical-point search + landscape verdict per seed
  kTheorem2Check,   // critical-point search + risk bound report per seed
  kRademacherSweep, // complexity estimate vs bound per seed
  kProp1,           // split-fit table + explicit construction per rho
  kNonMonotone,     // fixed worked example
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& text);

// Flat `key = value` experiment description. `#` starts a comment; blank
// lines are skipped; unknown or duplicate keys are errors. Keys that a kind
// does not consume are allowed (they keep their defaults elsewhere).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kNonMonotone;
  std::string output = "experiment";  // basename for .report.json/.summary.csv

  // Shared by the critical-point kinds.
  LossKind loss = LossKind::kSquared;
  std::string dataset;  // "builtin:<rho>" (six-point line) or a CSV path
  std::string arch;     // block grammar, see parse_arch
  std::vector<std::uint64_t> seeds{1};
  double tol = 1e-8;
  int max_iters = 100000;

  // Prop1 sweep values.
  std::vector<double> rho{0.5, 1.0};

  // Complexity sweep.
  int trials = 30;
  int restarts = 8;
  int samples = 32;
  int d_x = 2;
  std::vector<double> m{1.0};
  std::vector<int> widths;  // empty -> d_x per block
  bool exhaustive = false;
  int ascent_iters = 200;
};

// Parse from text or file. Errors carry the offending 1-based line.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

// Comma-separated block grammar, instantiated for a given input dimension:
//   sv                  simple vector block
//   g:<m>:relu          general block, elementwise relu, inner width m
//   g:<m>:<h>:affine    general block, affine relu with h hidden units
//   first:relu          first block (no input map), elementwise relu
//   first:<h>:affine    first block, affine relu with h hidden units
ResNetSpec parse_arch(const std::string& text, int d_x);

// "5", "1,2,3", or "1..20" (inclusive).
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace lab
