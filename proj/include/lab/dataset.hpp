#pragma once

#include <string>

#include "lab/linalg.hpp"

namespace lab {

// A finite sample: one row of x per example plus a label vector.
struct Dataset {
  Matrix x;  // n x d
  Vector y;  // n

  int n() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }
};

// Validates shapes and finiteness; throws DimensionMismatch / EmptyDataset /
// NumericalFailure.
Dataset make_dataset(Matrix x, Vector y);

// CSV loader. Expects a header row "x1,...,xd,y", one numeric row per
// example. Throws ParseError (with line number) on malformed or non-finite
// fields, DimensionError on rows whose width disagrees with the header, and
// EmptyDataset when no data rows follow the header.
Dataset load_dataset(const std::string& path);
Dataset parse_dataset_csv(const std::string& text);  // same contract, testable

// Copy of d with a constant-1 feature appended as the last column.
Dataset with_bias_column(const Dataset& d);

}  // namespace lab
