#pragma once

#include <stdexcept>
#include <string>

namespace lab {

// A numerical routine failed to converge or met non-finite input.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operand shapes do not line up.
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Logistic labels must be exactly -1 or +1.
struct InvalidLabel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An aggregate was requested over zero elements.
struct EmptyInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A finite-difference step would cross a ReLU kink.
struct KinkTooClose : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The coverage conditions required by the saddle construction do not hold.
struct CoverageViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No Lipschitz certificate is available for this inner function.
struct UnsupportedInner : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A case-study claim was requested outside its domain of validity.
struct HypothesisViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input (CSV or config). `line` is 1-based; 0 means the
// problem is semantic rather than tied to a specific line.
struct ParseError : std::runtime_error {
  int line;
  ParseError(const std::string& msg, int line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
};

// A CSV row's width disagrees with the header.
struct DimensionError : std::runtime_error {
  int line;
  DimensionError(const std::string& msg, int line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
};

// A dataset with zero rows.
struct EmptyDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lab
