#pragma once

#include <vector>

#include "lab/dataset.hpp"
#include "lab/model.hpp"

namespace lab {

// Six-point line-fitting example: inputs 0..5, targets i + rho * delta_i with
// delta = (-1, -1, +1, -1, +1, +1). Used to compare one-kink networks against
// the best affine fit.
Dataset prop1_dataset(double rho);

// Best affine fit risk on that dataset: 8 rho^2 / 15.
double prop1_linear_risk(double rho);

// Risk of the depth-1 residual construction (features 0,1,2,3,4+rho/2,5+rho
// with an affine readout): rho^2 (12 rho^2 + 82 rho + 215) /
// (21 rho^2 + 156 rho + 420).
double prop1_resnet_closed_form(double rho);

// One row per kink interval. Any network whose single kink lies in
// [lo, hi) is constant on the samples left of the kink and affine on the
// samples right of it, so its risk is at least the sum of the two
// unconstrained split-fit errors (continuity is relaxed, hence lower bound).
struct SplitFitRow {
  double lo = 0.0;
  double hi = 0.0;
  int left_count = 0;       // samples with index <= kink position
  double constant_error = 0.0;  // SSE/6 of the best constant on the left part
  double linear_error = 0.0;    // SSE/6 of the best affine fit on the right part
  double lower_bound = 0.0;     // constant_error + linear_error
};

// Closed-form table for the seven kink intervals
// (-inf,0), [0,1), ..., [4,5), [5,inf). Requires 0 < rho <= sqrt(5)/2:
// beyond that the [1,2) row drops below the affine baseline and the
// every-row-dominates claim no longer holds (HypothesisViolated).
std::vector<SplitFitRow> prop1_table(double rho);

struct Prop1Report {
  double rho = 0.0;
  double r_lin = 0.0;  // computed affine-fit risk (matches 8 rho^2 / 15)
  std::vector<SplitFitRow> rows;
  bool all_bounds_ge_rlin = false;
  double resnet_risk = 0.0;    // computed from the explicit construction
  double closed_form = 0.0;    // prop1_resnet_closed_form(rho)
  bool resnet_beats_linear = false;  // resnet_risk < r_lin
};

// Builds the dataset, the table, and the explicit residual construction,
// and cross-checks the computed risks against the closed forms.
Prop1Report prop1_verify(double rho);

// Three-point interpolation where the intermediate representation is a
// strictly worse regression feature than the raw input, yet the full network
// interpolates exactly: risk along the blocks is not monotone.
struct NonMonotoneReport {
  std::vector<double> h1;  // first-block features per sample
  std::vector<double> h2;  // second-block features per sample
  double err_x = 0.0;      // affine-fit risk on the raw inputs (25/78)
  double err_h1 = 0.0;     // affine-fit risk on the first features (8/21)
  double err_h2 = 0.0;     // affine-fit risk on the second features (0)
  double risk = 0.0;       // network risk (0: exact interpolation)
  double grad_norm = 0.0;
  double kink_margin = 0.0;
  bool is_critical = false;  // grad_norm <= 1e-12 with a positive kink margin
};

NonMonotoneReport nonmonotone_example();

}  // namespace lab
