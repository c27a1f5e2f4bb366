#pragma once

#include "lab/dataset.hpp"
#include "lab/loss.hpp"

namespace lab {

// Best linear predictor t^T x (optionally with an intercept, realized as a
// constant-1 feature appended last).
struct LinearFit {
  Vector t_hat;          // d entries, or d+1 with the intercept last
  double risk = 0.0;     // mean loss at t_hat
  double grad_residual = 0.0;  // norm of the mean-loss gradient at t_hat
  bool with_bias = false;
  bool attained = true;  // false when the logistic iteration cap fired
  int iterations = 0;
};

// Squared loss: exact minimum-norm solve via the SVD pseudoinverse
// (grad_residual ~ 1e-16 on well-conditioned data). Logistic loss: gradient
// descent with backtracking from t = 0 until the gradient norm falls under
// tol; if max_iters fires first the best iterate is returned with
// attained = false (separable data has no finite minimizer).
LinearFit fit_linear(const Dataset& data, LossKind loss, bool with_bias,
                     double tol = 1e-10, int max_iters = 100000);

// Mean loss of an explicit linear predictor on the (optionally augmented)
// design; used by probe tests and reports.
double linear_risk(const Dataset& data, LossKind loss, const Vector& t,
                   bool with_bias);

}  // namespace lab
