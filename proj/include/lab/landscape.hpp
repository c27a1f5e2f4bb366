#pragma once

#include <optional>
#include <string>

#include "lab/baseline.hpp"
#include "lab/model.hpp"

namespace lab {

// Result of the first-order search. `converged` means the gradient tolerance
// was met; otherwise theta is the best iterate seen (smallest gradient norm).
struct CriticalPoint {
  Vector theta;
  double grad_norm = 0.0;
  double risk = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Plain gradient descent with a backtracking (Armijo) line search. Returns
// the first iterate whose gradient norm is <= tol, else the best iterate.
CriticalPoint find_critical_point(const ResNetSpec& spec, const Dataset& data,
                                  LossKind loss, const Vector& init,
                                  double tol = 1e-8, int max_iters = 100000);

// The two hypotheses of the critical-point classification:
//   representation coverage — A = (1/n) sum l''(f(x_i); y_i) h_L h_L^T has
//     full rank d_x;
//   parameter coverage — the stacked inner input maps of blocks 2..L,
//     [U_2^T ... U_L^T], span strictly less than R^{d_x} (block 1 never
//     counts; with no such blocks the condition holds vacuously).
struct CoverageReport {
  Matrix a;
  double lambda_min_a = 0.0;
  bool rep_coverage = false;
  int stacked_rank = 0;
  bool param_coverage = false;
  Matrix complement_basis;  // d_x x (d_x - stacked_rank), orthonormal
};

CoverageReport check_coverage(const ResNetSpec& spec, const Vector& theta,
                              const Dataset& data, LossKind loss,
                              double rank_tol = 1e-10);

// Second-order descent direction built from the saddle construction:
// perturb w by epsilon and V_l by Delta = alpha beta^T with alpha from the
// complement of the stacked span and beta = b = (1/n) sum l'_i phi_l(x_i).
// predicted_decrease = -(1/2) b^T Delta^T A^{-1} Delta b < 0. The direction
// is then verified by a line probe at steps {1e-2,1e-3,1e-4}*|theta|/|delta|.
struct EscapeDirection {
  int block = 0;  // 0-based block index whose V was perturbed
  Vector alpha;
  Vector beta;
  Vector epsilon;
  Vector delta;  // flat direction over theta (w and V_l slices)
  double predicted_decrease = 0.0;
  bool verified = false;
  double verified_decrease = 0.0;  // risk(theta + step*delta) - risk(theta)
  double step = 0.0;               // accepted probe step, 0 when unverified
};

// Returns nullopt when |b| <= b_tol (no second-order signal at this block).
// Throws CoverageViolated when either coverage condition fails.
std::optional<EscapeDirection> escape_direction(const ResNetSpec& spec,
                                                const Vector& theta,
                                                const Dataset& data,
                                                LossKind loss, int block,
                                                double rank_tol = 1e-10,
                                                double b_tol = 1e-10);

enum class Verdict { kGoodAsLinear, kStrictSaddle, kConditionsViolated, kInconclusive };

std::string_view to_string(Verdict v);

struct VerdictOptions {
  double grad_tol = 1e-6;     // precondition on the candidate
  double rank_tol = 1e-10;
  double margin_tol = 1e-5;   // minimum kink margin to certify smoothness
  double b_tol = 1e-10;
  double hessian_step = 1e-5;  // for the lambda_min attachment
  bool attach_hessian = true;
};

struct VerdictReport {
  Vector theta;
  double grad_norm = 0.0;
  double risk = 0.0;
  double r_lin = 0.0;
  double slack = 0.0;  // 10 * grad_norm * (1 + |theta|)
  double kink_margin = 0.0;
  double w_outside_span = 0.0;  // |B^T w|, B = complement basis (0 if none)
  CoverageReport coverage;
  Verdict verdict = Verdict::kInconclusive;
  std::string reason;
  std::optional<EscapeDirection> escape;
  std::optional<double> hessian_lambda_min;
  bool risk_le_rlin = false;  // noted even when conditions are violated
};

// Decision procedure at a candidate critical point:
//   (i)   coverage; either condition failing -> ConditionsViolated,
//   (ii)  kink margin below margin_tol -> Inconclusive,
//   (iii) risk <= r_lin + slack -> GoodAsLinear,
//   (iv)  any block with a line-probe-verified escape -> StrictSaddle,
//   (v)   otherwise Inconclusive with lambda_min of the FD Hessian attached
//         (when the margin permits differencing).
// r_lin is the bias-free linear baseline under the same loss.
VerdictReport classify_critical_point(const ResNetSpec& spec,
                                      const Dataset& data, LossKind loss,
                                      const Vector& theta_star,
                                      double grad_norm,
                                      const VerdictOptions& opts = {});

}  // namespace lab
