#pragma once

#include <cstdint>
#include <vector>

#include "lab/dataset.hpp"
#include "lab/model.hpp"

namespace lab {

// Per-block Lipschitz certificates rho_l with phi_l(0) = 0:
//   simple vector block: |v| * |u|;
//   general + elementwise relu: |V|_2 * |U|_2 (first block: |V|_2);
//   general/first + affine relu: |V|_2 * |Z|_2 * |U|_2, valid only when every
//     bias entry is <= 0 so relu(c) = 0 — otherwise UnsupportedInner, since
//     the residual propagation bound needs the inner map to vanish at zero.
std::vector<double> lipschitz_rho(const ResNetSpec& spec, const Vector& theta);

// risk(theta) <= r_lin + mu * |t_hat| * (prod(1 + rho_l) - 1) * mean|x|,
// where t_hat is the bias-free linear baseline under the same loss. For
// logistic loss mu = 1 a priori; for squared loss mu is the empirical
// max |l'| at theta and the report flags it.
struct RiskBoundReport {
  std::vector<double> rho;
  double mu = 0.0;
  bool mu_is_empirical = false;
  double t_hat_norm = 0.0;
  double mean_x_norm = 0.0;
  double r_lin = 0.0;
  double product_term = 0.0;  // prod(1 + rho_l) - 1
  double bound = 0.0;
  double risk = 0.0;
  double grad_norm = 0.0;
  double slack = 0.0;  // 10 * grad_norm * (1 + |theta|)
  bool holds = false;  // risk <= bound + slack
};

RiskBoundReport risk_bound_report(const ResNetSpec& spec, const Vector& theta,
                                  const Dataset& data, LossKind loss);

// Pure bound assembly for sweeps that construct the ingredients directly.
double risk_bound_value(const std::vector<double>& rho, double mu,
                        double t_hat_norm, double mean_x_norm, double r_lin);

// B * prod(1 + 2 M_l^2) / sqrt(n) — B is the largest sample norm.
double complexity_bound(double b, int n, const std::vector<double>& m);

// Function class for the complexity estimate: all blocks are V_l relu(U_l .)
// with |w| <= 1 and Frobenius caps |U_l|_F, |V_l|_F <= M_l. `widths` are the
// inner dimensions d_l (default d_x each).
struct RademacherConfig {
  int d_x = 1;
  std::vector<double> m;
  std::vector<int> widths;  // empty -> d_x per block
  int trials = 30;
  int restarts = 8;
  int max_iters = 200;
  double tol = 1e-10;
  bool exhaustive = false;  // average over all 2^n sign vectors (n <= 20)
  std::uint64_t seed = 1;
};

struct RademacherReport {
  int n = 0;
  double b = 0.0;
  std::vector<double> m;
  double bound = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;  // 0 in exhaustive mode
  int trials = 0;
  int restarts = 0;
  bool exhaustive = false;
};

// Monte Carlo (or exhaustive) lower estimate of the empirical Rademacher
// complexity by maximizing (1/n) sum eps_i f(x_i) with projected gradient
// ascent; w is re-solved in closed form each iteration (the objective is
// linear in w), which makes the L = 0 case exact.
RademacherReport rademacher_estimate(const Matrix& samples,
                                     const RademacherConfig& config);

// Single-draw maximization, exposed so tests can warm-start nested
// constraint sets. Returns the best value and its parameters.
struct CorrelationMax {
  double value = 0.0;
  Vector theta;
};

CorrelationMax maximize_correlation(const ResNetSpec& spec,
                                    const std::vector<double>& m,
                                    const Matrix& samples, const Vector& eps,
                                    int restarts, int max_iters, double tol,
                                    std::uint64_t seed,
                                    const Vector* warm_start = nullptr);

// The network family used by the estimator (also handy for tests).
ResNetSpec complexity_spec(int d_x, const std::vector<double>& m,
                           const std::vector<int>& widths);

}  // namespace lab
