#include "lab/landscape.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "lab/rng.hpp"

namespace lab {
namespace {

// Newton iteration on the gradient via the finite-difference Hessian.
// Plain descent stalls once risk differences drop below double precision
// (gradient norms around 1e-8 for unit-scale risks); Newton steps home in on
// the critical point itself — saddles included, since only the gradient norm
// is required to shrink. Returns true when the target tolerance was reached.
bool newton_polish(const ResNetSpec& spec, const Dataset& data, LossKind loss,
                   Vector& theta, RiskGrad& rg, double tol, int max_rounds) {
  const ThetaLayout layout(spec);
  if (layout.size() > 1000) return false;
  for (int round = 0; round < max_rounds; ++round) {
    const double gn = rg.grad.norm();
    if (gn <= tol) return true;
    Matrix hess;
    try {
      hess = hessian_fd(spec, theta, data, loss);
    } catch (const KinkTooClose&) {
      return false;  // differencing would step across a kink
    }
    const linalg::SymEigResult eig = linalg::sym_eig(hess);
    const double lam_max = eig.eigenvalues.cwiseAbs().maxCoeff();
    if (!(lam_max > 0.0)) return false;
    const double lam_floor = 1e-12 * lam_max;
    // Pseudo-inverse step -H^+ g, dropping near-null directions so a
    // singular Hessian cannot catapult the iterate.
    Vector coeffs = eig.eigenvectors.transpose() * rg.grad;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
      coeffs(i) = std::abs(eig.eigenvalues(i)) > lam_floor
                      ? coeffs(i) / eig.eigenvalues(i)
                      : 0.0;
    }
    Vector delta = -(eig.eigenvectors * coeffs);
    bool moved = false;
    for (int halving = 0; halving < 30 && !moved; ++halving) {
      const Vector cand = theta + delta;
      const RiskGrad cand_rg = risk_and_grad(spec, cand, data, loss);
      if (cand_rg.grad.norm() < gn) {
        theta = cand;
        rg = cand_rg;
        moved = true;
      } else {
        delta *= 0.5;
      }
    }
    if (!moved) return rg.grad.norm() <= tol;
  }
  return rg.grad.norm() <= tol;
}

}  // namespace

CriticalPoint find_critical_point(const ResNetSpec& spec, const Dataset& data,
                                  LossKind loss, const Vector& init,
                                  double tol, int max_iters) {
  RiskGrad rg = risk_and_grad(spec, init, data, loss);
  Vector theta = init;

  CriticalPoint best;
  best.theta = theta;
  best.grad_norm = rg.grad.norm();
  best.risk = rg.value;

  double step = 1.0;
  int it = 0;
  Rng hop_rng(0x686f70ULL);  // fixed stream, so runs are reproducible
  int hops = 0;
  for (; it < max_iters; ++it) {
    const double gn = rg.grad.norm();
    if (gn < best.grad_norm) {
      best.theta = theta;
      best.grad_norm = gn;
      best.risk = rg.value;
      best.iterations = it;
    }
    if (gn <= tol) {
      return {theta, gn, rg.value, it, true};
    }
    double trial = step * 2.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector cand = theta - trial * rg.grad;
      const double cand_risk = risk(spec, cand, data, loss);
      if (cand_risk <= rg.value - 1e-4 * trial * gn * gn) {
        theta = cand;
        rg = risk_and_grad(spec, theta, data, loss);
        step = trial;
        moved = true;
        break;
      }
      trial *= 0.5;
    }
    if (!moved) {
      // The gradient is not small, yet -grad gives no descent: the iterate
      // sits on a kink surface where the one-sided derivatives disagree.
      // Hop off with a small perturbation and keep descending. Nonsmooth
      // local minima re-attract such hops, so give up after a few.
      if (hops >= 8) break;
      ++hops;
      const double scale = 1e-3 * (1.0 + theta.norm());
      for (Eigen::Index k = 0; k < theta.size(); ++k) {
        theta(k) += scale * hop_rng.normal();
      }
      rg = risk_and_grad(spec, theta, data, loss);
      step = 1.0;
    }
  }
  if (best.grad_norm < rg.grad.norm()) {
    theta = best.theta;
    rg = risk_and_grad(spec, theta, data, loss);
  }
  newton_polish(spec, data, loss, theta, rg, 0.01 * tol, 40);
  const double gn = rg.grad.norm();
  if (gn < best.grad_norm) {
    best.theta = theta;
    best.grad_norm = gn;
    best.risk = rg.value;
    best.iterations = it;
  }
  best.converged = best.grad_norm <= tol;
  return best;
}

namespace {

// Stacked inner input maps of blocks 2..L as columns: [U_2^T ... U_L^T].
Matrix stacked_input_maps(const ResNetSpec& spec, const ThetaLayout& layout,
                          const Vector& theta) {
  int cols = 0;
  for (int l = 1; l < spec.depth(); ++l) cols += layout.block(l).u.rows;
  Matrix stacked(spec.d_x, cols);
  int at = 0;
  for (int l = 1; l < spec.depth(); ++l) {
    const ParamSlice& u = layout.block(l).u;
    if (u.empty()) continue;
    stacked.middleCols(at, u.rows) = slice_mat(theta, u).transpose();
    at += u.rows;
  }
  return stacked;
}

}  // namespace

CoverageReport check_coverage(const ResNetSpec& spec, const Vector& theta,
                              const Dataset& data, LossKind loss,
                              double rank_tol) {
  const ThetaLayout layout(spec);
  CoverageReport rep;

  rep.a = Matrix::Zero(spec.d_x, spec.d_x);
  const double inv_n = 1.0 / data.n();
  for (int i = 0; i < data.n(); ++i) {
    const ForwardTrace t = forward(spec, theta, data.x.row(i).transpose());
    const LossEval e = loss_eval(loss, t.output, data.y(i));
    const Vector& h = t.h[spec.depth()];
    rep.a.noalias() += (inv_n * e.d2) * (h * h.transpose());
  }
  rep.lambda_min_a = linalg::sym_eig(rep.a).eigenvalues(0);
  rep.rep_coverage = linalg::rank(rep.a, rank_tol) == spec.d_x;

  const Matrix stacked = stacked_input_maps(spec, layout, theta);
  rep.stacked_rank = linalg::rank(stacked, rank_tol);
  rep.param_coverage = rep.stacked_rank < spec.d_x;
  rep.complement_basis = linalg::orth_complement(stacked, rank_tol);
  return rep;
}

std::optional<EscapeDirection> escape_direction(const ResNetSpec& spec,
                                                const Vector& theta,
                                                const Dataset& data,
                                                LossKind loss, int block,
                                                double rank_tol, double b_tol) {
  const ThetaLayout layout(spec);
  if (block < 0 || block >= spec.depth()) {
    throw std::invalid_argument("escape_direction: block index out of range");
  }
  const CoverageReport cov = check_coverage(spec, theta, data, loss, rank_tol);
  if (!cov.rep_coverage || !cov.param_coverage) {
    throw CoverageViolated(std::string("escape_direction: ") +
                           (cov.rep_coverage ? "parameter" : "representation") +
                           " coverage fails");
  }

  // b = (1/n) sum l'_i phi_block(x_i): the cross term between w and V_block.
  const int n_l = spec.blocks[block].n;
  Vector b = Vector::Zero(n_l);
  const double inv_n = 1.0 / data.n();
  for (int i = 0; i < data.n(); ++i) {
    const ForwardTrace t = forward(spec, theta, data.x.row(i).transpose());
    const LossEval e = loss_eval(loss, t.output, data.y(i));
    b += (inv_n * e.d1) * t.blocks[block].phi;
  }
  if (b.norm() <= b_tol) return std::nullopt;

  EscapeDirection esc;
  esc.block = block;
  esc.alpha = cov.complement_basis.col(0);
  esc.beta = b;

  // epsilon = -A^{-1} Delta b with Delta = alpha b^T, so Delta b = |b|^2 alpha.
  Eigen::LDLT<Matrix> a_solver(cov.a);
  if (a_solver.info() != Eigen::Success) {
    throw NumericalFailure("escape_direction: A factorization failed");
  }
  const double b2 = b.squaredNorm();
  const Vector a_inv_alpha = a_solver.solve(esc.alpha);
  esc.epsilon = -b2 * a_inv_alpha;
  esc.predicted_decrease = -0.5 * b2 * b2 * esc.alpha.dot(a_inv_alpha);

  esc.delta = Vector::Zero(theta.size());
  slice_vec(esc.delta, layout.w()) = esc.epsilon;
  slice_mat(esc.delta, layout.block(block).v) = esc.alpha * b.transpose();

  // Line probe: geometric steps scaled to the candidate's own size.
  const double base = risk(spec, theta, data, loss);
  const double theta_norm = theta.norm();
  const double scale =
      (theta_norm > 0.0 ? theta_norm : 1.0) / esc.delta.norm();
  for (const double factor : {1e-2, 1e-3, 1e-4}) {
    const double s = factor * scale;
    const double probed = risk(spec, theta + s * esc.delta, data, loss);
    if (probed < base) {
      esc.verified = true;
      esc.verified_decrease = probed - base;
      esc.step = s;
      break;
    }
  }
  return esc;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kGoodAsLinear:
      return "GoodAsLinear";
    case Verdict::kStrictSaddle:
      return "StrictSaddle";
    case Verdict::kConditionsViolated:
      return "ConditionsViolated";
    case Verdict::kInconclusive:
      return "Inconclusive";
  }
  return "?";
}

VerdictReport classify_critical_point(const ResNetSpec& spec,
                                      const Dataset& data, LossKind loss,
                                      const Vector& theta_star,
                                      double grad_norm,
                                      const VerdictOptions& opts) {
  if (!(grad_norm <= opts.grad_tol)) {
    throw std::invalid_argument(
        "classify_critical_point: candidate gradient norm " +
        std::to_string(grad_norm) + " exceeds tolerance " +
        std::to_string(opts.grad_tol));
  }
  const ThetaLayout layout(spec);

  VerdictReport rep;
  rep.theta = theta_star;
  rep.grad_norm = grad_norm;
  rep.risk = risk(spec, theta_star, data, loss);
  rep.r_lin = fit_linear(data, loss, /*with_bias=*/false).risk;
  rep.slack = 10.0 * grad_norm * (1.0 + theta_star.norm());
  rep.kink_margin = kink_margin(spec, theta_star, data);
  rep.coverage = check_coverage(spec, theta_star, data, loss, opts.rank_tol);
  rep.risk_le_rlin = rep.risk <= rep.r_lin + rep.slack;
  if (rep.coverage.complement_basis.cols() > 0) {
    rep.w_outside_span = (rep.coverage.complement_basis.transpose() *
                          slice_vec(theta_star, layout.w()))
                             .norm();
  }

  if (!rep.coverage.rep_coverage || !rep.coverage.param_coverage) {
    rep.verdict = Verdict::kConditionsViolated;
    rep.reason = !rep.coverage.rep_coverage
                     ? "representation coverage fails (A rank-deficient)"
                     : "parameter coverage fails (stacked maps span R^d)";
    return rep;
  }
  if (rep.kink_margin < opts.margin_tol) {
    rep.verdict = Verdict::kInconclusive;
    rep.reason = "kink margin " + std::to_string(rep.kink_margin) +
                 " below tolerance; smoothness not certified";
    return rep;
  }
  if (rep.risk_le_rlin) {
    rep.verdict = Verdict::kGoodAsLinear;
    return rep;
  }
  for (int l = 0; l < spec.depth(); ++l) {
    auto esc = escape_direction(spec, theta_star, data, loss, l, opts.rank_tol,
                                opts.b_tol);
    if (esc && esc->verified) {
      rep.verdict = Verdict::kStrictSaddle;
      rep.escape = std::move(esc);
      return rep;
    }
  }
  rep.verdict = Verdict::kInconclusive;
  rep.reason = "risk above the linear baseline but no verified escape";
  if (opts.attach_hessian && layout.size() <= 5000 &&
      rep.kink_margin > 2.0 * opts.hessian_step) {
    const Matrix h =
        hessian_fd(spec, theta_star, data, loss, opts.hessian_step);
    rep.hessian_lambda_min = linalg::sym_eig(h).eigenvalues(0);
  }
  return rep;
}

}  // namespace lab
