#include "lab/casestudies.hpp"

#include <cmath>
#include <limits>

#include "lab/baseline.hpp"
#include "lab/errors.hpp"
#include "lab/linalg.hpp"
#include "lab/loss.hpp"

namespace lab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// SSE/n of the best affine fit (slope and intercept) of y on one feature.
double affine_fit_risk(const Vector& feature, const Vector& y) {
  Matrix design(feature.size(), 2);
  design.col(0) = feature;
  design.col(1).setOnes();
  const Vector t = linalg::lstsq(design, y);
  const Vector residual = design * t - y;
  return residual.squaredNorm() / static_cast<double>(y.size());
}

}  // namespace

Dataset prop1_dataset(double rho) {
  const double delta[6] = {-1.0, -1.0, 1.0, -1.0, 1.0, 1.0};
  Matrix x(6, 1);
  Vector y(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = static_cast<double>(i);
    y(i) = static_cast<double>(i) + rho * delta[i];
  }
  return make_dataset(x, y);
}

double prop1_linear_risk(double rho) { return 8.0 * rho * rho / 15.0; }

double prop1_resnet_closed_form(double rho) {
  const double num = rho * rho * (12.0 * rho * rho + 82.0 * rho + 215.0);
  const double den = 21.0 * rho * rho + 156.0 * rho + 420.0;
  return num / den;
}

std::vector<SplitFitRow> prop1_table(double rho) {
  if (!(rho > 0.0) || rho > std::sqrt(1.25)) {
    throw HypothesisViolated(
        "split-fit table requires 0 < rho <= sqrt(5)/2; outside that range "
        "a one-kink network can undercut the affine baseline");
  }
  const double r2 = rho * rho;
  std::vector<SplitFitRow> rows(7);

  rows[0] = {-kInf, 0.0, 0, 0.0, 8.0 * r2 / 15.0, 0.0};
  rows[1] = {0.0, 1.0, 1, 0.0, 8.0 * r2 / 15.0, 0.0};
  rows[2] = {1.0, 2.0, 2, 1.0 / 12.0, 7.0 * r2 / 15.0, 0.0};
  rows[3] = {2.0, 3.0, 3, 4.0 * r2 / 9.0 + 2.0 * rho / 3.0 + 1.0 / 3.0,
             r2 / 9.0, 0.0};
  rows[4] = {3.0, 4.0, 4, r2 / 2.0 + rho / 3.0 + 5.0 / 6.0, 0.0, 0.0};
  rows[5] = {4.0, 5.0, 5, 4.0 * r2 / 5.0 + 4.0 * rho / 3.0 + 5.0 / 3.0, 0.0,
             0.0};
  rows[6] = {5.0, kInf, 6, r2 + 7.0 * rho / 3.0 + 35.0 / 12.0, 0.0, 0.0};

  for (SplitFitRow& row : rows) {
    row.lower_bound = row.constant_error + row.linear_error;
  }
  return rows;
}

Prop1Report prop1_verify(double rho) {
  Prop1Report report;
  report.rho = rho;
  report.rows = prop1_table(rho);

  const Dataset data = prop1_dataset(rho);
  report.r_lin = fit_linear(data, LossKind::kSquared, /*with_bias=*/true).risk;

  report.all_bounds_ge_rlin = true;
  for (const SplitFitRow& row : report.rows) {
    if (row.lower_bound < report.r_lin - 1e-12) {
      report.all_bounds_ge_rlin = false;
    }
  }

  // Explicit one-block construction: h(x) = x + (rho/2) relu(x - 3) maps the
  // inputs to 0, 1, 2, 3, 4 + rho/2, 5 + rho, and an affine readout on that
  // feature is fit exactly.
  ResNetSpec spec;
  spec.d_x = 1;
  spec.blocks = {BlockSpec::first_affine(1, 1)};
  const ThetaLayout layout(spec);
  Vector theta = Vector::Zero(layout.size());
  const BlockSlices slices = layout.block(0);
  slice_mat(theta, slices.v)(0, 0) = 0.5 * rho;
  slice_mat(theta, slices.zw)(0, 0) = 1.0;
  slice_vec(theta, slices.zb)(0) = -3.0;

  Vector feature(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const ForwardTrace trace = forward(spec, theta, data.x.row(i).transpose());
    feature(i) = trace.h.back()(0);
  }
  report.resnet_risk = affine_fit_risk(feature, data.y);
  report.closed_form = prop1_resnet_closed_form(rho);
  report.resnet_beats_linear = report.resnet_risk < report.r_lin;
  return report;
}

NonMonotoneReport nonmonotone_example() {
  ResNetSpec spec;
  spec.d_x = 1;
  spec.blocks = {BlockSpec::first_affine(1, 1), BlockSpec::general_affine(1, 1)};
  const ThetaLayout layout(spec);

  // h1(x) = x + relu(x - 2); h2(t) = t - 4 relu(t - 3.5); f = h2.
  Vector theta = Vector::Zero(layout.size());
  slice_vec(theta, layout.w())(0) = 1.0;
  const BlockSlices b0 = layout.block(0);
  slice_mat(theta, b0.v)(0, 0) = 1.0;
  slice_mat(theta, b0.zw)(0, 0) = 1.0;
  slice_vec(theta, b0.zb)(0) = -2.0;
  const BlockSlices b1 = layout.block(1);
  slice_mat(theta, b1.u)(0, 0) = 1.0;
  slice_mat(theta, b1.v)(0, 0) = -4.0;
  slice_mat(theta, b1.zw)(0, 0) = 1.0;
  slice_vec(theta, b1.zb)(0) = -3.5;

  Matrix x(3, 1);
  x << 1.0, 2.5, 3.0;
  Vector y(3);
  y << 1.0, 3.0, 2.0;
  const Dataset data = make_dataset(x, y);

  NonMonotoneReport report;
  Vector f1(3);
  Vector f2(3);
  for (int i = 0; i < 3; ++i) {
    const ForwardTrace trace = forward(spec, theta, x.row(i).transpose());
    f1(i) = trace.h[1](0);
    f2(i) = trace.h[2](0);
    report.h1.push_back(f1(i));
    report.h2.push_back(f2(i));
  }

  report.err_x = affine_fit_risk(x.col(0), y);
  report.err_h1 = affine_fit_risk(f1, y);
  report.err_h2 = affine_fit_risk(f2, y);

  const RiskGrad rg = risk_and_grad(spec, theta, data, LossKind::kSquared);
  report.risk = rg.value;
  report.grad_norm = rg.grad.norm();
  report.kink_margin = kink_margin(spec, theta, data);
  report.is_critical = report.grad_norm <= 1e-12 && report.kink_margin > 0.0;
  return report;
}

}  // namespace lab
