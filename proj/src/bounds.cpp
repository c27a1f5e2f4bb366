#include "lab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "lab/baseline.hpp"
#include "lab/errors.hpp"
#include "lab/linalg.hpp"
#include "lab/loss.hpp"
#include "lab/parallel.hpp"
#include "lab/rng.hpp"

namespace lab {

std::vector<double> lipschitz_rho(const ResNetSpec& spec, const Vector& theta) {
  ThetaLayout layout(spec);
  if (theta.size() != layout.size()) {
    throw DimensionMismatch("parameter vector does not match architecture");
  }
  std::vector<double> rho;
  rho.reserve(spec.blocks.size());
  for (int l = 0; l < layout.depth(); ++l) {
    const BlockSpec& block = spec.blocks[static_cast<std::size_t>(l)];
    BlockSlices slices = layout.block(l);
    const double v_norm = linalg::spectral_norm(slice_mat(theta, slices.v));
    const double u_norm = block.kind == BlockSpec::Kind::kFirst
                              ? 1.0
                              : linalg::spectral_norm(slice_mat(theta, slices.u));
    if (block.inner == InnerKind::kElementwiseRelu) {
      rho.push_back(v_norm * u_norm);
    } else {
      // relu(Z t + c) vanishes at t = 0 only when every bias is nonpositive;
      // a positive bias breaks the certificate, so refuse rather than guess.
      auto biases = slice_vec(theta, slices.zb);
      if ((biases.array() > 0.0).any()) {
        throw UnsupportedInner(
            "affine inner map with a positive bias has no zero-preserving "
            "Lipschitz certificate");
      }
      const double z_norm = linalg::spectral_norm(slice_mat(theta, slices.zw));
      rho.push_back(v_norm * z_norm * u_norm);
    }
  }
  return rho;
}

double risk_bound_value(const std::vector<double>& rho, double mu,
                        double t_hat_norm, double mean_x_norm, double r_lin) {
  double product = 1.0;
  for (double r : rho) product *= 1.0 + r;
  return r_lin + mu * t_hat_norm * (product - 1.0) * mean_x_norm;
}

RiskBoundReport risk_bound_report(const ResNetSpec& spec, const Vector& theta,
                                  const Dataset& data, LossKind loss) {
  RiskBoundReport rep;
  rep.rho = lipschitz_rho(spec, theta);

  const LinearFit fit = fit_linear(data, loss, /*with_bias=*/false);
  rep.r_lin = fit.risk;
  rep.t_hat_norm = fit.t_hat.norm();
  rep.mean_x_norm = data.x.rowwise().norm().mean();

  if (loss == LossKind::kLogistic) {
    rep.mu = 1.0;
    rep.mu_is_empirical = false;
  } else {
    // Squared loss has no uniform derivative bound; fall back to the
    // empirical maximum of |l'| at this point and flag it.
    const Vector preds = predictions(spec, theta, data.x);
    double mu = 0.0;
    for (Eigen::Index i = 0; i < preds.size(); ++i) {
      mu = std::max(mu, std::abs(loss_eval(loss, preds(i), data.y(i)).d1));
    }
    rep.mu = mu;
    rep.mu_is_empirical = true;
  }

  double product = 1.0;
  for (double r : rep.rho) product *= 1.0 + r;
  rep.product_term = product - 1.0;
  rep.bound = rep.r_lin +
              rep.mu * rep.t_hat_norm * rep.product_term * rep.mean_x_norm;

  const RiskGrad rg = risk_and_grad(spec, theta, data, loss);
  rep.risk = rg.value;
  rep.grad_norm = rg.grad.norm();
  rep.slack = 10.0 * rep.grad_norm * (1.0 + theta.norm());
  rep.holds = rep.risk <= rep.bound + rep.slack;
  return rep;
}

double complexity_bound(double b, int n, const std::vector<double>& m) {
  if (n <= 0) throw std::invalid_argument("sample count must be positive");
  if (b < 0.0) {
    throw std::invalid_argument("sample norm bound must be nonnegative");
  }
  double product = 1.0;
  for (double cap : m) {
    if (cap < 0.0) throw std::invalid_argument("norm caps must be nonnegative");
    product *= 1.0 + 2.0 * cap * cap;
  }
  return b * product / std::sqrt(static_cast<double>(n));
}

ResNetSpec complexity_spec(int d_x, const std::vector<double>& m,
                           const std::vector<int>& widths) {
  if (!widths.empty() && widths.size() != m.size()) {
    throw DimensionMismatch("one width per block is required");
  }
  ResNetSpec spec;
  spec.d_x = d_x;
  for (std::size_t l = 0; l < m.size(); ++l) {
    const int width = widths.empty() ? d_x : widths[l];
    spec.blocks.push_back(BlockSpec::general_relu(width));
  }
  spec.validate();
  return spec;
}

namespace {

// Scale a parameter slice into the Frobenius ball of radius cap.
void project_slice(Vector& theta, const ParamSlice& slice, double cap) {
  if (slice.empty()) return;
  auto block = slice_mat(theta, slice);
  if (cap <= 0.0) {
    block.setZero();
    return;
  }
  const double norm = block.norm();
  if (norm > cap) block *= cap / norm;
}

// Scale a parameter slice onto the sphere of radius cap (for initialization;
// the maximum of a scale-sensitive objective tends to sit on the boundary).
void place_on_sphere(Vector& theta, const ParamSlice& slice, double cap) {
  if (slice.empty()) return;
  auto block = slice_mat(theta, slice);
  if (cap <= 0.0) {
    block.setZero();
    return;
  }
  const double norm = block.norm();
  if (norm > 0.0) block *= cap / norm;
}

// The objective (1/n) sum eps_i f(x_i) is linear in the output weights, so
// given the block parameters the optimal unit w is the normalized feature
// mean. Returns the objective value at the updated point.
double resolve_output_weights(const ResNetSpec& spec, const ThetaLayout& layout,
                              Vector& theta, const Matrix& samples,
                              const Vector& eps) {
  const Vector z = weighted_feature_mean(spec, theta, samples, eps);
  const double z_norm = z.norm();
  if (z_norm > 0.0) {
    slice_vec(theta, layout.w()) = z / z_norm;
    return z_norm;
  }
  return 0.0;
}

}  // namespace

CorrelationMax maximize_correlation(const ResNetSpec& spec,
                                    const std::vector<double>& m,
                                    const Matrix& samples, const Vector& eps,
                                    int restarts, int max_iters, double tol,
                                    std::uint64_t seed,
                                    const Vector* warm_start) {
  const ThetaLayout layout(spec);
  if (static_cast<int>(m.size()) != layout.depth()) {
    throw DimensionMismatch("one norm cap per block is required");
  }
  if (samples.rows() != eps.size()) {
    throw DimensionMismatch("sign vector length must match sample count");
  }
  if (samples.cols() != spec.d_x) {
    throw DimensionMismatch("sample dimension does not match architecture");
  }
  for (const BlockSpec& block : spec.blocks) {
    if (block.inner != InnerKind::kElementwiseRelu) {
      throw UnsupportedInner("complexity family uses bias-free relu blocks");
    }
  }
  if (restarts < 1) throw std::invalid_argument("at least one restart is required");
  if (max_iters < 0) throw std::invalid_argument("iteration budget must be nonnegative");

  double max_cap = 0.0;
  for (double cap : m) max_cap = std::max(max_cap, cap);

  CorrelationMax best;
  best.value = -std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    Rng rng(stream_seed(seed, static_cast<std::uint64_t>(r)));
    Vector theta(layout.size());
    if (r == 0 && warm_start != nullptr) {
      if (warm_start->size() != layout.size()) {
        throw DimensionMismatch("warm start does not match architecture");
      }
      theta = *warm_start;
      for (int l = 0; l < layout.depth(); ++l) {
        const BlockSlices slices = layout.block(l);
        project_slice(theta, slices.u, m[static_cast<std::size_t>(l)]);
        project_slice(theta, slices.v, m[static_cast<std::size_t>(l)]);
      }
    } else {
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = rng.normal();
      for (int l = 0; l < layout.depth(); ++l) {
        const BlockSlices slices = layout.block(l);
        place_on_sphere(theta, slices.u, m[static_cast<std::size_t>(l)]);
        place_on_sphere(theta, slices.v, m[static_cast<std::size_t>(l)]);
      }
    }

    double value = resolve_output_weights(spec, layout, theta, samples, eps);
    double step = 0.25 * (1.0 + max_cap);
    for (int it = 0; it < max_iters; ++it) {
      RiskGrad rg = weighted_output_and_grad(spec, theta, samples, eps);
      Vector direction = rg.grad;
      slice_vec(direction, layout.w()).setZero();
      const double dir_norm = direction.norm();
      if (dir_norm <= tol) break;

      bool accepted = false;
      Vector candidate;
      double candidate_value = 0.0;
      for (int halving = 0; halving < 50 && !accepted; ++halving) {
        candidate = theta + (step / dir_norm) * direction;
        for (int l = 0; l < layout.depth(); ++l) {
          const BlockSlices slices = layout.block(l);
          project_slice(candidate, slices.u, m[static_cast<std::size_t>(l)]);
          project_slice(candidate, slices.v, m[static_cast<std::size_t>(l)]);
        }
        candidate_value =
            resolve_output_weights(spec, layout, candidate, samples, eps);
        if (candidate_value > value + 1e-16) {
          accepted = true;
        } else {
          step *= 0.5;
        }
      }
      if (!accepted) break;

      const double gain = candidate_value - value;
      theta = candidate;
      value = candidate_value;
      step = std::min(step * 2.0, 1e3 * (1.0 + max_cap));
      if (gain <= tol * (1.0 + std::abs(value))) break;
    }

    if (value > best.value) {
      best.value = value;
      best.theta = theta;
    }
  }
  return best;
}

RademacherReport rademacher_estimate(const Matrix& samples,
                                     const RademacherConfig& config) {
  if (samples.rows() == 0) throw EmptyInput("at least one sample is required");
  if (samples.cols() != config.d_x) {
    throw DimensionMismatch("sample dimension does not match configuration");
  }
  const int n = static_cast<int>(samples.rows());

  RademacherReport rep;
  rep.n = n;
  rep.m = config.m;
  rep.restarts = config.restarts;
  rep.exhaustive = config.exhaustive;
  rep.b = samples.rowwise().norm().maxCoeff();
  rep.bound = complexity_bound(rep.b, n, config.m);

  const ResNetSpec spec = complexity_spec(config.d_x, config.m, config.widths);

  std::vector<double> values;
  if (config.exhaustive) {
    if (n > 20) {
      throw std::invalid_argument("exhaustive mode is limited to 20 samples");
    }
    const std::uint64_t patterns = std::uint64_t{1} << n;
    values.resize(patterns);
    parallel_for(static_cast<std::size_t>(patterns), [&](std::size_t p) {
      Vector eps(n);
      for (int i = 0; i < n; ++i) {
        eps(i) = ((p >> i) & 1u) != 0 ? 1.0 : -1.0;
      }
      values[p] = maximize_correlation(spec, config.m, samples, eps,
                                       config.restarts, config.max_iters,
                                       config.tol, stream_seed(config.seed, p))
                      .value;
    });
    rep.trials = static_cast<int>(patterns);
    rep.stderr_ = 0.0;
  } else {
    if (config.trials < 1) {
      throw std::invalid_argument("at least one trial is required");
    }
    values.resize(static_cast<std::size_t>(config.trials));
    parallel_for(static_cast<std::size_t>(config.trials), [&](std::size_t t) {
      // Per-trial streams keep the result independent of the worker count.
      Rng rng(stream_seed(config.seed, t));
      Vector eps(n);
      for (int i = 0; i < n; ++i) eps(i) = rng.sign();
      values[t] = maximize_correlation(
                      spec, config.m, samples, eps, config.restarts,
                      config.max_iters, config.tol,
                      stream_seed(config.seed, 0x100000u + t))
                      .value;
    });
    rep.trials = config.trials;
  }

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  rep.estimate = mean;
  if (!config.exhaustive && values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    rep.stderr_ = std::sqrt(var / static_cast<double>(values.size()));
  }
  return rep;
}

}  // namespace lab
