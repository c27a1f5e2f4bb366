#include "lab/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lab {

BlockSpec BlockSpec::first_relu(int d_x) {
  return {Kind::kFirst, InnerKind::kElementwiseRelu, d_x, d_x};
}

BlockSpec BlockSpec::first_affine(int d_x, int hidden) {
  return {Kind::kFirst, InnerKind::kAffineRelu, d_x, hidden};
}

BlockSpec BlockSpec::general_relu(int m) {
  return {Kind::kGeneral, InnerKind::kElementwiseRelu, m, m};
}

BlockSpec BlockSpec::general_affine(int m, int hidden) {
  return {Kind::kGeneral, InnerKind::kAffineRelu, m, hidden};
}

BlockSpec BlockSpec::simple_vector() {
  return {Kind::kSimpleVector, InnerKind::kElementwiseRelu, 1, 1};
}

void ResNetSpec::validate() const {
  if (d_x < 1) throw DimensionMismatch("spec: d_x must be >= 1");
  for (int l = 0; l < depth(); ++l) {
    const BlockSpec& b = blocks[l];
    auto fail = [l](const char* why) {
      throw DimensionMismatch("spec: block " + std::to_string(l + 1) + ": " + why);
    };
    if (b.kind == BlockSpec::Kind::kFirst && l != 0) {
      fail("a first-style block is only legal at slot 1");
    }
    if (b.kind == BlockSpec::Kind::kSimpleVector) {
      if (b.m != 1 || b.n != 1 || b.inner != InnerKind::kElementwiseRelu) {
        fail("simple vector block must have m = n = 1");
      }
      continue;
    }
    if (b.m < 1 || b.n < 1) fail("widths must be >= 1");
    if (b.kind == BlockSpec::Kind::kFirst && b.m != d_x) {
      fail("first block reads the raw input, m must equal d_x");
    }
    if (b.inner == InnerKind::kElementwiseRelu && b.n != b.m) {
      fail("elementwise inner preserves width (n == m)");
    }
  }
}

ThetaLayout::ThetaLayout(const ResNetSpec& spec) {
  spec.validate();
  int off = 0;
  auto claim = [&off](int rows, int cols) {
    ParamSlice s{off, rows, cols};
    off += rows * cols;
    return s;
  };
  w_ = claim(spec.d_x, 1);
  blocks_.resize(spec.depth());
  for (int l = 0; l < spec.depth(); ++l) {
    const BlockSpec& b = spec.blocks[l];
    BlockSlices& s = blocks_[l];
    const bool has_u = b.kind != BlockSpec::Kind::kFirst;
    if (has_u) s.u = claim(b.m, spec.d_x);
    s.v = claim(spec.d_x, b.n);
    if (b.inner == InnerKind::kAffineRelu) {
      s.zw = claim(b.n, b.m);
      s.zb = claim(b.n, 1);
    }
  }
  total_ = off;
}

Eigen::Map<const Matrix> slice_mat(const Vector& theta, const ParamSlice& s) {
  return {theta.data() + s.offset, s.rows, s.cols};
}

Eigen::Map<Matrix> slice_mat(Vector& theta, const ParamSlice& s) {
  return {theta.data() + s.offset, s.rows, s.cols};
}

Eigen::Map<const Vector> slice_vec(const Vector& theta, const ParamSlice& s) {
  return {theta.data() + s.offset, s.size()};
}

Eigen::Map<Vector> slice_vec(Vector& theta, const ParamSlice& s) {
  return {theta.data() + s.offset, s.size()};
}

namespace {

void check_theta(const ThetaLayout& layout, const Vector& theta) {
  if (theta.size() != layout.size()) {
    throw DimensionMismatch("theta has " + std::to_string(theta.size()) +
                            " entries, layout needs " +
                            std::to_string(layout.size()));
  }
}

// Reusable forward/backward engine. All buffer sizes are fixed by the block
// structure, so per-example work is allocation-free after the first pass.
class Evaluator {
 public:
  explicit Evaluator(const ResNetSpec& spec) : spec_(spec), layout_(spec) {
    trace_.h.resize(spec.depth() + 1);
    trace_.blocks.resize(spec.depth());
  }

  const ThetaLayout& layout() const { return layout_; }

  void forward(const Vector& theta, const Eigen::Ref<const Vector>& x,
               ForwardTrace& t) const {
    if (x.size() != spec_.d_x) {
      throw DimensionMismatch("input has " + std::to_string(x.size()) +
                              " entries, spec has d_x = " +
                              std::to_string(spec_.d_x));
    }
    t.h.resize(spec_.depth() + 1);
    t.blocks.resize(spec_.depth());
    t.h[0] = x;
    for (int l = 0; l < spec_.depth(); ++l) {
      const BlockSpec& b = spec_.blocks[l];
      const BlockSlices& s = layout_.block(l);
      BlockTrace& bt = t.blocks[l];
      if (b.kind == BlockSpec::Kind::kFirst) {
        bt.s = t.h[0];
      } else {
        bt.s.noalias() = slice_mat(theta, s.u) * t.h[l];
      }
      if (b.inner == InnerKind::kAffineRelu) {
        bt.preact.noalias() = slice_mat(theta, s.zw) * bt.s;
        bt.preact += slice_vec(theta, s.zb);
      } else {
        bt.preact = bt.s;
      }
      bt.phi = bt.preact.cwiseMax(0.0);
      t.h[l + 1] = t.h[l];
      t.h[l + 1].noalias() += slice_mat(theta, s.v) * bt.phi;
    }
    t.output = slice_vec(theta, layout_.w()).dot(t.h[spec_.depth()]);
  }

  // Accumulates weight * d(output)/d(theta) into grad.
  void backprop(const Vector& theta, const ForwardTrace& t, double weight,
                Vector& grad) {
    const int L = spec_.depth();
    q_ = slice_vec(theta, layout_.w());
    slice_vec(grad, layout_.w()) += weight * t.h[L];
    for (int l = L - 1; l >= 0; --l) {
      const BlockSpec& b = spec_.blocks[l];
      const BlockSlices& s = layout_.block(l);
      const BlockTrace& bt = t.blocks[l];
      r_.noalias() = slice_mat(theta, s.v).transpose() * q_;
      slice_mat(grad, s.v).noalias() += weight * (q_ * bt.phi.transpose());
      // relu'(0) = 0 by convention: strictly positive preactivations only.
      d_ = r_;
      for (Eigen::Index k = 0; k < d_.size(); ++k) {
        if (!(bt.preact(k) > 0.0)) d_(k) = 0.0;
      }
      if (b.inner == InnerKind::kAffineRelu) {
        slice_vec(grad, s.zb) += weight * d_;
        slice_mat(grad, s.zw).noalias() += weight * (d_ * bt.s.transpose());
        ds_.noalias() = slice_mat(theta, s.zw).transpose() * d_;
      } else {
        ds_ = d_;
      }
      if (b.kind != BlockSpec::Kind::kFirst) {
        slice_mat(grad, s.u).noalias() += weight * (ds_ * t.h[l].transpose());
        q_.noalias() += slice_mat(theta, s.u).transpose() * ds_;
      }
    }
  }

  ForwardTrace trace_;  // scratch for callers that loop over examples

 private:
  const ResNetSpec& spec_;
  ThetaLayout layout_;
  Vector q_, r_, d_, ds_;
};

}  // namespace

ForwardTrace forward(const ResNetSpec& spec, const Vector& theta,
                     const Vector& x) {
  Evaluator ev(spec);
  check_theta(ev.layout(), theta);
  ForwardTrace t;
  ev.forward(theta, x, t);
  return t;
}

Vector predictions(const ResNetSpec& spec, const Vector& theta,
                   const Matrix& xs) {
  Evaluator ev(spec);
  check_theta(ev.layout(), theta);
  Vector out(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    ev.forward(theta, xs.row(i).transpose(), ev.trace_);
    out(i) = ev.trace_.output;
  }
  return out;
}

double risk(const ResNetSpec& spec, const Vector& theta, const Dataset& data,
            LossKind loss) {
  Evaluator ev(spec);
  check_theta(ev.layout(), theta);
  double total = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    ev.forward(theta, data.x.row(i).transpose(), ev.trace_);
    total += loss_eval(loss, ev.trace_.output, data.y(i)).value;
  }
  return total / data.n();
}

RiskGrad risk_and_grad(const ResNetSpec& spec, const Vector& theta,
                       const Dataset& data, LossKind loss) {
  Evaluator ev(spec);
  check_theta(ev.layout(), theta);
  RiskGrad out;
  out.grad = Vector::Zero(theta.size());
  const double inv_n = 1.0 / data.n();
  for (int i = 0; i < data.n(); ++i) {
    ev.forward(theta, data.x.row(i).transpose(), ev.trace_);
    const LossEval e = loss_eval(loss, ev.trace_.output, data.y(i));
    out.value += inv_n * e.value;
    ev.backprop(theta, ev.trace_, inv_n * e.d1, out.grad);
  }
  return out;
}

RiskGrad weighted_output_and_grad(const ResNetSpec& spec, const Vector& theta,
                                  const Matrix& xs, const Vector& weights) {
  if (xs.rows() != weights.size()) {
    throw DimensionMismatch("weighted_output_and_grad: sample/weight mismatch");
  }
  Evaluator ev(spec);
  check_theta(ev.layout(), theta);
  RiskGrad out;
  out.grad = Vector::Zero(theta.size());
  const double inv_n = 1.0 / static_cast<double>(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    ev.forward(theta, xs.row(i).transpose(), ev.trace_);
    out.value += inv_n * weights(i) * ev.trace_.output;
    ev.backprop(theta, ev.trace_, inv_n * weights(i), out.grad);
  }
  return out;
}

Vector weighted_feature_mean(const ResNetSpec& spec, const Vector& theta,
                             const Matrix& xs, const Vector& weights) {
  if (xs.rows() != weights.size()) {
    throw DimensionMismatch("weighted_feature_mean: sample/weight mismatch");
  }
  Evaluator ev(spec);
  check_theta(ev.layout(), theta);
  Vector mean = Vector::Zero(spec.d_x);
  const double inv_n = 1.0 / static_cast<double>(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    ev.forward(theta, xs.row(i).transpose(), ev.trace_);
    mean += inv_n * weights(i) * ev.trace_.h[spec.depth()];
  }
  return mean;
}

double kink_margin(const ResNetSpec& spec, const Vector& theta,
                   const Dataset& data) {
  Evaluator ev(spec);
  check_theta(ev.layout(), theta);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < data.n(); ++i) {
    ev.forward(theta, data.x.row(i).transpose(), ev.trace_);
    for (const BlockTrace& bt : ev.trace_.blocks) {
      for (Eigen::Index k = 0; k < bt.preact.size(); ++k) {
        margin = std::min(margin, std::abs(bt.preact(k)));
      }
    }
  }
  return margin;
}

Matrix hessian_fd(const ResNetSpec& spec, const Vector& theta,
                  const Dataset& data, LossKind loss, double step) {
  const ThetaLayout layout(spec);
  check_theta(layout, theta);
  const int p = layout.size();
  if (p > 5000) {
    throw std::invalid_argument("hessian_fd: parameter count " +
                                std::to_string(p) + " exceeds the 5000 cap");
  }
  const double margin = kink_margin(spec, theta, data);
  if (!(margin > 2.0 * step)) {
    throw KinkTooClose("hessian_fd: kink margin " + std::to_string(margin) +
                       " is not above twice the step " + std::to_string(step));
  }
  Matrix h(p, p);
  Vector probe = theta;
  for (int i = 0; i < p; ++i) {
    const double hi = step * (1.0 + std::abs(theta(i)));
    probe(i) = theta(i) + hi;
    const Vector gp = risk_and_grad(spec, probe, data, loss).grad;
    probe(i) = theta(i) - hi;
    const Vector gm = risk_and_grad(spec, probe, data, loss).grad;
    probe(i) = theta(i);
    h.col(i) = (gp - gm) / (2.0 * hi);
  }
  // Exact Hessians are symmetric; differencing noise is split evenly.
  h = 0.5 * (h + h.transpose()).eval();
  return h;
}

}  // namespace lab
