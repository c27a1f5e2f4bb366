#pragma once

#include <string>
#include <vector>

#include "lab/dataset.hpp"
#include "lab/linalg.hpp"
#include "lab/loss.hpp"

namespace lab {

// Inner nonlinearity of a residual block.
//   kElementwiseRelu: phi(t) = relu(t), width preserved.
//   kAffineRelu:      phi(t) = relu(Z t + c), learned Z (hidden x m) and
//                     c (hidden); biases live inside phi's parameters.
enum class InnerKind { kElementwiseRelu, kAffineRelu };

// One residual block h -> h + V phi(U h).
//   kFirst:        no U; the inner reads the raw input (legal at slot 0 only).
//   kGeneral:      full form with U (m x d_x), V (d_x x n).
//   kSimpleVector: h -> h + v relu(u^T h) with u, v in R^{d_x} (m = n = 1);
//                  shares the general math path.
struct BlockSpec {
  enum class Kind { kFirst, kGeneral, kSimpleVector };
  Kind kind = Kind::kGeneral;
  InnerKind inner = InnerKind::kElementwiseRelu;
  int m = 0;  // inner input width
  int n = 0;  // inner output width == columns of V

  static BlockSpec first_relu(int d_x);
  static BlockSpec first_affine(int d_x, int hidden);
  static BlockSpec general_relu(int m);
  static BlockSpec general_affine(int m, int hidden);
  static BlockSpec simple_vector();
};

// Residual network f(x) = w^T h_L(x), h_0 = x, h_l = h_{l-1} + block_l.
struct ResNetSpec {
  int d_x = 0;
  std::vector<BlockSpec> blocks;

  int depth() const { return static_cast<int>(blocks.size()); }
  void validate() const;  // throws DimensionMismatch on inconsistencies
};

// Slice of the flat parameter vector holding one row-major matrix.
struct ParamSlice {
  int offset = 0;
  int rows = 0;
  int cols = 0;
  int size() const { return rows * cols; }
  bool empty() const { return size() == 0; }
};

// Index map from (block, parameter name) to flat offsets. Order: w first,
// then per block U, V, Z, c (those present). Empty slices mark absent params.
struct BlockSlices {
  ParamSlice u, v, zw, zb;
};

class ThetaLayout {
 public:
  explicit ThetaLayout(const ResNetSpec& spec);
  int size() const { return total_; }
  const ParamSlice& w() const { return w_; }
  const BlockSlices& block(int i) const { return blocks_.at(i); }
  int depth() const { return static_cast<int>(blocks_.size()); }

 private:
  ParamSlice w_;
  std::vector<BlockSlices> blocks_;
  int total_ = 0;
};

// Read-only / mutable views of a slice inside a flat vector.
Eigen::Map<const Matrix> slice_mat(const Vector& theta, const ParamSlice& s);
Eigen::Map<Matrix> slice_mat(Vector& theta, const ParamSlice& s);
Eigen::Map<const Vector> slice_vec(const Vector& theta, const ParamSlice& s);
Eigen::Map<Vector> slice_vec(Vector& theta, const ParamSlice& s);

// Everything the backward pass needs, kept per block.
struct BlockTrace {
  Vector s;       // inner input: U h_{l-1} (or x for a first block)
  Vector preact;  // ReLU preactivation: s, or Z s + c for affine inners
  Vector phi;     // relu(preact)
};

struct ForwardTrace {
  std::vector<Vector> h;  // h[0] = x, ..., h[L]
  std::vector<BlockTrace> blocks;
  double output = 0.0;
};

// Single forward pass; h_0 == x exactly.
ForwardTrace forward(const ResNetSpec& spec, const Vector& theta,
                     const Vector& x);

// Per-example outputs f(x_i).
Vector predictions(const ResNetSpec& spec, const Vector& theta,
                   const Matrix& xs);

// Empirical risk (1/n) sum of losses.
double risk(const ResNetSpec& spec, const Vector& theta, const Dataset& data,
            LossKind loss);

struct RiskGrad {
  double value = 0.0;
  Vector grad;
};

// Risk plus its exact analytic gradient (reverse mode, relu'(0) = 0).
RiskGrad risk_and_grad(const ResNetSpec& spec, const Vector& theta,
                       const Dataset& data, LossKind loss);

// (1/n) sum_i weights_i f(x_i) and its gradient in theta. Used by the
// complexity estimator where the "loss" is a signed correlation.
RiskGrad weighted_output_and_grad(const ResNetSpec& spec, const Vector& theta,
                                  const Matrix& xs, const Vector& weights);

// Mean of weights_i * h_L(x_i): the exact maximizer direction for w when the
// objective is linear in w.
Vector weighted_feature_mean(const ResNetSpec& spec, const Vector& theta,
                             const Matrix& xs, const Vector& weights);

// Smallest |preactivation| over all examples, blocks and units: the distance
// to the nearest ReLU kink. +infinity when the network has no ReLU input
// (e.g. zero blocks).
double kink_margin(const ResNetSpec& spec, const Vector& theta,
                   const Dataset& data);

// Hessian of the risk by central differences of the analytic gradient.
// Per-coordinate step is step*(1+|theta_i|). Requires kink_margin > 2*step
// (KinkTooClose otherwise) and at most 5000 parameters.
Matrix hessian_fd(const ResNetSpec& spec, const Vector& theta,
                  const Dataset& data, LossKind loss, double step = 1e-5);

}  // namespace lab
