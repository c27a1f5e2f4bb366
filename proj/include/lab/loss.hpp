#pragma once

#include <span>
#include <string_view>

#include "lab/errors.hpp"

namespace lab {

enum class LossKind { kSquared, kLogistic };

std::string_view to_string(LossKind kind);
LossKind loss_from_string(std::string_view name);  // throws ParseError(line 0)

// Value and first two derivatives in the prediction p.
struct LossEval {
  double value;
  double d1;
  double d2;
};

// Squared: (p - y)^2 with d1 = 2(p - y), d2 = 2 — no 1/2 factor.
// Logistic: log(1 + exp(-y p)) for labels y in {-1, +1}; others throw
// InvalidLabel. Evaluated in the numerically stable log1p form.
LossEval loss_eval(LossKind kind, double p, double y);

// max_i |d1(p_i; y_i)|. For logistic the result is clamped to <= 1 (the
// a-priori Lipschitz constant); for squared it is the empirical constant.
// Throws EmptyInput on zero points, DimensionMismatch on length mismatch.
double empirical_mu(LossKind kind, std::span<const double> preds,
                    std::span<const double> labels);

}  // namespace lab
