#include "lab/loss.hpp"

#include <algorithm>
#include <cmath>

namespace lab {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kSquared:
      return "squared";
    case LossKind::kLogistic:
      return "logistic";
  }
  return "?";
}

LossKind loss_from_string(std::string_view name) {
  if (name == "squared") return LossKind::kSquared;
  if (name == "logistic") return LossKind::kLogistic;
  throw ParseError("unknown loss '" + std::string(name) + "'", 0);
}

LossEval loss_eval(LossKind kind, double p, double y) {
  if (kind == LossKind::kSquared) {
    const double r = p - y;
    return {r * r, 2.0 * r, 2.0};
  }
  if (y != 1.0 && y != -1.0) {
    throw InvalidLabel("logistic label must be -1 or +1, got " +
                       std::to_string(y));
  }
  const double t = y * p;
  // log(1 + e^-t) without overflow on either sign of t.
  const double value = t >= 0.0 ? std::log1p(std::exp(-t))
                                : -t + std::log1p(std::exp(t));
  // sigmoid(-t) = 1/(1 + e^t), evaluated from the smaller exponential.
  const double sig_neg =
      t >= 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
  const double d1 = -y * sig_neg;
  const double d2 = sig_neg * (1.0 - sig_neg);
  return {value, d1, d2};
}

double empirical_mu(LossKind kind, std::span<const double> preds,
                    std::span<const double> labels) {
  if (preds.size() != labels.size()) {
    throw DimensionMismatch("empirical_mu: " + std::to_string(preds.size()) +
                            " predictions vs " + std::to_string(labels.size()) +
                            " labels");
  }
  if (preds.empty()) throw EmptyInput("empirical_mu: no points");
  double mu = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    mu = std::max(mu, std::abs(loss_eval(kind, preds[i], labels[i]).d1));
  }
  if (kind == LossKind::kLogistic) mu = std::min(1.0, mu);
  return mu;
}

}  // namespace lab
