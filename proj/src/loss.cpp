/*!
 * \file loss.cpp
 */
#include "tlforge/loss.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tlforge {
namespace {

bool included(std::size_t k, const TokenSet* valid) {
  return valid == nullptr || valid->contains(static_cast<TokenId>(k));
}

// Shift and normalizer over the finite entries selected by `valid`.
struct LogNormalizer {
  double shift;
  double sum;
};

LogNormalizer normalizer(std::span<const double> z, const TokenSet* valid) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (included(k, valid) && std::isfinite(z[k]) && z[k] > m) m = z[k];
  }
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (included(k, valid) && std::isfinite(z[k])) s += std::exp(z[k] - m);
  }
  return {m, s};
}

void check_target(std::span<const double> z, TokenId y, const TokenSet* valid) {
  if (y < 0 || static_cast<std::size_t>(y) >= z.size()) {
    throw std::out_of_range("target id " + std::to_string(y) + " outside logits row");
  }
  if (valid != nullptr && !valid->contains(y)) {
    throw LossError(LossErrorKind::kTargetNotValid,
                    "TargetNotValid: target " + std::to_string(y) + " is not in the valid set");
  }
  if (!std::isfinite(z[static_cast<std::size_t>(y)])) {
    throw LossError(LossErrorKind::kTargetMasked,
                    "TargetMasked: target " + std::to_string(y) + " has a -inf logit");
  }
}

double loss_impl(std::span<const double> z, TokenId y, const TokenSet* valid) {
  check_target(z, y, valid);
  const LogNormalizer n = normalizer(z, valid);
  return (n.shift + std::log(n.sum)) - z[static_cast<std::size_t>(y)];
}

std::vector<double> grad_impl(std::span<const double> z, TokenId y, const TokenSet* valid) {
  std::vector<double> g(z.size(), 0.0);
  loss_and_grad(z, y, valid, 1.0, g);
  return g;
}

}  // namespace

double cross_entropy(std::span<const double> z, TokenId y) { return loss_impl(z, y, nullptr); }

double forced_cross_entropy(std::span<const double> z, TokenId y, TokenSet valid) {
  return loss_impl(z, y, &valid);
}

std::vector<double> grad_ce(std::span<const double> z, TokenId y) {
  return grad_impl(z, y, nullptr);
}

std::vector<double> grad_forced_ce(std::span<const double> z, TokenId y, TokenSet valid) {
  return grad_impl(z, y, &valid);
}

double loss_and_grad(std::span<const double> z, TokenId y, const TokenSet* valid, double scale,
                     std::span<double> grad) {
  check_target(z, y, valid);
  const LogNormalizer n = normalizer(z, valid);
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (included(k, valid) && std::isfinite(z[k])) {
      grad[k] = scale * (std::exp(z[k] - n.shift) / n.sum);
    } else {
      grad[k] = 0.0;
    }
  }
  grad[static_cast<std::size_t>(y)] -= scale;
  return (n.shift + std::log(n.sum)) - z[static_cast<std::size_t>(y)];
}

double grad_second_moment(std::span<const std::vector<double>> grads) {
  if (grads.empty()) throw LossError(LossErrorKind::kEmptyBatch, "EmptyBatch: no gradients");
  double total = 0.0;
  for (const auto& g : grads) {
    double sq = 0.0;
    for (double v : g) sq += v * v;
    total += sq;
  }
  return total / static_cast<double>(grads.size());
}

}  // namespace tlforge
