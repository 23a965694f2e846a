/*!
 * \file tlforge/loss.hpp
 * \brief Standard and grammar-forced cross-entropy on a single logits row,
 *        their analytic gradients, and the gradient second-moment estimate.
 *
 * Logit entries equal to -infinity are masked: they contribute nothing to
 * the normalizer and receive exactly zero probability and gradient.
 */
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tlforge/grammar.hpp"

namespace tlforge {

enum class LossErrorKind { kTargetMasked, kTargetNotValid, kEmptyBatch };

class LossError : public std::runtime_error {
 public:
  LossError(LossErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  LossErrorKind kind() const { return kind_; }

 private:
  LossErrorKind kind_;
};

/*! \brief -log softmax(z)[y] over the full vocabulary. */
double cross_entropy(std::span<const double> z, TokenId y);

/*! \brief -log of the distribution renormalized over `valid`; requires y in valid. */
double forced_cross_entropy(std::span<const double> z, TokenId y, TokenSet valid);

/*! \brief p(k) - 1[k == y]. */
std::vector<double> grad_ce(std::span<const double> z, TokenId y);

/*! \brief p'(k) - 1[k == y] on valid, exactly 0.0 elsewhere. */
std::vector<double> grad_forced_ce(std::span<const double> z, TokenId y, TokenSet valid);

/*!
 * \brief Fused loss + gradient written into `grad` (overwritten), scaled by
 *        `scale`. With `valid` == nullptr this is the standard loss.
 * \return the unscaled loss.
 */
double loss_and_grad(std::span<const double> z, TokenId y, const TokenSet* valid, double scale,
                     std::span<double> grad);

/*! \brief Mean squared Euclidean norm over a batch of gradient vectors. */
double grad_second_moment(std::span<const std::vector<double>> grads);

}  // namespace tlforge
