/*!
 * \file tlforge/decode.hpp
 * \brief Grammar masking of logits and greedy (constrained or plain) decoding.
 */
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlforge/grammar.hpp"
#include "tlforge/model.hpp"

namespace tlforge {

class DecodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/*! \brief Copy of `row` with every entry outside `valid` set to -infinity. */
std::vector<double> mask_logits(std::span<const double> row, TokenSet valid);

/*!
 * \brief Softmax renormalized over `valid`. Masked entries and entries whose
 *        logit is -infinity come out exactly 0.
 * \throws DecodeError if `valid` is empty or selects no finite logit.
 */
std::vector<double> constrained_softmax(std::span<const double> row, TokenSet valid);

/*! \brief Highest-scoring id in `valid`; the lowest id wins ties. */
TokenId masked_argmax(std::span<const double> row, TokenSet valid);

/*!
 * \brief Greedy decoding of at most `max_len` tokens (EOS included).
 *
 * Constrained: every step picks from the budget-aware valid set of the
 * grammar state threaded over the model's own outputs, so the result always
 * ends in EOS after a complete formula. Unconstrained: plain argmax, stopping
 * at EOS or max_len.
 */
std::vector<TokenId> greedy_decode(const ModelParams& params, std::span<const int> src,
                                   std::size_t max_len, bool constrained,
                                   const LtlGrammar& grammar);

/*!
 * \brief Decode then parse. In unconstrained mode an ill-formed output
 *        raises ModelError(kParseFailure).
 */
Formula translate(const ModelParams& params, const SourceVocab& vocab,
                  std::span<const std::string> lifted_nl_tokens, bool constrained,
                  std::size_t max_len, const LtlGrammar& grammar);

/*! \brief Parse decoder output: a formula followed by exactly one trailing EOS. */
ParseOutcome parse_decoded(std::span<const TokenId> tokens, const TlVocab& vocab);

}  // namespace tlforge
