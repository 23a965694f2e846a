/*!
 * \file decode.cpp
 */
#include "tlforge/decode.hpp"

#include <cmath>
#include <limits>

namespace tlforge {

std::vector<double> mask_logits(std::span<const double> row, TokenSet valid) {
  if (valid.empty()) throw DecodeError("EmptyValidSet: no token is valid");
  std::vector<double> out(row.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (valid.contains(static_cast<TokenId>(k))) out[k] = row[k];
  }
  return out;
}

std::vector<double> constrained_softmax(std::span<const double> row, TokenSet valid) {
  if (valid.empty()) throw DecodeError("EmptyValidSet: no token is valid");
  // -inf entries are skipped rather than exponentiated; max - max of two
  // infinities would be NaN.
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (valid.contains(static_cast<TokenId>(k)) && std::isfinite(row[k])) m = std::max(m, row[k]);
  }
  if (!std::isfinite(m)) throw DecodeError("EmptyValidSet: every valid token has a -inf logit");
  std::vector<double> probs(row.size(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (valid.contains(static_cast<TokenId>(k)) && std::isfinite(row[k])) {
      probs[k] = std::exp(row[k] - m);
      sum += probs[k];
    }
  }
  for (double& p : probs) p /= sum;
  return probs;
}

TokenId masked_argmax(std::span<const double> row, TokenSet valid) {
  TokenId best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (!valid.contains(static_cast<TokenId>(k))) continue;
    if (best < 0 || row[k] > best_score) {
      best = static_cast<TokenId>(k);
      best_score = row[k];
    }
  }
  if (best < 0) throw DecodeError("EmptyValidSet: no token is valid");
  return best;
}

std::vector<TokenId> greedy_decode(const ModelParams& params, std::span<const int> src,
                                   std::size_t max_len, bool constrained,
                                   const LtlGrammar& grammar) {
  if (max_len < 2) throw DecodeError("max_len must be >= 2");
  const int V = grammar.vocab().size();
  const TokenSet everything = TokenSet::full(V);
  DecoderSession session(params, src);
  GrammarState state = grammar.init_state();
  std::vector<TokenId> out;
  TokenId prev = kEosId;
  while (out.size() < max_len) {
    std::span<const double> z = session.step(prev);
    TokenId next;
    if (constrained) {
      const TokenSet valid = grammar.valid_tokens(state, max_len - out.size());
      next = masked_argmax(z, valid);
      grammar.advance(state, next);
    } else {
      next = masked_argmax(z, everything);
    }
    out.push_back(next);
    if (next == kEosId) break;
    prev = next;
  }
  return out;
}

ParseOutcome parse_decoded(std::span<const TokenId> tokens, const TlVocab& vocab) {
  if (tokens.empty() || tokens.back() != kEosId) {
    // Missing EOS: report where it should have been.
    ParseOutcome body = try_parse_tokens(tokens, vocab);
    if (!body.ok()) return body;
    ParseOutcome r;
    r.error = FormulaErrorKind::kUnexpectedToken;
    r.position = tokens.size();
    return r;
  }
  return try_parse_tokens(tokens.first(tokens.size() - 1), vocab);
}

Formula translate(const ModelParams& params, const SourceVocab& vocab,
                  std::span<const std::string> lifted_nl_tokens, bool constrained,
                  std::size_t max_len, const LtlGrammar& grammar) {
  std::vector<int> src = vocab.encode(lifted_nl_tokens);
  if (src.empty()) throw ModelError(ModelErrorKind::kEmptySource, "EmptySource: nothing to translate");
  std::vector<TokenId> out = greedy_decode(params, src, max_len, constrained, grammar);
  ParseOutcome parsed = parse_decoded(out, grammar.vocab());
  if (!parsed.ok()) {
    throw ModelError(ModelErrorKind::kParseFailure,
                     std::string("ParseFailure: ") + to_string(parsed.error) + " at token " +
                         std::to_string(parsed.position));
  }
  return std::move(*parsed.formula);
}

}  // namespace tlforge
