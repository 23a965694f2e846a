/*!
 * \file grammar.cpp
 */
#include "tlforge/grammar.hpp"

namespace tlforge {

TokenSet TokenSet::full(int universe) {
  if (universe < 0 || universe > 64) throw std::invalid_argument("TokenSet universe must be <= 64");
  return TokenSet(universe == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << universe) - 1);
}

TokenSet TokenSet::of(std::initializer_list<TokenId> ids) {
  TokenSet s;
  for (TokenId id : ids) s.insert(id);
  return s;
}

std::vector<TokenId> TokenSet::ids() const {
  std::vector<TokenId> out;
  out.reserve(static_cast<std::size_t>(size()));
  std::uint64_t b = bits_;
  while (b != 0) {
    out.push_back(static_cast<TokenId>(std::countr_zero(b)));
    b &= b - 1;
  }
  return out;
}

GrammarError::GrammarError(GrammarErrorKind kind, TokenId token, std::size_t consumed)
    : std::runtime_error(kind == GrammarErrorKind::kInvalidToken
                             ? "InvalidToken: token " + std::to_string(token) +
                                   " not valid after " + std::to_string(consumed) + " tokens"
                             : "TerminalState: no tokens are valid after EOS"),
      kind_(kind),
      token_(token),
      consumed_(consumed) {}

LtlGrammar::LtlGrammar(TlVocab vocab) : vocab_(vocab) {
  for (int i = 1; i <= vocab_.max_props(); ++i) props_.insert(vocab_.prop_id(i));
  for (TokenKind k : {TokenKind::kNot, TokenKind::kNext, TokenKind::kEventually,
                      TokenKind::kAlways}) {
    unary_.insert(vocab_.id_of(k));
  }
  lparen_.insert(vocab_.id_of(TokenKind::kLParen));

  by_expect_[static_cast<int>(Expect::kFormula)] = props_ | unary_ | lparen_;
  by_expect_[static_cast<int>(Expect::kBinop)] =
      TokenSet::of({vocab_.id_of(TokenKind::kAnd), vocab_.id_of(TokenKind::kOr),
                    vocab_.id_of(TokenKind::kImplies), vocab_.id_of(TokenKind::kUntil)});
  by_expect_[static_cast<int>(Expect::kRParen)] = TokenSet::of({vocab_.id_of(TokenKind::kRParen)});
  by_expect_[static_cast<int>(Expect::kEos)] = TokenSet::of({vocab_.id_of(TokenKind::kEos)});
}

GrammarState LtlGrammar::init_state() const {
  GrammarState s;
  s.stack_ = {Expect::kEos, Expect::kFormula};
  return s;
}

void LtlGrammar::advance(GrammarState& s, TokenId t) const {
  if (s.stack_.empty()) throw GrammarError(GrammarErrorKind::kInvalidToken, t, s.consumed_);
  const Expect top = s.stack_.back();
  if (!for_expect(top).contains(t)) {
    throw GrammarError(GrammarErrorKind::kInvalidToken, t, s.consumed_);
  }
  switch (top) {
    case Expect::kFormula:
      if (props_.contains(t)) {
        s.stack_.pop_back();
      } else if (lparen_.contains(t)) {
        s.stack_.back() = Expect::kRParen;
        s.stack_.push_back(Expect::kFormula);
        s.stack_.push_back(Expect::kBinop);
        s.stack_.push_back(Expect::kFormula);
      }
      // Unary operators leave the formula expectation in place.
      break;
    case Expect::kBinop:
    case Expect::kRParen:
    case Expect::kEos:
      s.stack_.pop_back();
      break;
  }
  ++s.consumed_;
}

GrammarState LtlGrammar::update(GrammarState s, TokenId t) const {
  advance(s, t);
  return s;
}

TokenSet LtlGrammar::valid_tokens(const GrammarState& s) const {
  if (s.stack_.empty()) throw GrammarError(GrammarErrorKind::kTerminalState, -1, s.consumed_);
  return for_expect(s.stack_.back());
}

TokenSet LtlGrammar::valid_tokens(const GrammarState& s, std::size_t remaining) const {
  TokenSet valid = valid_tokens(s);
  if (s.stack_.back() != Expect::kFormula) return valid;
  // Only the formula expectation offers tokens that do not shrink the stack:
  // a unary keeps the cost, LPAREN adds three. Keep a token only if the cost
  // after it still fits in the budget left after emitting it.
  const std::size_t cost = s.stack_.size();
  if (remaining < cost + 1) {
    valid = valid & props_;
  } else if (remaining < cost + 4) {
    valid = valid & (props_ | unary_);
  }
  return valid;
}

bool LtlGrammar::accepts(std::span<const TokenId> tokens) const {
  GrammarState s = init_state();
  for (TokenId t : tokens) {
    if (s.stack_.empty() || !for_expect(s.stack_.back()).contains(t)) return false;
    advance(s, t);
  }
  return is_accepting(s);
}

std::vector<TokenSet> LtlGrammar::valid_sets_along(std::span<const TokenId> tokens) const {
  std::vector<TokenSet> out;
  out.reserve(tokens.size());
  GrammarState s = init_state();
  for (TokenId t : tokens) {
    out.push_back(valid_tokens(s));
    advance(s, t);
  }
  return out;
}

}  // namespace tlforge
