/*!
 * \file tlforge/formula.hpp
 * \brief LTL abstract syntax, the surface token vocabulary, and the
 *        parser/printer for the fully parenthesized prefix surface form.
 *
 * Surface grammar:
 *
 *   phi ::= prop_i | U phi | "(" phi B phi ")"
 *   U   ::= NOT | X | F | G          (unicode: ¬ ○ ◇ □)
 *   B   ::= AND | OR | IMPLIES | UNTIL (unicode: ∧ ∨ ⇒ ∪)
 *
 * The grammar is LL(1): the first token of a formula selects its production.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tlforge {

enum class Op : std::uint8_t {
  kProp,
  kNot,
  kNext,
  kEventually,
  kAlways,
  kAnd,
  kOr,
  kImplies,
  kUntil,
};

inline constexpr bool is_unary(Op op) {
  return op == Op::kNot || op == Op::kNext || op == Op::kEventually || op == Op::kAlways;
}
inline constexpr bool is_binary(Op op) {
  return op == Op::kAnd || op == Op::kOr || op == Op::kImplies || op == Op::kUntil;
}

/*!
 * \brief Immutable LTL formula tree. Copies share structure, so a Formula is
 *        cheap to pass by value and safe to share across threads.
 */
class Formula {
 public:
  static Formula Prop(int index);
  static Formula Unary(Op op, Formula child);
  static Formula Binary(Op op, Formula lhs, Formula rhs);

  static Formula Not(Formula f) { return Unary(Op::kNot, std::move(f)); }
  static Formula Next(Formula f) { return Unary(Op::kNext, std::move(f)); }
  static Formula Eventually(Formula f) { return Unary(Op::kEventually, std::move(f)); }
  static Formula Always(Formula f) { return Unary(Op::kAlways, std::move(f)); }
  static Formula And(Formula a, Formula b) { return Binary(Op::kAnd, std::move(a), std::move(b)); }
  static Formula Or(Formula a, Formula b) { return Binary(Op::kOr, std::move(a), std::move(b)); }
  static Formula Implies(Formula a, Formula b) {
    return Binary(Op::kImplies, std::move(a), std::move(b));
  }
  static Formula Until(Formula a, Formula b) {
    return Binary(Op::kUntil, std::move(a), std::move(b));
  }

  Op op() const { return node_->op; }
  /*! \brief Proposition index (>= 1). Only meaningful when op() == kProp. */
  int prop() const { return node_->prop; }
  /*! \brief Operand of a unary node. */
  Formula child() const { return Formula(node_->lhs); }
  Formula lhs() const { return Formula(node_->lhs); }
  Formula rhs() const { return Formula(node_->rhs); }

  bool is_prop() const { return op() == Op::kProp; }

  /*! \brief Number of nodes. */
  std::size_t size() const;
  /*! \brief Height of the tree; a bare proposition has depth 1. */
  int depth() const;
  /*! \brief Largest proposition index that occurs. */
  int max_prop() const;
  /*! \brief Proposition indices in left-to-right (prefix) order, with repeats. */
  std::vector<int> props_in_order() const;

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    Op op = Op::kProp;
    int prop = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/*! \brief Structural equality. No commutativity or temporal rewriting. */
bool ast_equal(const Formula& a, const Formula& b);

// ---------------------------------------------------------------------------
// Surface vocabulary
// ---------------------------------------------------------------------------

using TokenId = std::int32_t;

enum class TokenKind : std::uint8_t {
  kEos,
  kLParen,
  kRParen,
  kNot,
  kNext,
  kEventually,
  kAlways,
  kAnd,
  kOr,
  kImplies,
  kUntil,
  kProp,
};

inline constexpr int kNumFixedTokens = 11;
inline constexpr int kDefaultMaxProps = 5;
inline constexpr int kMaxSupportedProps = 53;

enum class TextStyle { kUnicode, kAscii };

/*!
 * \brief Bijection between surface tokens and ids 0..size()-1.
 *
 * Ids 0..10 are the fixed tokens in TokenKind order; prop_i has id 10 + i.
 */
class TlVocab {
 public:
  explicit TlVocab(int max_props = kDefaultMaxProps);

  int max_props() const { return max_props_; }
  int size() const { return max_props_ + kNumFixedTokens; }

  TokenKind kind(TokenId id) const;
  /*! \brief 1-based proposition index of a prop token. */
  int prop_index(TokenId id) const;
  TokenId id_of(TokenKind kind) const;
  TokenId prop_id(int index) const;

  /*! \brief Surface spelling of a token. EOS spells as "EOS". */
  std::string spell(TokenId id, TextStyle style = TextStyle::kUnicode) const;

  static TokenId kind_id(TokenKind kind) { return static_cast<TokenId>(kind); }

 private:
  int max_props_;
};

inline constexpr TokenId kEosId = 0;

TokenKind token_kind_of(Op op);
Op op_of(TokenKind kind);

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

enum class FormulaErrorKind {
  kUnbalancedParen,
  kUnexpectedToken,
  kTrailingTokens,
  kUnknownToken,
};

const char* to_string(FormulaErrorKind kind);

class FormulaError : public std::runtime_error {
 public:
  FormulaError(FormulaErrorKind kind, std::size_t position, const std::string& detail);
  FormulaErrorKind kind() const { return kind_; }
  /*! \brief Index of the first offending token (== token count for end of input). */
  std::size_t position() const { return position_; }

 private:
  FormulaErrorKind kind_;
  std::size_t position_;
};

/*! \brief Outcome of the non-throwing parser: exactly one of formula / error. */
struct ParseOutcome {
  std::optional<Formula> formula;
  FormulaErrorKind error = FormulaErrorKind::kUnexpectedToken;
  std::size_t position = 0;

  bool ok() const { return formula.has_value(); }
};

/*! \brief Maps grounded atom names (e.g. "red_room") to proposition indices. */
using AtomTable = std::unordered_map<std::string, int>;

/*!
 * \brief Split formula text into token ids. Accepts the unicode and ASCII
 *        operator spellings, "(" / ")" and LPAREN / RPAREN, and prop_i.
 *        With an atom table, bare atom names resolve through it as well.
 * \throws FormulaError(kUnknownToken) on anything else.
 */
std::vector<TokenId> lex_formula(std::string_view text, const TlVocab& vocab,
                                 const AtomTable* atoms = nullptr);

ParseOutcome try_parse_tokens(std::span<const TokenId> tokens, const TlVocab& vocab);
Formula parse_tokens(std::span<const TokenId> tokens, const TlVocab& vocab);

Formula parse_formula(std::string_view text, const TlVocab& vocab = TlVocab());
Formula parse_formula(std::string_view text, const TlVocab& vocab, const AtomTable& atoms);

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/*! \brief Token ids of a formula, without a trailing EOS. */
std::vector<TokenId> to_tokens(const Formula& f, const TlVocab& vocab);

std::string render(const Formula& f, TextStyle style = TextStyle::kUnicode);

/*! \brief Render with prop_i replaced by names[i]. Missing names are the caller's problem. */
std::string render_with_atoms(const Formula& f, const std::unordered_map<int, std::string>& names,
                              TextStyle style = TextStyle::kUnicode);

}  // namespace tlforge
