/*!
 * \file tlforge/grammar.hpp
 * \brief Incremental pushdown recognizer for the LTL surface grammar.
 *
 * The state is a stack of expectation symbols. The top of the stack alone
 * decides which tokens may come next, so valid-token queries are a table
 * lookup. Token sets are bitsets over the TL vocabulary.
 */
#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlforge/formula.hpp"

namespace tlforge {

enum class Expect : std::uint8_t { kFormula, kBinop, kRParen, kEos };

/*! \brief Set of token ids, |V| <= 64. */
class TokenSet {
 public:
  TokenSet() = default;
  static TokenSet full(int universe);
  static TokenSet of(std::initializer_list<TokenId> ids);

  bool contains(TokenId id) const {
    return id >= 0 && id < 64 && ((bits_ >> static_cast<unsigned>(id)) & 1u) != 0;
  }
  void insert(TokenId id) { bits_ |= std::uint64_t{1} << static_cast<unsigned>(id); }
  void erase(TokenId id) { bits_ &= ~(std::uint64_t{1} << static_cast<unsigned>(id)); }
  int size() const { return std::popcount(bits_); }
  bool empty() const { return bits_ == 0; }
  std::uint64_t bits() const { return bits_; }
  std::vector<TokenId> ids() const;

  friend TokenSet operator&(TokenSet a, TokenSet b) { return TokenSet(a.bits_ & b.bits_); }
  friend TokenSet operator|(TokenSet a, TokenSet b) { return TokenSet(a.bits_ | b.bits_); }
  friend bool operator==(TokenSet a, TokenSet b) { return a.bits_ == b.bits_; }

 private:
  explicit TokenSet(std::uint64_t bits) : bits_(bits) {}
  std::uint64_t bits_ = 0;
};

class GrammarState {
 public:
  const std::vector<Expect>& stack() const { return stack_; }
  std::size_t consumed() const { return consumed_; }
  bool terminal() const { return stack_.empty(); }

  friend bool operator==(const GrammarState&, const GrammarState&) = default;

 private:
  friend class LtlGrammar;
  std::vector<Expect> stack_;
  std::size_t consumed_ = 0;
};

enum class GrammarErrorKind { kInvalidToken, kTerminalState };

class GrammarError : public std::runtime_error {
 public:
  GrammarError(GrammarErrorKind kind, TokenId token, std::size_t consumed);
  GrammarErrorKind kind() const { return kind_; }
  TokenId token() const { return token_; }
  std::size_t consumed() const { return consumed_; }

 private:
  GrammarErrorKind kind_;
  TokenId token_;
  std::size_t consumed_;
};

/*! \brief Grammar tables for a given vocabulary. Immutable after construction. */
class LtlGrammar {
 public:
  explicit LtlGrammar(TlVocab vocab = TlVocab());

  const TlVocab& vocab() const { return vocab_; }

  GrammarState init_state() const;

  /*! \brief One shift. \throws GrammarError(kInvalidToken) if t is not valid. */
  GrammarState update(GrammarState s, TokenId t) const;
  /*! \brief In-place variant of update(). */
  void advance(GrammarState& s, TokenId t) const;

  /*! \throws GrammarError(kTerminalState) on an accepting state. */
  TokenSet valid_tokens(const GrammarState& s) const;

  /*!
   * \brief Valid tokens that still allow reaching an accepting state within
   *        `remaining` further tokens (EOS included). Never empty when
   *        min_completion_cost(s) <= remaining.
   */
  TokenSet valid_tokens(const GrammarState& s, std::size_t remaining) const;

  /*! \brief Fewest further tokens (EOS included) to reach acceptance. */
  std::size_t min_completion_cost(const GrammarState& s) const { return s.stack_.size(); }

  bool is_accepting(const GrammarState& s) const { return s.stack_.empty(); }

  /*! \brief Run a whole token sequence; true iff every token is valid and the end state accepts. */
  bool accepts(std::span<const TokenId> tokens) const;

  /*! \brief Valid-token sets seen at each position when threading the state over `tokens`. */
  std::vector<TokenSet> valid_sets_along(std::span<const TokenId> tokens) const;

 private:
  TokenSet for_expect(Expect e) const { return by_expect_[static_cast<int>(e)]; }

  TlVocab vocab_;
  TokenSet by_expect_[4];
  TokenSet props_;
  TokenSet unary_;
  TokenSet lparen_;
};

}  // namespace tlforge
