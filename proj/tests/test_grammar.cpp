#include <functional>

#include "doctest.h"
#include "tlforge/grammar.hpp"

using namespace tlforge;

namespace {

std::vector<TokenId> ids(const TlVocab& v, std::string_view text) {
  std::vector<TokenId> out = lex_formula(text, v);
  return out;
}

GrammarState run(const LtlGrammar& g, std::span<const TokenId> tokens) {
  GrammarState s = g.init_state();
  for (TokenId t : tokens) s = g.update(s, t);
  return s;
}

TokenSet binops(const TlVocab& v) {
  return TokenSet::of({v.id_of(TokenKind::kAnd), v.id_of(TokenKind::kOr),
                       v.id_of(TokenKind::kImplies), v.id_of(TokenKind::kUntil)});
}

}  // namespace

TEST_CASE("fresh state") {
  const LtlGrammar g;
  const GrammarState s = g.init_state();
  CHECK(s.stack() == std::vector<Expect>{Expect::kEos, Expect::kFormula});
  CHECK(s.consumed() == 0);
  CHECK(g.valid_tokens(s).size() == 5 + 5);
  CHECK_FALSE(g.is_accepting(s));
  CHECK(g.min_completion_cost(s) == 2);
}

TEST_CASE("hand traces") {
  const TlVocab v;
  const LtlGrammar g(v);

  const GrammarState ev = run(g, ids(v, "◇"));
  CHECK(ev.stack() == g.init_state().stack());

  const GrammarState open = run(g, ids(v, "( prop_1"));
  CHECK(g.valid_tokens(open) == binops(v));
  CHECK(g.valid_tokens(open).size() == 4);
  CHECK(g.min_completion_cost(open) == 4);

  const GrammarState atom = run(g, ids(v, "prop_1"));
  CHECK(g.valid_tokens(atom) == TokenSet::of({kEosId}));
  CHECK_FALSE(g.is_accepting(atom));

  GrammarState done = g.update(atom, kEosId);
  CHECK(g.is_accepting(done));
  CHECK(done.terminal());
  CHECK(g.min_completion_cost(done) == 0);
  CHECK_THROWS_AS(g.valid_tokens(done), GrammarError);
  try {
    g.valid_tokens(done);
  } catch (const GrammarError& e) {
    CHECK(e.kind() == GrammarErrorKind::kTerminalState);
  }
  CHECK_THROWS_AS(g.update(done, kEosId), GrammarError);

  const GrammarState rp = run(g, ids(v, "( prop_1 ∧ prop_2"));
  CHECK(g.valid_tokens(rp) == TokenSet::of({v.id_of(TokenKind::kRParen)}));
}

TEST_CASE("invalid token is rejected without touching the state") {
  const TlVocab v;
  const LtlGrammar g(v);
  GrammarState s = g.init_state();
  try {
    g.advance(s, v.id_of(TokenKind::kAnd));
    FAIL("expected InvalidToken");
  } catch (const GrammarError& e) {
    CHECK(e.kind() == GrammarErrorKind::kInvalidToken);
    CHECK(e.token() == v.id_of(TokenKind::kAnd));
  }
  CHECK(s == g.init_state());
}

TEST_CASE("valid set per expectation") {
  const TlVocab v(5);
  const LtlGrammar g(v);
  TokenSet formula;
  for (int i = 1; i <= 5; ++i) formula.insert(v.prop_id(i));
  for (TokenKind k : {TokenKind::kNot, TokenKind::kNext, TokenKind::kEventually, TokenKind::kAlways,
                      TokenKind::kLParen}) {
    formula.insert(v.id_of(k));
  }
  CHECK(g.valid_tokens(g.init_state()) == formula);
  CHECK(g.valid_tokens(run(g, ids(v, "( ¬ prop_2"))) == binops(v));
}

// Every reachable state up to depth 5: valid_tokens(s) is exactly the set of
// ids update() accepts, never empty, at most 10 with five props, and the
// completion cost moves by at most one per token and by exactly one along
// some token.
TEST_CASE("reachable-state sweep") {
  const TlVocab v(5);
  const LtlGrammar g(v);
  std::size_t states = 0;
  int largest = 0;
  std::function<void(const GrammarState&)> visit = [&](const GrammarState& s) {
    if (s.terminal()) return;
    ++states;
    const TokenSet valid = g.valid_tokens(s);
    REQUIRE(valid.size() >= 1);
    largest = std::max(largest, valid.size());
    bool shrinks = false;
    for (TokenId t = 0; t < v.size(); ++t) {
      bool accepted = true;
      GrammarState next = s;
      try {
        g.advance(next, t);
      } catch (const GrammarError&) {
        accepted = false;
      }
      REQUIRE(accepted == valid.contains(t));
      if (!accepted) continue;
      const auto before = g.min_completion_cost(s), after = g.min_completion_cost(next);
      CHECK(after + 1 >= before);
      shrinks = shrinks || after + 1 == before;
      if (s.consumed() < 5) visit(next);
    }
    CHECK(shrinks);
  };
  visit(g.init_state());
  CHECK(states > 1000);
  CHECK(largest == 10);
}

// Every path through the budget-aware sets ends accepting within budget.
TEST_CASE("budget-aware valid sets never dead-end") {
  const TlVocab v(1);
  const LtlGrammar g(v);
  for (std::size_t budget = 2; budget <= 9; ++budget) {
    std::size_t paths = 0;
    std::function<void(const GrammarState&, std::size_t)> walk = [&](const GrammarState& s,
                                                                     std::size_t used) {
      if (s.terminal()) {
        ++paths;
        CHECK(used <= budget);
        return;
      }
      REQUIRE(used < budget);
      const TokenSet valid = g.valid_tokens(s, budget - used);
      REQUIRE_FALSE(valid.empty());
      CHECK((valid & g.valid_tokens(s)) == valid);
      for (TokenId t : valid.ids()) walk(g.update(s, t), used + 1);
    };
    walk(g.init_state(), 0);
    CHECK(paths > 0);
  }
}

TEST_CASE("budget intersects only when the budget is tight") {
  const TlVocab v(5);
  const LtlGrammar g(v);
  const GrammarState s = g.init_state();
  CHECK(g.valid_tokens(s, 64) == g.valid_tokens(s));
  CHECK(g.valid_tokens(s, 2).size() == 5);
  CHECK(g.valid_tokens(s, 3).size() == 9);
  CHECK(g.valid_tokens(s, 6).size() == 10);
}

TEST_CASE("accepts and valid_sets_along") {
  const TlVocab v;
  const LtlGrammar g(v);
  std::vector<TokenId> seq = ids(v, "( prop_1 ∪ □ prop_2 )");
  CHECK_FALSE(g.accepts(seq));
  seq.push_back(kEosId);
  CHECK(g.accepts(seq));
  CHECK_FALSE(g.accepts(std::vector<TokenId>{kEosId}));
  const auto sets = g.valid_sets_along(seq);
  REQUIRE(sets.size() == seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) CHECK(sets[i].contains(seq[i]));
  CHECK(sets[2] == binops(v));
}
