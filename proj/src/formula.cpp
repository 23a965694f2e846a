/*!
 * \file formula.cpp
 */
#include "tlforge/formula.hpp"

#include <algorithm>
#include <charconv>

namespace tlforge {

Formula Formula::Prop(int index) {
  if (index < 1) throw std::invalid_argument("proposition index must be >= 1");
  auto node = std::make_shared<Node>();
  node->op = Op::kProp;
  node->prop = index;
  return Formula(std::move(node));
}

Formula Formula::Unary(Op op, Formula child) {
  if (!is_unary(op)) throw std::invalid_argument("Formula::Unary with a non-unary operator");
  auto node = std::make_shared<Node>();
  node->op = op;
  node->lhs = std::move(child.node_);
  return Formula(std::move(node));
}

Formula Formula::Binary(Op op, Formula lhs, Formula rhs) {
  if (!is_binary(op)) throw std::invalid_argument("Formula::Binary with a non-binary operator");
  auto node = std::make_shared<Node>();
  node->op = op;
  node->lhs = std::move(lhs.node_);
  node->rhs = std::move(rhs.node_);
  return Formula(std::move(node));
}

std::size_t Formula::size() const {
  if (is_prop()) return 1;
  if (is_unary(op())) return 1 + child().size();
  return 1 + lhs().size() + rhs().size();
}

int Formula::depth() const {
  if (is_prop()) return 1;
  if (is_unary(op())) return 1 + child().depth();
  return 1 + std::max(lhs().depth(), rhs().depth());
}

int Formula::max_prop() const {
  if (is_prop()) return prop();
  if (is_unary(op())) return child().max_prop();
  return std::max(lhs().max_prop(), rhs().max_prop());
}

std::vector<int> Formula::props_in_order() const {
  std::vector<int> out;
  std::vector<const Node*> stack{node_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (n->op == Op::kProp) {
      out.push_back(n->prop);
    } else if (is_unary(n->op)) {
      stack.push_back(n->lhs.get());
    } else {
      stack.push_back(n->rhs.get());
      stack.push_back(n->lhs.get());
    }
  }
  return out;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  if (a.is_prop()) return a.prop() == b.prop();
  if (is_unary(a.op())) return a.child() == b.child();
  return a.lhs() == b.lhs() && a.rhs() == b.rhs();
}

bool ast_equal(const Formula& a, const Formula& b) { return a == b; }

// ---------------------------------------------------------------------------

TlVocab::TlVocab(int max_props) : max_props_(max_props) {
  if (max_props < 1 || max_props > kMaxSupportedProps) {
    throw std::invalid_argument("max_props must be in 1.." + std::to_string(kMaxSupportedProps));
  }
}

TokenKind TlVocab::kind(TokenId id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
  if (id >= kNumFixedTokens) return TokenKind::kProp;
  return static_cast<TokenKind>(id);
}

int TlVocab::prop_index(TokenId id) const {
  if (kind(id) != TokenKind::kProp) throw std::invalid_argument("not a proposition token");
  return id - kNumFixedTokens + 1;
}

TokenId TlVocab::id_of(TokenKind kind) const {
  if (kind == TokenKind::kProp) throw std::invalid_argument("use prop_id for propositions");
  return static_cast<TokenId>(kind);
}

TokenId TlVocab::prop_id(int index) const {
  if (index < 1 || index > max_props_) throw std::out_of_range("proposition index out of range");
  return kNumFixedTokens + index - 1;
}

namespace {

struct Spelling {
  TokenKind kind;
  std::string_view unicode;
  std::string_view ascii;
};

constexpr Spelling kSpellings[] = {
    {TokenKind::kEos, "EOS", "EOS"},
    {TokenKind::kLParen, "(", "LPAREN"},
    {TokenKind::kRParen, ")", "RPAREN"},
    {TokenKind::kNot, "¬", "NOT"},
    {TokenKind::kNext, "○", "X"},
    {TokenKind::kEventually, "◇", "F"},
    {TokenKind::kAlways, "□", "G"},
    {TokenKind::kAnd, "∧", "AND"},
    {TokenKind::kOr, "∨", "OR"},
    {TokenKind::kImplies, "⇒", "IMPLIES"},
    {TokenKind::kUntil, "∪", "UNTIL"},
};

std::string_view op_spelling(TokenKind kind, TextStyle style) {
  const Spelling& s = kSpellings[static_cast<int>(kind)];
  return style == TextStyle::kUnicode ? s.unicode : s.ascii;
}

// Operator spellings accepted on input. EOS is deliberately absent: it is a
// decoder token, not part of formula text.
std::optional<TokenKind> operator_from_text(std::string_view word) {
  for (int i = 1; i < kNumFixedTokens; ++i) {
    if (word == kSpellings[i].unicode || word == kSpellings[i].ascii) return kSpellings[i].kind;
  }
  return std::nullopt;
}

std::optional<int> parse_prop_word(std::string_view word) {
  constexpr std::string_view kPrefix = "prop_";
  if (word.size() <= kPrefix.size() || word.substr(0, kPrefix.size()) != kPrefix) {
    return std::nullopt;
  }
  std::string_view digits = word.substr(kPrefix.size());
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

std::string TlVocab::spell(TokenId id, TextStyle style) const {
  TokenKind k = kind(id);
  if (k == TokenKind::kProp) return "prop_" + std::to_string(prop_index(id));
  return std::string(op_spelling(k, style));
}

TokenKind token_kind_of(Op op) {
  switch (op) {
    case Op::kNot: return TokenKind::kNot;
    case Op::kNext: return TokenKind::kNext;
    case Op::kEventually: return TokenKind::kEventually;
    case Op::kAlways: return TokenKind::kAlways;
    case Op::kAnd: return TokenKind::kAnd;
    case Op::kOr: return TokenKind::kOr;
    case Op::kImplies: return TokenKind::kImplies;
    case Op::kUntil: return TokenKind::kUntil;
    case Op::kProp: return TokenKind::kProp;
  }
  return TokenKind::kProp;
}

Op op_of(TokenKind kind) {
  switch (kind) {
    case TokenKind::kNot: return Op::kNot;
    case TokenKind::kNext: return Op::kNext;
    case TokenKind::kEventually: return Op::kEventually;
    case TokenKind::kAlways: return Op::kAlways;
    case TokenKind::kAnd: return Op::kAnd;
    case TokenKind::kOr: return Op::kOr;
    case TokenKind::kImplies: return Op::kImplies;
    case TokenKind::kUntil: return Op::kUntil;
    case TokenKind::kProp: return Op::kProp;
    default: throw std::invalid_argument("token kind has no operator");
  }
}

// ---------------------------------------------------------------------------

const char* to_string(FormulaErrorKind kind) {
  switch (kind) {
    case FormulaErrorKind::kUnbalancedParen: return "UnbalancedParen";
    case FormulaErrorKind::kUnexpectedToken: return "UnexpectedToken";
    case FormulaErrorKind::kTrailingTokens: return "TrailingTokens";
    case FormulaErrorKind::kUnknownToken: return "UnknownToken";
  }
  return "?";
}

FormulaError::FormulaError(FormulaErrorKind kind, std::size_t position, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at token " + std::to_string(position) +
                         (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      position_(position) {}

std::vector<TokenId> lex_formula(std::string_view text, const TlVocab& vocab,
                                 const AtomTable* atoms) {
  std::vector<TokenId> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    std::string_view word = text.substr(i, j - i);
    i = j;

    if (atoms != nullptr) {
      auto it = atoms->find(std::string(word));
      if (it != atoms->end()) {
        if (it->second < 1 || it->second > vocab.max_props()) {
          throw FormulaError(FormulaErrorKind::kUnknownToken, out.size(),
                             "atom '" + std::string(word) + "' maps outside the vocabulary");
        }
        out.push_back(vocab.prop_id(it->second));
        continue;
      }
    }
    if (auto op = operator_from_text(word)) {
      out.push_back(vocab.id_of(*op));
      continue;
    }
    if (auto index = parse_prop_word(word); index && *index >= 1 && *index <= vocab.max_props()) {
      out.push_back(vocab.prop_id(*index));
      continue;
    }
    throw FormulaError(FormulaErrorKind::kUnknownToken, out.size(), "'" + std::string(word) + "'");
  }
  return out;
}

namespace {

ParseOutcome fail(FormulaErrorKind kind, std::size_t position) {
  ParseOutcome r;
  r.error = kind;
  r.position = position;
  return r;
}

}  // namespace

// Iterative LL(1) parse; an explicit frame stack keeps deep inputs off the
// call stack.
ParseOutcome try_parse_tokens(std::span<const TokenId> tokens, const TlVocab& vocab) {
  struct Frame {
    Op op;
    bool binary;
    bool have_lhs;
    std::optional<Formula> lhs;
  };
  std::vector<Frame> frames;
  std::size_t pos = 0;
  std::size_t open = 0;
  const std::size_t n = tokens.size();

  auto end_error = [&]() {
    return fail(open > 0 ? FormulaErrorKind::kUnbalancedParen : FormulaErrorKind::kUnexpectedToken,
                n);
  };

  for (;;) {
    // Expect a formula at pos.
    if (pos >= n) return end_error();
    const TokenId t = tokens[pos];
    if (t < 0 || t >= vocab.size()) return fail(FormulaErrorKind::kUnknownToken, pos);
    const TokenKind k = vocab.kind(t);
    if (k == TokenKind::kLParen) {
      frames.push_back({Op::kAnd, true, false, std::nullopt});
      ++open;
      ++pos;
      continue;
    }
    if (k == TokenKind::kNot || k == TokenKind::kNext || k == TokenKind::kEventually ||
        k == TokenKind::kAlways) {
      frames.push_back({op_of(k), false, false, std::nullopt});
      ++pos;
      continue;
    }
    if (k != TokenKind::kProp) return fail(FormulaErrorKind::kUnexpectedToken, pos);

    Formula result = Formula::Prop(vocab.prop_index(t));
    ++pos;

    // Reduce completed frames until one needs another formula.
    bool need_formula = false;
    while (!frames.empty()) {
      Frame& top = frames.back();
      if (!top.binary) {
        result = Formula::Unary(top.op, std::move(result));
        frames.pop_back();
        continue;
      }
      if (!top.have_lhs) {
        if (pos >= n) return end_error();
        const TokenId b = tokens[pos];
        if (b < 0 || b >= vocab.size()) return fail(FormulaErrorKind::kUnknownToken, pos);
        const TokenKind bk = vocab.kind(b);
        if (bk != TokenKind::kAnd && bk != TokenKind::kOr && bk != TokenKind::kImplies &&
            bk != TokenKind::kUntil) {
          return fail(FormulaErrorKind::kUnexpectedToken, pos);
        }
        top.op = op_of(bk);
        top.have_lhs = true;
        top.lhs = std::move(result);
        ++pos;
        need_formula = true;
        break;
      }
      if (pos >= n) return end_error();
      const TokenId r = tokens[pos];
      if (r < 0 || r >= vocab.size()) return fail(FormulaErrorKind::kUnknownToken, pos);
      if (vocab.kind(r) != TokenKind::kRParen) return fail(FormulaErrorKind::kUnexpectedToken, pos);
      result = Formula::Binary(top.op, std::move(*top.lhs), std::move(result));
      frames.pop_back();
      --open;
      ++pos;
    }
    if (need_formula) continue;

    if (pos < n) {
      const TokenId extra = tokens[pos];
      if (extra >= 0 && extra < vocab.size() && vocab.kind(extra) == TokenKind::kRParen) {
        return fail(FormulaErrorKind::kUnbalancedParen, pos);
      }
      return fail(FormulaErrorKind::kTrailingTokens, pos);
    }
    ParseOutcome ok;
    ok.formula = std::move(result);
    return ok;
  }
}

Formula parse_tokens(std::span<const TokenId> tokens, const TlVocab& vocab) {
  ParseOutcome r = try_parse_tokens(tokens, vocab);
  if (!r.ok()) {
    std::string detail;
    if (r.position < tokens.size() && tokens[r.position] >= 0 &&
        tokens[r.position] < vocab.size()) {
      detail = "'" + vocab.spell(tokens[r.position]) + "'";
    } else if (r.position >= tokens.size()) {
      detail = "end of input";
    }
    throw FormulaError(r.error, r.position, detail);
  }
  return std::move(*r.formula);
}

Formula parse_formula(std::string_view text, const TlVocab& vocab) {
  std::vector<TokenId> ids = lex_formula(text, vocab);
  return parse_tokens(ids, vocab);
}

Formula parse_formula(std::string_view text, const TlVocab& vocab, const AtomTable& atoms) {
  std::vector<TokenId> ids = lex_formula(text, vocab, &atoms);
  return parse_tokens(ids, vocab);
}

// ---------------------------------------------------------------------------

namespace {

template <typename Emit>
void walk_tokens(const Formula& f, Emit&& emit) {
  if (f.is_prop()) {
    emit(TokenKind::kProp, f.prop());
  } else if (is_unary(f.op())) {
    emit(token_kind_of(f.op()), 0);
    walk_tokens(f.child(), emit);
  } else {
    emit(TokenKind::kLParen, 0);
    walk_tokens(f.lhs(), emit);
    emit(token_kind_of(f.op()), 0);
    walk_tokens(f.rhs(), emit);
    emit(TokenKind::kRParen, 0);
  }
}

}  // namespace

std::vector<TokenId> to_tokens(const Formula& f, const TlVocab& vocab) {
  std::vector<TokenId> out;
  walk_tokens(f, [&](TokenKind k, int prop) {
    out.push_back(k == TokenKind::kProp ? vocab.prop_id(prop) : vocab.id_of(k));
  });
  return out;
}

std::string render(const Formula& f, TextStyle style) {
  std::string out;
  walk_tokens(f, [&](TokenKind k, int prop) {
    if (!out.empty()) out.push_back(' ');
    if (k == TokenKind::kProp) {
      out += "prop_";
      out += std::to_string(prop);
    } else {
      out += op_spelling(k, style);
    }
  });
  return out;
}

std::string render_with_atoms(const Formula& f, const std::unordered_map<int, std::string>& names,
                              TextStyle style) {
  std::string out;
  walk_tokens(f, [&](TokenKind k, int prop) {
    if (!out.empty()) out.push_back(' ');
    if (k == TokenKind::kProp) {
      auto it = names.find(prop);
      out += it != names.end() ? it->second : "prop_" + std::to_string(prop);
    } else {
      out += op_spelling(k, style);
    }
  });
  return out;
}

}  // namespace tlforge
