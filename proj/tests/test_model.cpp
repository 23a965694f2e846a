#include <cmath>
#include <random>

#include "doctest.h"
#include "tlforge/decode.hpp"
#include "tlforge/model.hpp"

using namespace tlforge;

namespace {

Example make(const TlVocab& v, std::vector<int> src, std::string_view tl) {
  Example e{std::move(src), lex_formula(tl, v)};
  e.tgt.push_back(kEosId);
  return e;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

}  // namespace

TEST_CASE("parameter count closed form") {
  // S*E + V*E + 2 GRUs * (3HE + 3H^2 + 3H) + attention H^2 + output V*H + V
  const std::size_t S = 50, V = 16, E = 32, H = 64;
  const std::size_t expected = S * E + V * E + 2 * (3 * H * E + 3 * H * H + 3 * H) + H * H + V * H + V;
  CHECK(expected == 44496);
  const ModelDims d{S, V, E, H};
  CHECK(d.param_count() == expected);
  CHECK(init_model(d, 1).size() == expected);
  CHECK(ParamLayout(d).total == expected);
}

TEST_CASE("initialization is seeded") {
  const ModelDims d{20, 16, 8, 12};
  const ModelParams a = init_model(d, 5), b = init_model(d, 5), c = init_model(d, 6);
  CHECK(a == b);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a.values()[i] != c.values()[i];
  CHECK(static_cast<double>(differ) >= 0.99 * static_cast<double>(a.size()));
  for (double x : a.values()) CHECK(std::isfinite(x));
}

TEST_CASE("forward shape, finiteness and errors") {
  const TlVocab v;
  const ModelParams p = init_model({20, static_cast<std::size_t>(v.size()), 8, 12}, 2);
  const std::vector<TokenId> prefix = lex_formula("( prop_1 ∧ ◇ prop_2 )", v);
  const auto rows = forward(p, std::vector<int>{3, 4, 5}, prefix);
  CHECK(rows.size() == prefix.size());
  for (const auto& r : rows) {
    CHECK(r.size() == static_cast<std::size_t>(v.size()));
    for (double z : r) CHECK(std::isfinite(z));
  }
  CHECK(forward(p, std::vector<int>{1}, std::vector<TokenId>{}).empty());
  try {
    forward(p, std::vector<int>{}, prefix);
    FAIL("expected EmptySource");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::kEmptySource);
  }
  try {
    forward(p, std::vector<int>{1}, prefix, 3);
    FAIL("expected LengthExceeded");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::kLengthExceeded);
  }
}

TEST_CASE("attention makes logits depend on source order") {
  const TlVocab v;
  const ModelParams p = init_model({20, static_cast<std::size_t>(v.size()), 8, 12}, 3);
  const std::vector<TokenId> prefix = lex_formula("◇ prop_1", v);
  const auto a = forward(p, std::vector<int>{3, 4, 5, 6}, prefix);
  const auto b = forward(p, std::vector<int>{3, 5, 4, 6}, prefix);
  CHECK(a != b);
}

TEST_CASE("decoder session reproduces teacher-forced rows") {
  const TlVocab v;
  const ModelParams p = init_model({20, static_cast<std::size_t>(v.size()), 8, 12}, 4);
  std::vector<TokenId> tgt = lex_formula("( □ prop_3 ⇒ prop_1 )", v);
  const std::vector<int> src{7, 1, 9};
  const auto rows = forward(p, src, tgt);
  DecoderSession s(p, src);
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    const auto z = s.step(t == 0 ? kEosId : tgt[t - 1]);
    CHECK(std::vector<double>(z.begin(), z.end()) == rows[t]);
  }
}

// Central differences, h = 1e-5, on every parameter of a tiny model.
TEST_CASE("backward matches finite differences") {
  const TlVocab v;
  const LtlGrammar g(v);
  ModelParams p = init_model({7, static_cast<std::size_t>(v.size()), 4, 6}, 8);
  const std::vector<Example> batch{make(v, {1, 2, 3}, "◇ ( prop_1 ∧ ○ prop_2 )"),
                                   make(v, {4, 5, 6, 2}, "( prop_1 ∪ ¬ prop_1 )")};
  const double h = 1e-5;
  for (LossMode mode : {LossMode::kStandard, LossMode::kGrammarForced}) {
    const BackwardResult r = backward(p, batch, mode, g);
    CHECK(r.loss == batch_loss(p, batch, mode, g));
    std::vector<double> numeric(p.size());
    auto theta = p.values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double t0 = theta[i];
      theta[i] = t0 + h;
      const double lp = batch_loss(p, batch, mode, g);
      theta[i] = t0 - h;
      const double lm = batch_loss(p, batch, mode, g);
      theta[i] = t0;
      numeric[i] = (lp - lm) / (2 * h);
    }
    CHECK(max_rel_error(r.grad, numeric) <= 1e-6);
  }
}

TEST_CASE("forced loss is below standard loss at the same parameters") {
  const TlVocab v;
  const LtlGrammar g(v);
  std::mt19937_64 rng(1);
  for (int draw = 0; draw < 5; ++draw) {
    const ModelParams p = init_model({10, static_cast<std::size_t>(v.size()), 8, 12}, 10 + draw);
    const std::vector<Example> batch{make(v, {1, 2}, "prop_1"), make(v, {3, 4, 5}, "□ ( prop_2 ∨ prop_3 )"),
                                     make(v, {6}, "( ¬ prop_1 ⇒ ○ prop_4 )")};
    CHECK(batch_loss(p, batch, LossMode::kGrammarForced, g) <= batch_loss(p, batch, LossMode::kStandard, g));
  }
}

// Output-bias partials equal the sum of logit partials, so tokens that are
// never valid along the target must get exactly zero in forced mode.
TEST_CASE("forced backward sends no signal through invalid logits") {
  const TlVocab v;
  const LtlGrammar g(v);
  const ModelParams p = init_model({10, static_cast<std::size_t>(v.size()), 8, 12}, 3);
  const std::vector<Example> batch{make(v, {1, 2}, "◇ prop_2")};
  const BackwardResult forced = backward(p, batch, LossMode::kGrammarForced, g);
  const BackwardResult standard = backward(p, batch, LossMode::kStandard, g);
  const std::size_t out_b = p.layout().out_b;
  for (TokenKind k : {TokenKind::kRParen, TokenKind::kAnd, TokenKind::kOr, TokenKind::kImplies,
                      TokenKind::kUntil}) {
    const std::size_t id = static_cast<std::size_t>(v.id_of(k));
    CHECK(forced.grad[out_b + id] == 0.0);
    CHECK(standard.grad[out_b + id] != 0.0);
  }
}

TEST_CASE("target validation names the record") {
  const TlVocab v;
  const LtlGrammar g(v);
  std::vector<Example> corpus{make(v, {1}, "prop_1"), Example{{2}, {v.id_of(TokenKind::kAnd), kEosId}}};
  try {
    validate_targets(corpus, LossMode::kGrammarForced, g);
    FAIL("expected TargetNotValid");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::kTargetNotValid);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
  try {
    validate_targets(corpus, LossMode::kStandard, g);
    FAIL("expected UnparseableTarget");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::kUnparseableTarget);
  }
  corpus[1] = Example{{2}, lex_formula("prop_2", v)};  // no EOS
  CHECK_THROWS_AS(validate_targets(corpus, LossMode::kStandard, g), ModelError);
}

TEST_CASE("training is deterministic and both modes share the initialization") {
  const TlVocab v;
  const LtlGrammar g(v);
  std::vector<Example> corpus;
  const char* tls[] = {"prop_1", "◇ prop_1", "( prop_1 ∧ prop_2 )", "□ ¬ prop_2", "( prop_1 ∪ ○ prop_2 )"};
  for (int i = 0; i < 10; ++i) corpus.push_back(make(v, {1 + i % 5, 6 + i % 3}, tls[i % 5]));
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.d_emb = 8;
  cfg.d_hidden = 12;
  const TrainResult a = train(corpus, cfg, g, 10);
  const TrainResult b = train(corpus, cfg, g, 10);
  CHECK(a.params == b.params);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.loss_curve.size() == 3 * 3);  // epochs * ceil(10 / 4)
  cfg.mode = LossMode::kGrammarForced;
  const TrainResult f = train(corpus, cfg, g, 10);
  CHECK(f.loss_curve.front() <= a.loss_curve.front());
  for (double l : f.loss_curve) CHECK(std::isfinite(l));
}

TEST_CASE("memorizes ten pairs in 500 steps") {
  const TlVocab v;
  const LtlGrammar g(v);
  const char* tls[] = {"prop_1", "◇ prop_1", "( prop_1 ∧ prop_2 )", "□ ¬ prop_2", "( prop_1 ∪ ○ prop_2 )",
                       "○ ○ prop_1", "( ◇ prop_1 ⇒ □ prop_2 )", "¬ ( prop_2 ∨ prop_3 )", "□ ◇ prop_3",
                       "( prop_1 ∧ ( prop_2 ∧ prop_3 ) )"};
  std::vector<Example> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back(make(v, {1 + i, 11 + i % 4, 15}, tls[i]));
  TrainConfig cfg;
  cfg.mode = LossMode::kGrammarForced;
  cfg.epochs = 250;
  cfg.batch_size = 5;
  cfg.d_emb = 16;
  cfg.d_hidden = 32;
  const TrainResult r = train(corpus, cfg, g, 16);
  CHECK(r.loss_curve.size() == 500);
  std::size_t exact = 0;
  for (const auto& e : corpus) exact += greedy_decode(r.params, e.src, 64, true, g) == e.tgt;
  CHECK(exact == 10);
}

TEST_CASE("loss mode names") {
  CHECK(loss_mode_from_string("standard") == LossMode::kStandard);
  CHECK(loss_mode_from_string("grammar_forced") == LossMode::kGrammarForced);
  CHECK(std::string(to_string(LossMode::kGrammarForced)) == "grammar_forced");
  CHECK_THROWS_AS(loss_mode_from_string("adam"), std::invalid_argument);
}
