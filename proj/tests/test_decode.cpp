#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "tlforge/decode.hpp"
#include "tlforge/loss.hpp"

using namespace tlforge;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> plain_softmax(const std::vector<double>& z) {
  double m = -kInf;
  for (double v : z) m = std::max(m, v);
  double s = 0.0;
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) s += p[i] = std::exp(z[i] - m);
  for (double& v : p) v /= s;
  return p;
}

std::vector<int> random_src(std::mt19937_64& rng, int vocab) {
  std::uniform_int_distribution<int> len(1, 15), word(0, vocab - 1);
  std::vector<int> src(static_cast<std::size_t>(len(rng)));
  for (int& w : src) w = word(rng);
  return src;
}

}  // namespace

TEST_CASE("mask_logits") {
  const auto m = mask_logits(std::vector<double>{0, 0, 0, 0}, TokenSet::of({0, 1}));
  CHECK(m[0] == 0.0);
  CHECK(m[1] == 0.0);
  CHECK(m[2] == -kInf);
  CHECK(m[3] == -kInf);
  CHECK(mask_logits(std::vector<double>{1, 2, 3}, TokenSet::full(3)) == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(mask_logits(std::vector<double>{1, 2}, TokenSet()), DecodeError);
}

TEST_CASE("constrained_softmax examples") {
  CHECK(constrained_softmax(std::vector<double>{0, 0, 0, 0}, TokenSet::of({0, 1})) ==
        std::vector<double>{0.5, 0.5, 0.0, 0.0});
  const auto p = constrained_softmax(std::vector<double>{1, 0, 0}, TokenSet::full(3));
  // mpmath: e/(e+2), 1/(e+2)
  CHECK(p[0] == doctest::Approx(0.576116884765829109858).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.211941557617085445071).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(0.211941557617085445071).epsilon(1e-15));
  CHECK(constrained_softmax(std::vector<double>{5, -kInf, -kInf}, TokenSet::of({0})) ==
        std::vector<double>{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(constrained_softmax(std::vector<double>{1, 2}, TokenSet()), DecodeError);
  CHECK_THROWS_AS(constrained_softmax(std::vector<double>{-kInf, 2}, TokenSet::of({0})), DecodeError);
}

TEST_CASE("masking identities on random rows") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> z(16);
    for (double& v : z) v = normal(rng);
    TokenSet valid = TokenSet::of({trial % 16});
    for (int k = 0; k < 16; ++k) {
      if (coin(rng)) valid.insert(k);
    }
    const auto full = constrained_softmax(z, TokenSet::full(16));
    const auto ref = plain_softmax(z);
    const auto p = constrained_softmax(z, valid);
    const auto pm = constrained_softmax(mask_logits(z, valid), TokenSet::full(16));
    double total = 0.0, best = -kInf;
    TokenId arg = -1;
    for (std::size_t k = 0; k < 16; ++k) {
      CHECK(std::abs(full[k] - ref[k]) <= 1e-12);
      CHECK(std::abs(p[k] - pm[k]) <= 1e-15);
      if (!valid.contains(static_cast<TokenId>(k))) CHECK(p[k] == 0.0);
      total += p[k];
      if (valid.contains(static_cast<TokenId>(k)) && z[k] > best) {
        best = z[k];
        arg = static_cast<TokenId>(k);
      }
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(masked_argmax(z, valid) == arg);
  }
}

TEST_CASE("argmax ties go to the lowest id") {
  CHECK(masked_argmax(std::vector<double>{1, 3, 3, 3}, TokenSet::of({2, 3})) == 2);
  CHECK(masked_argmax(std::vector<double>{0, 0, 0}, TokenSet::full(3)) == 0);
}

TEST_CASE("constrained greedy decoding always yields a formula") {
  const TlVocab tv;
  const LtlGrammar g(tv);
  const ModelParams params = init_model({30, static_cast<std::size_t>(tv.size()), 16, 24}, 4);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> budget(2, 40);
  std::size_t unconstrained_failures = 0;
  for (int i = 0; i < 300; ++i) {
    const auto src = random_src(rng, 30);
    const std::size_t max_len = budget(rng);
    const auto out = greedy_decode(params, src, max_len, true, g);
    CHECK(out.size() <= max_len);
    CHECK(g.accepts(out));
    CHECK(parse_decoded(out, tv).ok());
    if (!parse_decoded(greedy_decode(params, src, 64, false, g), tv).ok()) ++unconstrained_failures;
  }
  CHECK(unconstrained_failures > 0);
  CHECK_THROWS_AS(greedy_decode(params, std::vector<int>{1}, 1, true, g), DecodeError);
}

TEST_CASE("parse_decoded requires exactly one trailing EOS") {
  const TlVocab tv;
  auto toks = lex_formula("◇ prop_1", tv);
  CHECK_FALSE(parse_decoded(toks, tv).ok());
  toks.push_back(kEosId);
  CHECK(parse_decoded(toks, tv).ok());
  toks.push_back(kEosId);
  CHECK_FALSE(parse_decoded(toks, tv).ok());
}

TEST_CASE("overfit one pair, then decode it back") {
  const TlVocab tv;
  const LtlGrammar g(tv);
  Example ex{{1, 2, 3, 4}, lex_formula("( ◇ prop_1 ∪ □ ¬ prop_2 )", tv)};
  ex.tgt.push_back(kEosId);
  const std::vector<Example> data{ex};
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 1;
  cfg.d_emb = 8;
  cfg.d_hidden = 16;
  const TrainResult r = train(data, cfg, g, 6);
  CHECK(greedy_decode(r.params, ex.src, 64, true, g) == ex.tgt);
  CHECK(greedy_decode(r.params, ex.src, 64, false, g) == ex.tgt);

  SourceVocab vocab({"<unk>", "a", "b", "c", "d", "e"});
  const std::vector<std::string> words{"a", "b", "c", "d"};
  CHECK(translate(r.params, vocab, words, true, 64, g) == parse_formula("( ◇ prop_1 ∪ □ ¬ prop_2 )"));
}
