#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "tlforge/corpus_io.hpp"
#include "tlforge/datagen.hpp"

using namespace tlforge;

namespace {

std::size_t distinct_formulas(int max_depth) {
  std::mt19937_64 rng(11);
  std::set<std::string> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(render(sample_formula(rng, max_depth, 5)));
  return seen.size();
}

// Append examples to `acc` until it has at least `target` APs, skipping draws that share a phrase.
LiftedExample grow(LiftedExample acc, std::size_t target, const DomainLexicon& lex, std::mt19937_64& rng) {
  while (acc.ap_map.size() < target) {
    const Formula f = sample_formula(rng, 3, static_cast<int>(std::min<std::size_t>(5, target - acc.ap_map.size())));
    const LiftedExample b = render_example(f, lex, rng);
    try {
      acc = concat_examples(acc, b, rng);
    } catch (const DatagenError&) {
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("max_depth 1 always gives a bare proposition") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) CHECK(sample_formula(rng, 1, 5) == Formula::Prop(1));
  CHECK_THROWS_AS(sample_formula(rng, 0, 5), std::invalid_argument);
}

TEST_CASE("sampled formulas respect their bounds and round trip") {
  std::mt19937_64 rng(2);
  const TlVocab v(5);
  for (int i = 0; i < 10000; ++i) {
    const Formula f = sample_formula(rng, 4, 3);
    CHECK(f.depth() <= 4);
    const auto props = f.props_in_order();
    CHECK(canonicalize_labels(props) == props);
    CHECK(std::set<int>(props.begin(), props.end()).size() <= 3);
    REQUIRE(ast_equal(parse_formula(render(f), v), f));
  }
}

TEST_CASE("diversity grows with depth") {
  const std::size_t d1 = distinct_formulas(1), d2 = distinct_formulas(2), d3 = distinct_formulas(3),
                    d5 = distinct_formulas(5);
  CHECK(d1 == 1);
  CHECK(d1 < d2);
  CHECK(d2 < d3);
  CHECK(d3 < d5);
}

TEST_CASE("render an eventually formula") {
  std::mt19937_64 rng(3);
  const DomainLexicon& grid = builtin_lexicon("grid");
  const LiftedExample ex = render_example(parse_formula("◇ prop_1"), grid, rng);
  CHECK(ex.tokens.back() == ".");
  CHECK(ex.ap_map.size() == 1);
  CHECK(std::find(grid.ap_phrases.begin(), grid.ap_phrases.end(), ex.ap_map.at(1)) != grid.ap_phrases.end());
  std::size_t marked = 0;
  for (std::size_t i = 0; i < ex.tokens.size(); ++i) marked += ex.labels[i] == 1;
  CHECK(marked == split_words(ex.ap_map.at(1)).size());
  CHECK(ex.grounded_tl == "F " + canonical_ap_name(ex.ap_map.at(1)));
  CHECK(ex.lifted_nl.find("prop_1") != std::string::npos);
  CHECK(check_record(ex).empty());
}

TEST_CASE("co-reference uses a revisit phrasing") {
  std::mt19937_64 rng(5);
  const LiftedExample ex = render_example(parse_formula("( prop_1 ∧ ◇ prop_1 )"), builtin_lexicon("robot"), rng);
  CHECK(ex.ap_map.size() == 1);
  CHECK(check_record(ex).empty());
  CHECK_THROWS_AS(render_example(parse_formula("prop_2"), builtin_lexicon("robot"), rng), std::invalid_argument);
}

TEST_CASE("generated corpora are clean and deterministic") {
  for (const std::string& domain : builtin_domain_names()) {
    GenConfig cfg;
    cfg.domain = domain;
    cfg.count = 500;
    cfg.seed = 4;
    const auto a = gen_corpus(cfg);
    const auto b = gen_corpus(cfg);
    REQUIRE(a.size() == 500);
    std::size_t coref = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(check_record(a[i]) == "");
      CHECK(to_jsonl_line(a[i]) == to_jsonl_line(b[i]));
      CHECK(a[i].domain == domain);
      CHECK(a[i].ap_map.size() <= 5);
      coref += a[i].lifted_tl.props_in_order().size() > a[i].ap_map.size();
    }
    CHECK(coref > 0);
    const CorpusStats s = corpus_stats(a);
    CHECK(s.count == 500);
    CHECK(s.unique_nl > 250);
    CHECK(s.unique_tl > 50);
    CHECK(s.unique_tl <= s.unique_nl);
    CHECK(s.vocab_size > 50);
  }
  GenConfig bad;
  bad.count = 0;
  CHECK_THROWS_AS(gen_corpus(bad), std::invalid_argument);
  bad.count = 1;
  bad.max_aps = 16;
  CHECK_THROWS_AS(gen_corpus(bad), std::invalid_argument);
  bad.max_aps = 5;
  bad.domain = "kitchen";
  CHECK_THROWS_AS(gen_corpus(bad), DatagenError);
}

TEST_CASE("concatenation shifts ids") {
  std::mt19937_64 rng(6);
  const DomainLexicon& grid = builtin_lexicon("grid");
  LiftedExample a, b;
  do {
    a = render_example(parse_formula("( prop_1 ∨ prop_2 )"), grid, rng);
    b = render_example(parse_formula("( prop_1 ∧ ( prop_2 ∪ prop_3 ) )"), grid, rng);
  } while ([&] {
    for (const auto& [i, p] : a.ap_map)
      for (const auto& [j, q] : b.ap_map)
        if (p == q) return true;
    return false;
  }());
  const LiftedExample c = concat_examples(a, b, rng);
  CHECK(c.ap_map.size() == 5);
  CHECK(c.ap_map.at(3) == b.ap_map.at(1));
  CHECK(c.ap_map.at(5) == b.ap_map.at(3));
  CHECK(labels_well_formed(c.labels, 5));
  CHECK(check_record(c).empty());
  CHECK((c.lifted_tl.op() == Op::kAnd || c.lifted_tl.op() == Op::kUntil));
  CHECK(ast_equal(c.lifted_tl.lhs(), a.lifted_tl));
  CHECK(render(c.lifted_tl.rhs()) == "( prop_3 ∧ ( prop_4 ∪ prop_5 ) )");
  CHECK(c.tokens.size() == a.tokens.size() - 1 + (c.lifted_tl.op() == Op::kAnd ? 2 : 1) + b.tokens.size());
  CHECK(std::count(c.tokens.begin(), c.tokens.end(), ".") == 1);

  try {
    concat_examples(a, a, rng);
    FAIL("expected SharedAP");
  } catch (const DatagenError& e) {
    CHECK(std::string(e.what()).rfind("SharedAP", 0) == 0);
  }
}

TEST_CASE("chained concatenation reaches the 6-15 AP ranges") {
  std::mt19937_64 rng(7);
  const DomainLexicon& grid = builtin_lexicon("grid");
  for (std::size_t target : {6, 10, 11, 15}) {
    for (int rep = 0; rep < 10; ++rep) {
      const LiftedExample ex = grow(render_example(sample_formula(rng, 3, 3), grid, rng), target, grid, rng);
      CHECK(ex.ap_map.size() == target);
      CHECK(labels_well_formed(ex.labels, 15));
      CHECK(check_record(ex).empty());
    }
  }
}

TEST_CASE("TooManyProps") {
  std::mt19937_64 rng(8);
  DomainLexicon tiny = builtin_lexicon("grid");
  tiny.ap_phrases.resize(2);
  CHECK_NOTHROW(render_example(parse_formula("( prop_1 ∧ prop_2 )"), tiny, rng));
  try {
    render_example(parse_formula("( prop_1 ∧ ( prop_2 ∨ prop_3 ) )"), tiny, rng);
    FAIL("expected TooManyProps");
  } catch (const DatagenError& e) {
    CHECK(std::string(e.what()).rfind("TooManyProps", 0) == 0);
  }
}

TEST_CASE("built-in lexicons") {
  std::set<std::string> all;
  std::size_t total = 0;
  for (const std::string& name : builtin_domain_names()) {
    const DomainLexicon& lex = builtin_lexicon(name);
    CHECK(lex.name == name);
    CHECK(lex.ap_phrases.size() >= 30);
    CHECK(lex.ap_phrases.size() <= 60);
    std::set<std::string> canon;
    for (const auto& p : lex.ap_phrases) canon.insert(canonical_ap_name(p));
    CHECK(canon.size() == lex.ap_phrases.size());
    all.insert(canon.begin(), canon.end());
    total += canon.size();
    CHECK_FALSE(lex.visit.empty());
    CHECK_FALSE(lex.revisit.empty());
  }
  CHECK(all.size() == total);
}
