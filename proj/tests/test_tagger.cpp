#include <random>
#include <sstream>

#include "doctest.h"
#include "tlforge/datagen.hpp"
#include "tlforge/tagger.hpp"

using namespace tlforge;

namespace {

double sequence_accuracy(const Tagger& t, const std::vector<LiftedExample>& corpus) {
  std::size_t exact = 0;
  for (const auto& ex : corpus) exact += predict_labels(t, ex.tokens) == ex.labels;
  return static_cast<double>(exact) / static_cast<double>(corpus.size());
}

std::vector<LiftedExample> corpus(std::uint64_t seed, std::size_t n) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.count = n;
  return gen_corpus(cfg);
}

}  // namespace

TEST_CASE("memorizes its training set") {
  const auto train = corpus(1, 100);
  const Tagger t = train_tagger(train, 10, 1);
  CHECK(sequence_accuracy(t, train) >= 0.99);
}

TEST_CASE("generalizes to held-out sentences of the same domain") {
  const Tagger t = train_tagger(corpus(1, 400), 10, 1);
  const double acc = sequence_accuracy(t, corpus(2, 400));
  MESSAGE("held-out sequence accuracy " << acc);
  CHECK(acc >= 0.95);
}

TEST_CASE("training is deterministic in the seed") {
  const auto train = corpus(3, 60);
  std::ostringstream a, b;
  train_tagger(train, 3, 7).save(a);
  train_tagger(train, 3, 7).save(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("no weights means label 0") {
  const Tagger empty;
  CHECK(predict_labels(empty, split_words("go to the red room")) == std::vector<int>(5, 0));
  CHECK(predict_labels(empty, std::vector<std::string>{}).empty());
}

TEST_CASE("output is one canonical label per token") {
  const auto train = corpus(4, 100);
  const Tagger t = train_tagger(train, 5, 4);
  std::vector<std::string> pool;
  for (const auto& ex : train) pool.insert(pool.end(), ex.tokens.begin(), ex.tokens.end());
  pool.push_back("zebra");
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> word(0, pool.size() - 1), len(0, 40);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> s(len(rng));
    for (auto& w : s) w = pool[word(rng)];
    const auto labels = predict_labels(t, s);
    CHECK(labels.size() == s.size());
    CHECK(labels_well_formed(labels, t.max_label()));
  }
}

TEST_CASE("save and load preserve predictions") {
  const auto train = corpus(5, 80);
  const Tagger t = train_tagger(train, 4, 5);
  std::stringstream buf;
  t.save(buf);
  const Tagger back = Tagger::load(buf);
  CHECK(back.feature_count() == t.feature_count());
  CHECK(back.max_label() == t.max_label());
  for (const auto& ex : corpus(6, 50)) CHECK(predict_labels(back, ex.tokens) == predict_labels(t, ex.tokens));

  std::istringstream bad("tlforge-tagger 2\nmax_label 5\nfeatures 0\n");
  CHECK_THROWS_AS(Tagger::load(bad), TaggerError);
  std::istringstream truncated("tlforge-tagger 1\nmax_label 5\nfeatures 3\nw=a\t1 0 0 0\n");
  CHECK_THROWS_AS(Tagger::load(truncated), TaggerError);
}

TEST_CASE("feature escaping") {
  for (std::string s : {std::string("plain"), std::string("tab\there"), std::string("nl\nx"),
                        std::string("back\\slash"), std::string("\\t literal")}) {
    const std::string e = escape_feature(s);
    CHECK(e.find('\t') == std::string::npos);
    CHECK(e.find('\n') == std::string::npos);
    CHECK(unescape_feature(e) == s);
  }
  CHECK(escape_feature("a\tb") == "a\\tb");
}

TEST_CASE("tagger errors") {
  try {
    train_tagger(std::vector<LiftedExample>{}, 3, 1);
    FAIL("expected EmptyCorpus");
  } catch (const TaggerError& e) {
    CHECK(std::string(e.what()).rfind("EmptyCorpus", 0) == 0);
  }
  LiftedExample bad;
  bad.tokens = {"a", "b"};
  bad.labels = {2, 0};
  CHECK_THROWS_AS(train_tagger(std::vector<LiftedExample>{bad}, 1, 1), TaggerError);
  CHECK_THROWS_AS(Tagger(0), std::invalid_argument);
}
