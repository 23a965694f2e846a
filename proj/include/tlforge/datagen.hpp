/*!
 * \file tlforge/datagen.hpp
 * \brief Synthetic NL/LTL corpora with gold AP labels.
 *
 * Sentences are realized compositionally from a sampled formula: every
 * operator has a set of phrase templates and every proposition a verb
 * template plus an AP phrase. Binary operators always carry a prefix marker
 * ("both ... and ...", "if ... then ..."), so each sentence has exactly one
 * reading.
 */
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tlforge/lifting.hpp"

namespace tlforge {

using Words = std::vector<std::string>;

/*! \brief Words around an AP phrase, e.g. {"go to the"} + AP + {}. */
struct VerbTemplate {
  Words before;
  Words after;
};

/*! \brief Prefix marker and separator of a binary operator realization. */
struct BinaryTemplate {
  Words prefix;
  Words infix;
};

struct DomainLexicon {
  std::string name;
  std::vector<std::string> ap_phrases;
  std::vector<VerbTemplate> visit;
  std::vector<VerbTemplate> revisit;
  std::vector<Words> negation, next, eventually, always;
  std::vector<BinaryTemplate> conjunction, disjunction, implication, until;
};

/*! \brief Built-in domains: "blocks", "grid", "robot". */
const DomainLexicon& builtin_lexicon(std::string_view name);
const std::vector<std::string>& builtin_domain_names();

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t count = 500;
  int max_depth = 3;
  int max_aps = kDefaultMaxProps;
  std::string domain = "grid";
  /*! \brief Chance that a leaf reuses an already-introduced proposition. */
  double coref_prob = 0.2;
};

class DatagenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*!
 * \brief Recursive sampler: a node at depth d recurses with probability
 *        0.6^d (never at max_depth), choosing uniformly among the eight
 *        operators. Proposition ids are numbered by first appearance.
 */
Formula sample_formula(std::mt19937_64& rng, int max_depth, int max_aps, double coref_prob = 0.2);

/*! \throws DatagenError("TooManyProps") when the lexicon has too few phrases. */
LiftedExample render_example(const Formula& f, const DomainLexicon& lex, std::mt19937_64& rng);

/*!
 * \brief Join two examples that share no AP: NL joined with a connective,
 *        b's ids shifted past a's, formulas joined under AND or UNTIL.
 * \throws DatagenError("SharedAP") if an AP phrase occurs in both.
 */
LiftedExample concat_examples(const LiftedExample& a, const LiftedExample& b, std::mt19937_64& rng);

std::vector<LiftedExample> gen_corpus(const GenConfig& cfg);

struct CorpusStats {
  std::size_t count = 0;
  std::size_t unique_nl = 0;
  std::size_t unique_tl = 0;
  std::size_t vocab_size = 0;
};

CorpusStats corpus_stats(std::span<const LiftedExample> corpus);

}  // namespace tlforge
