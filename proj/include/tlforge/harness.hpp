/*!
 * \file tlforge/harness.hpp
 * \brief Corpus encoding, parallel evaluation, experiment drivers and reports.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tlforge/checkpoint.hpp"
#include "tlforge/datagen.hpp"
#include "tlforge/decode.hpp"
#include "tlforge/tagger.hpp"

namespace tlforge {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

/*! \brief Source vocabulary over the lifted NL of a corpus. */
SourceVocab build_source_vocab(std::span<const LiftedExample> corpus, int max_props);

/*!
 * \brief Lifted NL -> source ids, lifted TL -> target ids + EOS.
 * \throws ModelError(kTargetNotValid) naming the record if a prop exceeds max_props.
 */
std::vector<Example> encode_corpus(std::span<const LiftedExample> corpus, const SourceVocab& vocab,
                                   const TlVocab& tl_vocab);

struct CorpusSplit {
  std::vector<LiftedExample> train;
  std::vector<LiftedExample> test;
};

/*! \brief Seeded shuffle, then the last round(n * test_fraction) records go to test. */
CorpusSplit split_corpus(std::span<const LiftedExample> corpus, double test_fraction,
                         std::uint64_t seed);

struct EvalOptions {
  bool constrained = true;
  std::size_t max_len = 64;
  /*! \brief Worker threads; 0 means hardware concurrency. */
  unsigned threads = 0;
};

struct DomainMetrics {
  std::string domain;
  std::size_t count = 0;
  /*! \brief Exact match of the decoded lifted formula, gold lifting. */
  double lifted_accuracy = 0.0;
  /*! \brief Fraction of gold-lifted decodes that parse. */
  double validity_rate = 0.0;
  std::size_t parse_failures = 0;
  /*! \brief End-to-end grounded exact match with tagger lifting (needs a tagger). */
  std::optional<double> grounded_accuracy;
  /*! \brief Per-sequence exact label accuracy of the tagger. */
  std::optional<double> lifting_accuracy;
};

/*!
 * \brief Metrics per domain (records grouped by their domain field, in
 *        first-appearance order). Decoding fans out over threads; the
 *        reduction order is fixed.
 */
std::vector<DomainMetrics> evaluate(const ModelParams& params, const SourceVocab& vocab,
                                    const Tagger* tagger, std::span<const LiftedExample> corpus,
                                    const EvalOptions& opts, const LtlGrammar& grammar);

/*! \brief Metrics over the whole corpus under one domain label. */
DomainMetrics evaluate_pooled(const ModelParams& params, const SourceVocab& vocab,
                              const Tagger* tagger, std::span<const LiftedExample> corpus,
                              const EvalOptions& opts, const LtlGrammar& grammar,
                              const std::string& label);

struct MomentEstimate {
  double standard = 0.0;
  double forced = 0.0;
  std::size_t batches = 0;
};

/*!
 * \brief Mean squared norm of the batch gradient under both losses, over
 *        `batches` batches drawn with replacement at the same parameters.
 */
MomentEstimate gradient_moments(const ModelParams& params, std::span<const Example> data,
                                std::size_t batches, std::size_t batch_size, std::uint64_t seed,
                                const LtlGrammar& grammar);

struct ExperimentConfig {
  TrainConfig train;  // mode is ignored: both modes always run
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<std::size_t> counts{500};
  std::string domain = "grid";
  std::vector<std::string> domains{"blocks", "grid", "robot"};
  std::vector<std::string> held_out{"blocks", "grid", "robot"};
  double test_fraction = 0.2;
  int max_depth = 3;
  int max_aps = kDefaultMaxProps;
  double coref_prob = 0.2;
  std::size_t tagger_epochs = 10;
  std::size_t moment_batches = 32;
  EvalOptions eval;
};

Json to_json(const ExperimentConfig& cfg);
/*! \brief Overlay recognized keys of `j` on `base`. \throws std::invalid_argument on unknown keys. */
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});

Json to_json(const DomainMetrics& m);

struct ModeRun {
  LossMode mode = LossMode::kStandard;
  std::vector<double> loss_curve;
  std::vector<DomainMetrics> eval;
  double seconds = 0.0;
};

struct InDomainRun {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  MomentEstimate moments_at_init;
  ModeRun standard;
  ModeRun forced;
};

struct InDomainReport {
  ExperimentConfig cfg;
  std::vector<InDomainRun> runs;
  double seconds = 0.0;
};

using ProgressFn = std::function<void(const std::string&)>;

/*!
 * \brief For every count and seed: generate cfg.domain, split, train both
 *        modes from the same initialization, evaluate on the test split.
 */
InDomainReport run_in_domain(const ExperimentConfig& cfg, const ProgressFn& progress = {});
Json to_json(const InDomainReport& r);

struct OodCell {
  std::uint64_t seed = 0;
  std::string held_out;
  ModeRun run;
};

struct OodReport {
  ExperimentConfig cfg;
  std::vector<OodCell> cells;
  double seconds = 0.0;
};

/*!
 * \brief For every seed and held-out domain: train both modes on the train
 *        splits of the other domains, evaluate on their test splits and on
 *        the whole held-out corpus.
 */
OodReport run_ood(const ExperimentConfig& cfg, const ProgressFn& progress = {});
Json to_json(const OodReport& r);

/*!
 * \brief Table with one row per (held-out, mode) and one column per eval
 *        domain; cells are lifted exact match averaged over seeds.
 */
std::string ood_table(const OodReport& r);
/*! \brief Long-form CSV: seed,held_out,mode,eval_domain,count,lifted_accuracy,... */
std::string ood_csv(const OodReport& r);

std::string metrics_csv(std::span<const DomainMetrics> metrics);
void write_loss_csv(const std::string& path, std::span<const double> curve);
void write_text(const std::string& path, const std::string& text);

// ---------------------------------------------------------------------------
// Property suite
// ---------------------------------------------------------------------------

struct PropertySuiteConfig {
  std::uint64_t seed = 1;
  std::size_t decodes = 1000;
  std::size_t triples = 10000;
  std::size_t roundtrips = 1000;
  std::size_t moment_draws = 5;
  std::size_t moment_batches = 32;
  std::size_t brute_max_len = 8;
  int brute_max_props = 1;
};

struct PropertyCheck {
  std::string name;
  bool passed = false;
  /*! \brief Measurements that are reported but not asserted. */
  bool informational = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<PropertyCheck> run_property_suite(const PropertySuiteConfig& cfg,
                                              const ProgressFn& progress = {});
Json to_json(std::span<const PropertyCheck> checks, const PropertySuiteConfig& cfg);

}  // namespace tlforge
