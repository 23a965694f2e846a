/*!
 * \file harness.cpp
 * \brief Evaluation and experiment drivers.
 */
#include "tlforge/harness.hpp"

#include "tlforge/loss.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace tlforge {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return (seed * 0x9E3779B97F4A7C15ull) ^ h;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct RecordOutcome {
  bool valid = false;
  bool lifted_correct = false;
  bool labels_correct = false;
  bool grounded_correct = false;
};

RecordOutcome evaluate_record(const ModelParams& params, const SourceVocab& vocab,
                              const Tagger* tagger, const LiftedExample& ex,
                              const EvalOptions& opts, const LtlGrammar& grammar) {
  RecordOutcome r;
  const TlVocab& tv = grammar.vocab();
  const std::vector<int> src = vocab.encode(split_words(ex.lifted_nl));
  const std::vector<TokenId> out = greedy_decode(params, src, opts.max_len, opts.constrained, grammar);
  const ParseOutcome parsed = parse_decoded(out, tv);
  r.valid = parsed.ok();
  r.lifted_correct = r.valid && ast_equal(*parsed.formula, ex.lifted_tl);
  if (tagger == nullptr) return r;

  const std::vector<int> labels = tagger->predict(ex.tokens);
  r.labels_correct = labels == ex.labels;
  LiftResult lifted;
  try {
    lifted = lift(ex.tokens, labels, tagger->max_label());
  } catch (const LiftError&) {
    return r;
  }
  const std::vector<TokenId> out2 =
      r.labels_correct ? out
                       : greedy_decode(params, vocab.encode(lifted.lifted_tokens), opts.max_len,
                                       opts.constrained, grammar);
  const ParseOutcome parsed2 = r.labels_correct ? parsed : parse_decoded(out2, tv);
  if (!parsed2.ok()) return r;
  try {
    r.grounded_correct = unlift(*parsed2.formula, lifted.ap_map, TextStyle::kAscii) == ex.grounded_tl;
  } catch (const LiftError&) {
    r.grounded_correct = false;
  }
  return r;
}

DomainMetrics reduce(const std::string& label, std::span<const RecordOutcome> outcomes,
                     bool with_tagger) {
  DomainMetrics m;
  m.domain = label;
  m.count = outcomes.size();
  std::size_t valid = 0, lifted = 0, labels = 0, grounded = 0;
  for (const auto& o : outcomes) {
    valid += o.valid;
    lifted += o.lifted_correct;
    labels += o.labels_correct;
    grounded += o.grounded_correct;
  }
  const double n = outcomes.empty() ? 1.0 : static_cast<double>(outcomes.size());
  m.validity_rate = outcomes.empty() ? 1.0 : static_cast<double>(valid) / n;
  m.parse_failures = outcomes.size() - valid;
  m.lifted_accuracy = static_cast<double>(lifted) / n;
  if (with_tagger) {
    m.lifting_accuracy = static_cast<double>(labels) / n;
    m.grounded_accuracy = static_cast<double>(grounded) / n;
  }
  return m;
}

std::vector<RecordOutcome> evaluate_all(const ModelParams& params, const SourceVocab& vocab,
                                        const Tagger* tagger,
                                        std::span<const LiftedExample> corpus,
                                        const EvalOptions& opts, const LtlGrammar& grammar) {
  std::vector<RecordOutcome> out(corpus.size());
  parallel_for(corpus.size(), opts.threads, [&](std::size_t i) {
    out[i] = evaluate_record(params, vocab, tagger, corpus[i], opts, grammar);
  });
  return out;
}

Json curve_json(std::span<const double> curve) { return Json(std::vector<double>(curve.begin(), curve.end())); }

Json mode_run_json(const ModeRun& r) {
  Json j;
  j["mode"] = to_string(r.mode);
  j["seconds"] = r.seconds;
  j["step0_loss"] = r.loss_curve.empty() ? 0.0 : r.loss_curve.front();
  j["final_loss"] = r.loss_curve.empty() ? 0.0 : r.loss_curve.back();
  Json ev = Json::array();
  for (const auto& m : r.eval) ev.push_back(to_json(m));
  j["eval"] = std::move(ev);
  j["loss_curve"] = curve_json(r.loss_curve);
  return j;
}

struct Trained {
  ModeRun run;
  ModelParams params;
};

Trained train_and_eval(std::span<const Example> train_set, const SourceVocab& vocab,
                       const TrainConfig& base, LossMode mode, std::uint64_t seed,
                       const LtlGrammar& grammar, const Tagger* tagger,
                       const std::vector<std::pair<std::string, std::vector<LiftedExample>>>& evals,
                       const EvalOptions& eval_opts) {
  TrainConfig tc = base;
  tc.mode = mode;
  tc.seed = seed;
  const auto t0 = Clock::now();
  TrainResult tr = train(train_set, tc, grammar, vocab.size());
  Trained out{ModeRun{}, std::move(tr.params)};
  out.run.mode = mode;
  out.run.loss_curve = std::move(tr.loss_curve);
  for (const auto& [label, data] : evals) {
    out.run.eval.push_back(evaluate_pooled(out.params, vocab, tagger, data, eval_opts, grammar, label));
  }
  out.run.seconds = seconds_since(t0);
  return out;
}

}  // namespace

SourceVocab build_source_vocab(std::span<const LiftedExample> corpus, int max_props) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(corpus.size());
  for (const auto& ex : corpus) sentences.push_back(split_words(ex.lifted_nl));
  return SourceVocab::build(sentences, max_props);
}

std::vector<Example> encode_corpus(std::span<const LiftedExample> corpus, const SourceVocab& vocab,
                                   const TlVocab& tl_vocab) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const LiftedExample& ex = corpus[i];
    if (ex.lifted_tl.max_prop() > tl_vocab.max_props()) {
      throw ModelError(ModelErrorKind::kTargetNotValid,
                       "TargetNotValid: record " + std::to_string(i) + " uses prop_" +
                           std::to_string(ex.lifted_tl.max_prop()) + " but max_props is " +
                           std::to_string(tl_vocab.max_props()));
    }
    Example e;
    e.src = vocab.encode(split_words(ex.lifted_nl));
    e.tgt = to_tokens(ex.lifted_tl, tl_vocab);
    e.tgt.push_back(kEosId);
    out.push_back(std::move(e));
  }
  return out;
}

CorpusSplit split_corpus(std::span<const LiftedExample> corpus, double test_fraction,
                         std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must be in [0, 1)");
  }
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(derive_seed(seed, "split"));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(corpus.size())));
  CorpusSplit s;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k + n_test < order.size() ? s.train : s.test).push_back(corpus[order[k]]);
  }
  return s;
}

std::vector<DomainMetrics> evaluate(const ModelParams& params, const SourceVocab& vocab,
                                    const Tagger* tagger, std::span<const LiftedExample> corpus,
                                    const EvalOptions& opts, const LtlGrammar& grammar) {
  const std::vector<RecordOutcome> outcomes = evaluate_all(params, vocab, tagger, corpus, opts, grammar);
  std::vector<std::string> order;
  std::map<std::string, std::vector<RecordOutcome>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto [it, fresh] = groups.try_emplace(corpus[i].domain);
    if (fresh) order.push_back(corpus[i].domain);
    it->second.push_back(outcomes[i]);
  }
  std::vector<DomainMetrics> out;
  for (const auto& d : order) out.push_back(reduce(d, groups[d], tagger != nullptr));
  return out;
}

DomainMetrics evaluate_pooled(const ModelParams& params, const SourceVocab& vocab,
                              const Tagger* tagger, std::span<const LiftedExample> corpus,
                              const EvalOptions& opts, const LtlGrammar& grammar,
                              const std::string& label) {
  const std::vector<RecordOutcome> outcomes = evaluate_all(params, vocab, tagger, corpus, opts, grammar);
  return reduce(label, outcomes, tagger != nullptr);
}

MomentEstimate gradient_moments(const ModelParams& params, std::span<const Example> data,
                                std::size_t batches, std::size_t batch_size, std::uint64_t seed,
                                const LtlGrammar& grammar) {
  if (data.empty() || batches == 0 || batch_size == 0) {
    throw LossError(LossErrorKind::kEmptyBatch, "EmptyBatch: no data for moment estimate");
  }
  std::mt19937_64 rng(derive_seed(seed, "moments"));
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<std::vector<double>> std_grads, forced_grads;
  for (std::size_t b = 0; b < batches; ++b) {
    std::vector<Example> batch;
    for (std::size_t k = 0; k < batch_size; ++k) batch.push_back(data[pick(rng)]);
    std_grads.push_back(backward(params, batch, LossMode::kStandard, grammar).grad);
    forced_grads.push_back(backward(params, batch, LossMode::kGrammarForced, grammar).grad);
  }
  return {grad_second_moment(std_grads), grad_second_moment(forced_grads), batches};
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["learning_rate"] = c.train.learning_rate;
  j["epochs"] = c.train.epochs;
  j["batch_size"] = c.train.batch_size;
  j["d_emb"] = c.train.d_emb;
  j["d_hidden"] = c.train.d_hidden;
  j["max_len"] = c.train.max_len;
  j["seeds"] = c.seeds;
  j["counts"] = c.counts;
  j["domain"] = c.domain;
  j["domains"] = c.domains;
  j["held_out"] = c.held_out;
  j["test_fraction"] = c.test_fraction;
  j["max_depth"] = c.max_depth;
  j["max_aps"] = c.max_aps;
  j["coref_prob"] = c.coref_prob;
  j["tagger_epochs"] = c.tagger_epochs;
  j["moment_batches"] = c.moment_batches;
  j["constrained"] = c.eval.constrained;
  j["threads"] = c.eval.threads;
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig c) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "learning_rate") c.train.learning_rate = v.get<double>();
    else if (key == "epochs") c.train.epochs = v.get<std::size_t>();
    else if (key == "batch_size") c.train.batch_size = v.get<std::size_t>();
    else if (key == "d_emb") c.train.d_emb = v.get<std::size_t>();
    else if (key == "d_hidden") c.train.d_hidden = v.get<std::size_t>();
    else if (key == "max_len") c.train.max_len = c.eval.max_len = v.get<std::size_t>();
    else if (key == "seeds") c.seeds = v.get<std::vector<std::uint64_t>>();
    else if (key == "seed") c.seeds = {v.get<std::uint64_t>()};
    else if (key == "counts") c.counts = v.get<std::vector<std::size_t>>();
    else if (key == "count") c.counts = {v.get<std::size_t>()};
    else if (key == "domain") c.domain = v.get<std::string>();
    else if (key == "domains") c.domains = v.get<std::vector<std::string>>();
    else if (key == "held_out") c.held_out = v.is_string() ? std::vector<std::string>{v.get<std::string>()}
                                                           : v.get<std::vector<std::string>>();
    else if (key == "test_fraction") c.test_fraction = v.get<double>();
    else if (key == "max_depth") c.max_depth = v.get<int>();
    else if (key == "max_aps") c.max_aps = v.get<int>();
    else if (key == "coref_prob") c.coref_prob = v.get<double>();
    else if (key == "tagger_epochs") c.tagger_epochs = v.get<std::size_t>();
    else if (key == "moment_batches") c.moment_batches = v.get<std::size_t>();
    else if (key == "constrained") c.eval.constrained = v.get<bool>();
    else if (key == "threads") c.eval.threads = v.get<unsigned>();
    else throw std::invalid_argument("unknown experiment config key '" + key + "'");
  }
  return c;
}

Json to_json(const DomainMetrics& m) {
  Json j;
  j["domain"] = m.domain;
  j["count"] = m.count;
  j["lifted_accuracy"] = m.lifted_accuracy;
  j["grounded_accuracy"] = m.grounded_accuracy ? Json(*m.grounded_accuracy) : Json(nullptr);
  j["lifting_accuracy"] = m.lifting_accuracy ? Json(*m.lifting_accuracy) : Json(nullptr);
  j["validity_rate"] = m.validity_rate;
  j["parse_failures"] = m.parse_failures;
  return j;
}

InDomainReport run_in_domain(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const auto t0 = Clock::now();
  const TlVocab tv(cfg.max_aps);
  const LtlGrammar grammar(tv);
  InDomainReport rep;
  rep.cfg = cfg;
  for (std::size_t count : cfg.counts) {
    for (std::uint64_t seed : cfg.seeds) {
      GenConfig g;
      g.seed = derive_seed(seed, cfg.domain);
      g.count = count;
      g.max_depth = cfg.max_depth;
      g.max_aps = cfg.max_aps;
      g.coref_prob = cfg.coref_prob;
      g.domain = cfg.domain;
      const std::vector<LiftedExample> corpus = gen_corpus(g);
      const CorpusSplit split = split_corpus(corpus, cfg.test_fraction, seed);
      const SourceVocab vocab = build_source_vocab(split.train, cfg.max_aps);
      const std::vector<Example> train_set = encode_corpus(split.train, vocab, tv);
      const Tagger tagger = train_tagger(split.train, cfg.tagger_epochs, seed, cfg.max_aps);

      InDomainRun run;
      run.seed = seed;
      run.count = count;
      run.train_size = split.train.size();
      run.test_size = split.test.size();
      const ModelDims dims{vocab.size(), static_cast<std::size_t>(tv.size()), cfg.train.d_emb,
                           cfg.train.d_hidden};
      run.moments_at_init = gradient_moments(init_model(dims, seed), train_set, cfg.moment_batches,
                                             cfg.train.batch_size, seed, grammar);
      const std::vector<std::pair<std::string, std::vector<LiftedExample>>> evals{{cfg.domain, split.test}};
      for (LossMode mode : {LossMode::kStandard, LossMode::kGrammarForced}) {
        if (progress) {
          progress("in-domain " + cfg.domain + " count=" + std::to_string(count) + " seed=" +
                   std::to_string(seed) + " mode=" + to_string(mode));
        }
        Trained t = train_and_eval(train_set, vocab, cfg.train, mode, seed, grammar, &tagger, evals, cfg.eval);
        (mode == LossMode::kStandard ? run.standard : run.forced) = std::move(t.run);
      }
      rep.runs.push_back(std::move(run));
    }
  }
  rep.seconds = seconds_since(t0);
  return rep;
}

Json to_json(const InDomainReport& r) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = "in_domain";
  j["config"] = to_json(r.cfg);
  j["seconds"] = r.seconds;
  Json runs = Json::array();
  for (const auto& run : r.runs) {
    Json x;
    x["seed"] = run.seed;
    x["count"] = run.count;
    x["train_size"] = run.train_size;
    x["test_size"] = run.test_size;
    x["grad_second_moment_at_init"] = {{"standard", run.moments_at_init.standard},
                                       {"grammar_forced", run.moments_at_init.forced},
                                       {"batches", run.moments_at_init.batches}};
    x["standard"] = mode_run_json(run.standard);
    x["grammar_forced"] = mode_run_json(run.forced);
    runs.push_back(std::move(x));
  }
  j["runs"] = std::move(runs);
  return j;
}

OodReport run_ood(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const auto t0 = Clock::now();
  if (cfg.domains.size() < 2) throw std::invalid_argument("OOD needs at least two domains");
  const TlVocab tv(cfg.max_aps);
  const LtlGrammar grammar(tv);
  OodReport rep;
  rep.cfg = cfg;
  const std::size_t count = cfg.counts.empty() ? 500 : cfg.counts.front();
  for (std::uint64_t seed : cfg.seeds) {
    std::map<std::string, std::vector<LiftedExample>> full;
    std::map<std::string, CorpusSplit> splits;
    for (const auto& d : cfg.domains) {
      GenConfig g;
      g.seed = derive_seed(seed, d);
      g.count = count;
      g.max_depth = cfg.max_depth;
      g.max_aps = cfg.max_aps;
      g.coref_prob = cfg.coref_prob;
      g.domain = d;
      full[d] = gen_corpus(g);
      splits[d] = split_corpus(full[d], cfg.test_fraction, seed);
    }
    for (const auto& held : cfg.held_out) {
      if (!full.contains(held)) throw std::invalid_argument("held-out domain '" + held + "' is not in domains");
      std::vector<LiftedExample> train_docs;
      std::vector<std::pair<std::string, std::vector<LiftedExample>>> evals;
      for (const auto& d : cfg.domains) {
        if (d == held) {
          evals.emplace_back(d, full[d]);
        } else {
          train_docs.insert(train_docs.end(), splits[d].train.begin(), splits[d].train.end());
          evals.emplace_back(d, splits[d].test);
        }
      }
      const SourceVocab vocab = build_source_vocab(train_docs, cfg.max_aps);
      const std::vector<Example> train_set = encode_corpus(train_docs, vocab, tv);
      const Tagger tagger = train_tagger(train_docs, cfg.tagger_epochs, seed, cfg.max_aps);
      for (LossMode mode : {LossMode::kStandard, LossMode::kGrammarForced}) {
        if (progress) {
          progress("ood held_out=" + held + " seed=" + std::to_string(seed) + " mode=" + to_string(mode));
        }
        Trained t = train_and_eval(train_set, vocab, cfg.train, mode, seed, grammar, &tagger, evals, cfg.eval);
        rep.cells.push_back(OodCell{seed, held, std::move(t.run)});
      }
    }
  }
  rep.seconds = seconds_since(t0);
  return rep;
}

Json to_json(const OodReport& r) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = "ood";
  j["config"] = to_json(r.cfg);
  j["seconds"] = r.seconds;
  j["note"] = "held-out domain evaluated on its whole corpus; training domains on their test splits";
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json x = mode_run_json(c.run);
    x["seed"] = c.seed;
    x["held_out"] = c.held_out;
    cells.push_back(std::move(x));
  }
  j["cells"] = std::move(cells);
  j["table"] = ood_table(r);
  return j;
}

std::string ood_table(const OodReport& r) {
  // (held_out, mode, eval domain) -> sum, n
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, int>> acc;
  for (const auto& c : r.cells) {
    for (const auto& m : c.run.eval) {
      auto& a = acc[{c.held_out, to_string(c.run.mode), m.domain}];
      a.first += m.lifted_accuracy;
      a.second += 1;
    }
  }
  std::ostringstream os;
  os << std::left << std::setw(12) << "held_out" << std::setw(16) << "mode";
  for (const auto& d : r.cfg.domains) os << std::setw(10) << d;
  os << "\n";
  for (const auto& held : r.cfg.held_out) {
    for (const char* mode : {"standard", "grammar_forced"}) {
      os << std::setw(12) << held << std::setw(16) << mode;
      for (const auto& d : r.cfg.domains) {
        auto it = acc.find({held, mode, d});
        std::ostringstream cell;
        if (it != acc.end() && it->second.second > 0) {
          cell << std::fixed << std::setprecision(3) << it->second.first / it->second.second;
          if (d == held) cell << "*";
        } else {
          cell << "-";
        }
        os << std::setw(10) << cell.str();
      }
      os << "\n";
    }
  }
  os << "(* = held-out domain; lifted exact match averaged over " << r.cfg.seeds.size() << " seeds)\n";
  return os.str();
}

std::string ood_csv(const OodReport& r) {
  std::ostringstream os;
  os << "seed,held_out,mode,eval_domain,count,lifted_accuracy,grounded_accuracy,lifting_accuracy,validity_rate\n";
  os << std::setprecision(6);
  for (const auto& c : r.cells) {
    for (const auto& m : c.run.eval) {
      os << c.seed << ',' << c.held_out << ',' << to_string(c.run.mode) << ',' << m.domain << ','
         << m.count << ',' << m.lifted_accuracy << ',';
      if (m.grounded_accuracy) os << *m.grounded_accuracy;
      os << ',';
      if (m.lifting_accuracy) os << *m.lifting_accuracy;
      os << ',' << m.validity_rate << '\n';
    }
  }
  return os.str();
}

std::string metrics_csv(std::span<const DomainMetrics> metrics) {
  std::ostringstream os;
  os << "domain,count,lifted_accuracy,grounded_accuracy,lifting_accuracy,validity_rate,parse_failures\n";
  os << std::setprecision(6);
  for (const auto& m : metrics) {
    os << m.domain << ',' << m.count << ',' << m.lifted_accuracy << ',';
    if (m.grounded_accuracy) os << *m.grounded_accuracy;
    os << ',';
    if (m.lifting_accuracy) os << *m.lifting_accuracy;
    os << ',' << m.validity_rate << ',' << m.parse_failures << '\n';
  }
  return os.str();
}

void write_loss_csv(const std::string& path, std::span<const double> curve) {
  std::ostringstream os;
  os << "step,loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < curve.size(); ++i) os << i << ',' << curve[i] << '\n';
  write_text(path, os.str());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace tlforge
