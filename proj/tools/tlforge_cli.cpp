// tlforge command-line front end.
//
// Every verb accepts --config <file.json>; keys are the long flag names with
// dashes replaced by underscores, and flags given on the command line win.
// Exit codes: 0 ok, 1 usage/config/IO, 2 data contract, 3 internal failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tlforge/checkpoint.hpp"
#include "tlforge/corpus_io.hpp"
#include "tlforge/datagen.hpp"
#include "tlforge/decode.hpp"
#include "tlforge/harness.hpp"
#include "tlforge/loss.hpp"
#include "tlforge/tagger.hpp"

namespace fs = std::filesystem;
using namespace tlforge;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Merged view of a JSON config file and command-line overrides. Reading a key
// marks it as known; finish() rejects keys nobody asked for.
class Settings {
 public:
  Settings(const std::string& config_path, const Json& overrides) {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open config '" + config_path + "'");
      try {
        j_ = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + config_path + "': " + e.what());
      }
      if (!j_.is_object()) throw UsageError("config '" + config_path + "' must be a JSON object");
    } else {
      j_ = Json::object();
    }
    for (const auto& [k, v] : overrides.items()) j_[k] = v;
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    known_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw UsageError("config key '" + key + "' has the wrong type");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  /*! \brief Remaining keys, for handing to another config reader. */
  Json rest() const {
    Json out = Json::object();
    for (const auto& [k, v] : j_.items()) {
      if (!known_.contains(k)) out[k] = v;
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!known_.contains(k)) throw UsageError("unknown config key '" + k + "'");
    }
  }

 private:
  Json j_;
  std::set<std::string> known_;
};

std::string key_of(const std::string& flag) {
  std::string k = flag.substr(flag.find_first_not_of('-'));
  for (char& c : k) {
    if (c == '-') c = '_';
  }
  return k;
}

// Registers --name whose value, if given, lands in overrides[name].
template <typename T>
CLI::Option* flag(CLI::App* app, Json& overrides, const std::string& name, const std::string& help) {
  const std::string key = key_of(name);
  return app->add_option_function<T>(name, [&overrides, key](const T& v) { overrides[key] = v; }, help);
}

CLI::Option* switch_flag(CLI::App* app, Json& overrides, const std::string& name, const std::string& help) {
  const std::string key = key_of(name);
  return app->add_flag_callback(name, [&overrides, key] { overrides[key] = true; }, help);
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::exists(path)) throw UsageError(std::string(what) + " '" + path + "' does not exist");
}

void ensure_parent(const std::string& path) {
  const fs::path p = fs::path(path).parent_path();
  if (!p.empty()) fs::create_directories(p);
}

std::vector<LiftedExample> read_corpora(const std::vector<std::string>& paths) {
  if (paths.empty()) throw UsageError("no corpus given");
  std::vector<LiftedExample> out;
  for (const auto& p : paths) {
    require_file(p, "corpus");
    std::vector<LiftedExample> part;
    try {
      part = read_jsonl(p);
    } catch (const std::runtime_error& e) {
      throw DataError(e.what());
    }
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::string labels_text(std::span<const int> labels) {
  std::ostringstream os;
  for (std::size_t i = 0; i < labels.size(); ++i) os << (i ? " " : "") << labels[i];
  return os.str();
}

std::string ap_map_text(const ApMap& m) {
  Json j = Json::object();
  for (const auto& [id, text] : m) j[std::to_string(id)] = text;
  return j.dump();
}

TrainConfig read_train_config(Settings& s) {
  TrainConfig c;
  c.learning_rate = s.get("lr", c.learning_rate);
  c.epochs = s.get("epochs", c.epochs);
  c.batch_size = s.get("batch_size", c.batch_size);
  c.seed = s.get("seed", c.seed);
  c.mode = loss_mode_from_string(s.get<std::string>("mode", to_string(c.mode)));
  c.d_emb = s.get("d_emb", c.d_emb);
  c.d_hidden = s.get("d_hidden", c.d_hidden);
  c.max_len = s.get("max_len", c.max_len);
  if (!(c.learning_rate > 0.0)) throw UsageError("lr must be > 0");
  if (c.batch_size < 1) throw UsageError("batch_size must be >= 1");
  return c;
}

void add_train_flags(CLI::App* app, Json& o) {
  flag<double>(app, o, "--lr", "SGD step size");
  flag<std::size_t>(app, o, "--epochs", "passes over the corpus");
  flag<std::size_t>(app, o, "--batch-size", "examples per SGD step");
  flag<std::uint64_t>(app, o, "--seed", "RNG seed");
  flag<std::size_t>(app, o, "--d-emb", "embedding width");
  flag<std::size_t>(app, o, "--d-hidden", "GRU state width");
  flag<std::size_t>(app, o, "--max-len", "maximum target length");
}

void progress_line(const std::string& s) { std::cerr << s << std::endl; }

// ---------------------------------------------------------------------------

int cmd_datagen(const std::string& config, const Json& o) {
  Settings s(config, o);
  const std::string out_dir = s.get<std::string>("out_dir", "data");
  GenConfig base;
  base.seed = s.get("seed", base.seed);
  base.count = s.get("count", base.count);
  base.max_depth = s.get("max_depth", base.max_depth);
  base.max_aps = s.get("max_aps", base.max_aps);
  base.coref_prob = s.get("coref_prob", base.coref_prob);
  std::vector<std::string> domains = builtin_domain_names();
  if (s.has("domain")) domains = {s.get<std::string>("domain", "")};
  if (s.has("domains")) domains = s.get<std::vector<std::string>>("domains", {});
  s.finish();
  if (base.count < 1) throw UsageError("count must be >= 1");
  if (base.max_aps < 1 || base.max_aps > 15) throw UsageError("max_aps must be in 1..15");
  if (base.max_depth < 1) throw UsageError("max_depth must be >= 1");

  fs::create_directories(out_dir);
  std::cout << std::left << std::setw(10) << "domain" << std::setw(8) << "count" << std::setw(11)
            << "unique_nl" << std::setw(11) << "unique_tl" << "vocab_size\n";
  Json stats = Json::object();
  for (const auto& d : domains) {
    GenConfig g = base;
    g.domain = d;
    try {
      builtin_lexicon(d);
    } catch (const DatagenError& e) {
      throw UsageError(e.what());
    }
    const std::vector<LiftedExample> corpus = gen_corpus(g);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const std::string problem = check_record(corpus[i]);
      if (!problem.empty()) throw InternalError("generated record " + std::to_string(i) + ": " + problem);
    }
    const std::string path = (fs::path(out_dir) / (d + ".jsonl")).string();
    write_jsonl(path, corpus);
    const CorpusStats st = corpus_stats(corpus);
    std::cout << std::setw(10) << d << std::setw(8) << st.count << std::setw(11) << st.unique_nl
              << std::setw(11) << st.unique_tl << st.vocab_size << "\n";
    stats[d] = {{"file", path},
                {"count", st.count},
                {"unique_nl", st.unique_nl},
                {"unique_tl", st.unique_tl},
                {"vocab_size", st.vocab_size}};
  }
  Json report{{"schema_version", kReportSchemaVersion},
              {"experiment", "datagen"},
              {"config",
               {{"seed", base.seed},
                {"count", base.count},
                {"max_depth", base.max_depth},
                {"max_aps", base.max_aps},
                {"coref_prob", base.coref_prob},
                {"domains", domains}}},
              {"stats", stats}};
  write_text((fs::path(out_dir) / "stats.json").string(), report.dump(2) + "\n");
  return 0;
}

int cmd_train(const std::string& config, const Json& o) {
  Settings s(config, o);
  const auto corpora = s.get<std::vector<std::string>>("corpus", {});
  const std::string out = s.get<std::string>("out", "model.ckpt");
  const std::string loss_csv = s.get<std::string>("loss_csv", "");
  const std::string tagger_out = s.get<std::string>("tagger_out", "");
  const std::size_t tagger_epochs = s.get<std::size_t>("tagger_epochs", 10);
  const int max_props = s.get("max_props", kDefaultMaxProps);
  const TrainConfig tc = read_train_config(s);
  s.finish();
  if (max_props < 1 || max_props > 15) throw UsageError("max_props must be in 1..15");

  const std::vector<LiftedExample> corpus = read_corpora(corpora);
  if (corpus.empty()) throw DataError("corpus is empty");
  const TlVocab tv(max_props);
  const LtlGrammar grammar(tv);
  const SourceVocab vocab = build_source_vocab(corpus, max_props);
  const std::vector<Example> data = encode_corpus(corpus, vocab, tv);
  validate_targets(data, tc.mode, grammar);

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult tr = train(data, tc, grammar, vocab.size(), [](std::size_t epoch, double mean) {
    std::cerr << "epoch " << epoch + 1 << " mean loss " << mean << "\n";
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ensure_parent(out);
  save_checkpoint(out, Checkpoint{std::move(tr.params), vocab, max_props, tc.seed, tc.mode});
  if (!loss_csv.empty()) {
    ensure_parent(loss_csv);
    write_loss_csv(loss_csv, tr.loss_curve);
  }
  if (!tagger_out.empty()) {
    ensure_parent(tagger_out);
    train_tagger(corpus, tagger_epochs, tc.seed, max_props).save(tagger_out);
  }
  std::cout << "mode " << to_string(tc.mode) << ", " << tr.loss_curve.size() << " steps in "
            << std::fixed << std::setprecision(1) << secs << " s, final batch loss "
            << std::setprecision(4) << tr.loss_curve.back() << "\ncheckpoint " << out << "\n";
  return 0;
}

int cmd_lift(const std::string& config, const Json& o, const std::string& sentence) {
  Settings s(config, o);
  const std::string tagger_path = s.get<std::string>("tagger", "");
  s.finish();
  require_file(tagger_path, "tagger");
  const Tagger tagger = Tagger::load(tagger_path);
  const std::vector<std::string> tokens = split_words(sentence);
  const std::vector<int> labels = tagger.predict(tokens);
  const LiftResult lr = lift(tokens, labels, tagger.max_label());
  std::cout << "labels: " << labels_text(labels) << "\nlifted_nl: " << lr.lifted_nl
            << "\nap_map: " << ap_map_text(lr.ap_map) << "\n";
  return 0;
}

int cmd_translate(const std::string& config, const Json& o, const std::string& sentence) {
  Settings s(config, o);
  const std::string model_path = s.get<std::string>("model", "");
  const std::string tagger_path = s.get<std::string>("tagger", "");
  const bool unconstrained = s.get("unconstrained", false);
  const bool lift_only = s.get("lift_only", false);
  const bool ascii = s.get("ascii", false);
  const std::size_t max_len = s.get<std::size_t>("max_len", 64);
  s.finish();
  require_file(tagger_path, "tagger");
  if (!lift_only) require_file(model_path, "model");
  if (max_len < 2) throw UsageError("max_len must be >= 2");
  const TextStyle style = ascii ? TextStyle::kAscii : TextStyle::kUnicode;

  const Tagger tagger = Tagger::load(tagger_path);
  const std::vector<std::string> tokens = split_words(sentence);
  const std::vector<int> labels = tagger.predict(tokens);
  const LiftResult lr = lift(tokens, labels, tagger.max_label());
  std::cout << "labels: " << labels_text(labels) << "\nlifted_nl: " << lr.lifted_nl
            << "\nap_map: " << ap_map_text(lr.ap_map) << "\n";
  if (lift_only) return 0;

  const Checkpoint ckpt = load_checkpoint(model_path);
  const LtlGrammar grammar{TlVocab(ckpt.max_props)};
  Formula f = Formula::Prop(1);
  try {
    f = translate(ckpt.params, ckpt.vocab, lr.lifted_tokens, !unconstrained, max_len, grammar);
  } catch (const ModelError& e) {
    if (e.kind() != ModelErrorKind::kParseFailure) throw;
    std::cout << "lifted_tl: " << e.what() << "\n";
    return 2;
  }
  std::cout << "lifted_tl: " << render(f, style) << "\n";
  std::cout << "grounded_tl: " << unlift(f, lr.ap_map, style) << "\n";
  return 0;
}

int cmd_eval(const std::string& config, const Json& o) {
  Settings s(config, o);
  const std::string model_path = s.get<std::string>("model", "");
  const std::string tagger_path = s.get<std::string>("tagger", "");
  const auto corpora = s.get<std::vector<std::string>>("corpus", {});
  const std::string report_path = s.get<std::string>("report", "");
  const std::string csv_path = s.get<std::string>("csv", "");
  EvalOptions opts;
  opts.constrained = !s.get("unconstrained", false);
  opts.max_len = s.get("max_len", opts.max_len);
  opts.threads = s.get("threads", opts.threads);
  const std::size_t moment_batches = s.get<std::size_t>("moment_batches", 32);
  const std::uint64_t seed = s.get<std::uint64_t>("seed", 1);
  s.finish();
  require_file(model_path, "model");
  if (!tagger_path.empty()) require_file(tagger_path, "tagger");

  const auto t0 = std::chrono::steady_clock::now();
  const Checkpoint ckpt = load_checkpoint(model_path);
  const LtlGrammar grammar{TlVocab(ckpt.max_props)};
  const std::vector<LiftedExample> corpus = read_corpora(corpora);
  std::optional<Tagger> tagger;
  if (!tagger_path.empty()) tagger = Tagger::load(tagger_path);
  const std::vector<DomainMetrics> metrics =
      evaluate(ckpt.params, ckpt.vocab, tagger ? &*tagger : nullptr, corpus, opts, grammar);

  Json report;
  report["schema_version"] = kReportSchemaVersion;
  report["experiment"] = "eval";
  report["config"] = {{"model", model_path},   {"tagger", tagger_path},
                      {"corpus", corpora},     {"constrained", opts.constrained},
                      {"max_len", opts.max_len}, {"seed", seed},
                      {"model_seed", ckpt.seed}, {"model_mode", to_string(ckpt.mode)}};
  Json arr = Json::array();
  for (const auto& m : metrics) arr.push_back(to_json(m));
  report["metrics"] = std::move(arr);
  if (moment_batches > 0 && !corpus.empty()) {
    const std::vector<Example> data = encode_corpus(corpus, ckpt.vocab, grammar.vocab());
    const MomentEstimate m = gradient_moments(ckpt.params, data, moment_batches, 16, seed, grammar);
    report["grad_second_moment"] = {{"standard", m.standard}, {"grammar_forced", m.forced}, {"batches", m.batches}};
  }
  report["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string csv = metrics_csv(metrics);
  std::cout << csv;
  if (!report_path.empty()) {
    ensure_parent(report_path);
    write_text(report_path, report.dump(2) + "\n");
  }
  if (!csv_path.empty()) {
    ensure_parent(csv_path);
    write_text(csv_path, csv);
  }
  if (opts.constrained) {
    for (const auto& m : metrics) {
      if (m.validity_rate != 1.0) throw InternalError("constrained decoding produced an invalid formula");
    }
  }
  return 0;
}

void add_experiment_flags(CLI::App* app, Json& o) {
  add_train_flags(app, o);
  flag<std::vector<std::uint64_t>>(app, o, "--seeds", "seeds to run");
  flag<std::vector<std::size_t>>(app, o, "--counts", "examples generated per domain");
  flag<double>(app, o, "--test-fraction", "share of each corpus held out for testing");
  flag<int>(app, o, "--max-depth", "maximum formula depth");
  flag<int>(app, o, "--max-aps", "maximum distinct propositions per formula");
  flag<std::size_t>(app, o, "--tagger-epochs", "perceptron epochs");
  flag<unsigned>(app, o, "--threads", "evaluation threads (0 = all cores)");
  flag<std::string>(app, o, "--out-dir", "directory for reports and loss CSVs");
}

ExperimentConfig read_experiment(Settings& s, std::string& out_dir) {
  out_dir = s.get<std::string>("out_dir", "reports");
  Json rest = s.rest();
  if (rest.contains("lr")) {
    rest["learning_rate"] = rest["lr"];
    rest.erase("lr");
  }
  try {
    return experiment_config_from_json(rest);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_experiment_ood(const std::string& config, const Json& o) {
  Settings s(config, o);
  std::string out_dir;
  const ExperimentConfig cfg = read_experiment(s, out_dir);
  fs::create_directories(out_dir);
  const OodReport rep = run_ood(cfg, progress_line);
  write_text((fs::path(out_dir) / "ood_report.json").string(), to_json(rep).dump(2) + "\n");
  write_text((fs::path(out_dir) / "ood_grid.csv").string(), ood_csv(rep));
  write_text((fs::path(out_dir) / "ood_table.txt").string(), ood_table(rep));
  for (const auto& c : rep.cells) {
    write_loss_csv((fs::path(out_dir) / ("loss_ood_" + c.held_out + "_" + to_string(c.run.mode) +
                                         "_seed" + std::to_string(c.seed) + ".csv"))
                       .string(),
                   c.run.loss_curve);
  }
  std::cout << ood_table(rep);
  return 0;
}

int cmd_experiment_indomain(const std::string& config, const Json& o) {
  Settings s(config, o);
  std::string out_dir;
  const ExperimentConfig cfg = read_experiment(s, out_dir);
  fs::create_directories(out_dir);
  const InDomainReport rep = run_in_domain(cfg, progress_line);
  write_text((fs::path(out_dir) / "indomain_report.json").string(), to_json(rep).dump(2) + "\n");
  std::ostringstream table;
  table << "count,seed,mode,step0_loss,final_loss,lifted_accuracy,grounded_accuracy,lifting_accuracy\n";
  for (const auto& run : rep.runs) {
    for (const ModeRun* m : {&run.standard, &run.forced}) {
      const DomainMetrics& d = m->eval.front();
      table << run.count << ',' << run.seed << ',' << to_string(m->mode) << ','
            << m->loss_curve.front() << ',' << m->loss_curve.back() << ',' << d.lifted_accuracy << ','
            << d.grounded_accuracy.value_or(0.0) << ',' << d.lifting_accuracy.value_or(0.0) << '\n';
      write_loss_csv((fs::path(out_dir) / ("loss_" + cfg.domain + "_n" + std::to_string(run.count) + "_" +
                                           to_string(m->mode) + "_seed" + std::to_string(run.seed) + ".csv"))
                         .string(),
                     m->loss_curve);
    }
  }
  write_text((fs::path(out_dir) / "indomain_summary.csv").string(), table.str());
  std::cout << table.str();
  return 0;
}

int cmd_property_suite(const std::string& config, const Json& o) {
  Settings s(config, o);
  PropertySuiteConfig c;
  c.seed = s.get("seed", c.seed);
  c.decodes = s.get("decodes", c.decodes);
  c.triples = s.get("triples", c.triples);
  c.roundtrips = s.get("roundtrips", c.roundtrips);
  c.moment_draws = s.get("moment_draws", c.moment_draws);
  c.moment_batches = s.get("moment_batches", c.moment_batches);
  c.brute_max_len = s.get("brute_max_len", c.brute_max_len);
  c.brute_max_props = s.get("brute_max_props", c.brute_max_props);
  const std::string report_path = s.get<std::string>("report", "");
  s.finish();
  const std::vector<PropertyCheck> checks = run_property_suite(c, [](const std::string& line) {
    std::cout << line << std::endl;
  });
  const Json report = to_json(checks, c);
  if (!report_path.empty()) {
    ensure_parent(report_path);
    write_text(report_path, report.dump(2) + "\n");
  }
  return report["all_passed"].get<bool>() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tlforge: grammar-constrained natural language to LTL translation"};
  app.require_subcommand(1);
  std::string config;
  std::string sentence;
  Json o = Json::object();

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file; flags override its keys");
    return sub;
  };

  CLI::App* datagen = with_config(app.add_subcommand("datagen", "generate synthetic corpora"));
  flag<std::string>(datagen, o, "--out-dir", "output directory");
  flag<std::string>(datagen, o, "--domain", "single domain (default: all built-in domains)");
  flag<std::uint64_t>(datagen, o, "--seed", "RNG seed");
  flag<std::size_t>(datagen, o, "--count", "records per domain");
  flag<int>(datagen, o, "--max-depth", "maximum formula depth");
  flag<int>(datagen, o, "--max-aps", "maximum distinct propositions per formula");
  flag<double>(datagen, o, "--coref-prob", "chance a leaf reuses an earlier proposition");

  CLI::App* trn = with_config(app.add_subcommand("train", "train a model (and optionally a tagger)"));
  flag<std::vector<std::string>>(trn, o, "--corpus", "JSONL corpus files");
  flag<std::string>(trn, o, "--out", "checkpoint path");
  flag<std::string>(trn, o, "--loss-csv", "per-step loss CSV path");
  flag<std::string>(trn, o, "--tagger-out", "also train a tagger and save it here");
  flag<std::size_t>(trn, o, "--tagger-epochs", "perceptron epochs");
  flag<std::string>(trn, o, "--mode", "standard | grammar_forced");
  flag<int>(trn, o, "--max-props", "target vocabulary propositions");
  add_train_flags(trn, o);

  CLI::App* lft = with_config(app.add_subcommand("lift", "label and lift one sentence"));
  flag<std::string>(lft, o, "--tagger", "tagger checkpoint");
  lft->add_option("sentence", sentence, "natural-language sentence")->required();

  CLI::App* tr = with_config(app.add_subcommand("translate", "lift, translate and ground one sentence"));
  flag<std::string>(tr, o, "--model", "model checkpoint");
  flag<std::string>(tr, o, "--tagger", "tagger checkpoint");
  flag<std::size_t>(tr, o, "--max-len", "decode length limit");
  switch_flag(tr, o, "--unconstrained", "decode without the grammar mask");
  switch_flag(tr, o, "--lift-only", "stop after lifting");
  switch_flag(tr, o, "--ascii", "print formulas with ASCII operator names");
  tr->add_option("sentence", sentence, "natural-language sentence")->required();

  CLI::App* ev = with_config(app.add_subcommand("eval", "evaluate a checkpoint on corpora"));
  flag<std::string>(ev, o, "--model", "model checkpoint");
  flag<std::string>(ev, o, "--tagger", "tagger checkpoint (enables end-to-end metrics)");
  flag<std::vector<std::string>>(ev, o, "--corpus", "JSONL corpus files");
  flag<std::string>(ev, o, "--report", "JSON report path");
  flag<std::string>(ev, o, "--csv", "CSV metrics path");
  flag<std::size_t>(ev, o, "--max-len", "decode length limit");
  flag<unsigned>(ev, o, "--threads", "evaluation threads (0 = all cores)");
  flag<std::size_t>(ev, o, "--moment-batches", "batches for the gradient second-moment estimate");
  flag<std::uint64_t>(ev, o, "--seed", "seed for moment batches");
  switch_flag(ev, o, "--unconstrained", "decode without the grammar mask");

  CLI::App* ood = with_config(app.add_subcommand("experiment-ood", "train on two domains, test on all three"));
  add_experiment_flags(ood, o);
  flag<std::vector<std::string>>(ood, o, "--held-out", "held-out domains to run");

  CLI::App* ind = with_config(app.add_subcommand("experiment-indomain", "in-domain runs over seeds and data sizes"));
  add_experiment_flags(ind, o);
  flag<std::string>(ind, o, "--domain", "domain to generate");

  CLI::App* props = with_config(app.add_subcommand("property-suite", "run the built-in property checks"));
  flag<std::uint64_t>(props, o, "--seed", "RNG seed");
  flag<std::size_t>(props, o, "--decodes", "random decodes for the validity check");
  flag<std::size_t>(props, o, "--triples", "random (z, V_t, y) triples");
  flag<std::size_t>(props, o, "--roundtrips", "lift/unlift round trips");
  flag<std::size_t>(props, o, "--brute-max-len", "longest sequence enumerated");
  flag<int>(props, o, "--brute-max-props", "propositions in the enumerated vocabulary");
  flag<std::string>(props, o, "--report", "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*datagen) return cmd_datagen(config, o);
    if (*trn) return cmd_train(config, o);
    if (*lft) return cmd_lift(config, o, sentence);
    if (*tr) return cmd_translate(config, o, sentence);
    if (*ev) return cmd_eval(config, o);
    if (*ood) return cmd_experiment_ood(config, o);
    if (*ind) return cmd_experiment_indomain(config, o);
    if (*props) return cmd_property_suite(config, o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const LiftError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const LossError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const TaggerError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
