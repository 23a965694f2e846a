/*!
 * \file properties.cpp
 * \brief Self-checks run by the property-suite command.
 */
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "tlforge/corpus_io.hpp"
#include "tlforge/harness.hpp"
#include "tlforge/loss.hpp"

namespace tlforge {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Triple {
  std::vector<double> z;
  TokenId y;
  TokenSet valid;
};

Triple random_triple(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_int_distribution<int> tok(0, n - 1);
  std::bernoulli_distribution coin(0.5);
  Triple t;
  t.z.resize(static_cast<std::size_t>(n));
  for (double& v : t.z) v = normal(rng);
  t.y = tok(rng);
  t.valid.insert(t.y);
  for (int k = 0; k < n; ++k) {
    if (coin(rng)) t.valid.insert(k);
  }
  return t;
}

std::vector<double> premasked(const Triple& t) {
  std::vector<double> z = t.z;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (!t.valid.contains(static_cast<TokenId>(k))) z[k] = kNegInf;
  }
  return z;
}

// max |a - b| / max(max |a|, max |b|)
double rel_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return scale == 0.0 ? diff : diff / scale;
}

PropertyCheck check_validity(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"constrained-decode-validity", false, false, "", 0.0};
  const TlVocab tv(kDefaultMaxProps);
  const LtlGrammar g(tv);
  const ModelDims dims{50, static_cast<std::size_t>(tv.size()), 32, 64};
  const ModelParams params = init_model(dims, cfg.seed);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> word(0, 49), len(1, 20);
  std::uniform_int_distribution<std::size_t> budget(2, 64);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < cfg.decodes; ++i) {
    std::vector<int> src(static_cast<std::size_t>(len(rng)));
    for (int& w : src) w = word(rng);
    const std::size_t max_len = i % 2 == 0 ? 64 : budget(rng);
    const std::vector<TokenId> out = greedy_decode(params, src, max_len, true, g);
    if (out.size() <= max_len && g.accepts(out) && parse_decoded(out, tv).ok()) ++ok;
  }
  c.passed = ok == cfg.decodes;
  c.detail = std::to_string(ok) + "/" + std::to_string(cfg.decodes) + " decodes parse and accept";
  return c;
}

PropertyCheck check_unconstrained_failures(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"unconstrained-parse-failures", false, true, "", 0.0};
  const TlVocab tv(kDefaultMaxProps);
  const LtlGrammar g(tv);
  const ModelDims dims{50, static_cast<std::size_t>(tv.size()), 32, 64};
  const ModelParams params = init_model(dims, cfg.seed);
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_int_distribution<int> word(0, 49), len(1, 20);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < cfg.decodes; ++i) {
    std::vector<int> src(static_cast<std::size_t>(len(rng)));
    for (int& w : src) w = word(rng);
    if (!parse_decoded(greedy_decode(params, src, 64, false, g), tv).ok()) ++failures;
  }
  c.passed = failures > 0;
  c.detail = std::to_string(failures) + "/" + std::to_string(cfg.decodes) +
             " unconstrained decodes of an untrained model fail to parse";
  return c;
}

PropertyCheck check_lower_ce(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"forced-ce-lower-or-equal", false, false, "", 0.0};
  std::mt19937_64 rng(cfg.seed);
  std::size_t violations = 0, eq_violations = 0;
  for (std::size_t i = 0; i < cfg.triples; ++i) {
    const Triple t = random_triple(rng, 16);
    if (forced_cross_entropy(t.z, t.y, t.valid) > cross_entropy(t.z, t.y)) ++violations;
    const std::vector<double> zm = premasked(t);
    if (forced_cross_entropy(zm, t.y, t.valid) != cross_entropy(zm, t.y)) ++eq_violations;
  }
  c.passed = violations == 0 && eq_violations == 0;
  c.detail = std::to_string(violations) + " inequality violations, " + std::to_string(eq_violations) +
             " equality failures on pre-masked rows, over " + std::to_string(cfg.triples) + " triples";
  return c;
}

PropertyCheck check_zero_gradient(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"forced-grad-zero-outside-valid", false, false, "", 0.0};
  std::mt19937_64 rng(cfg.seed + 2);
  std::size_t nonzero = 0, mismatch = 0;
  for (std::size_t i = 0; i < cfg.triples; ++i) {
    const Triple t = random_triple(rng, 16);
    const std::vector<double> gf = grad_forced_ce(t.z, t.y, t.valid);
    const std::vector<double> gm = grad_ce(premasked(t), t.y);
    for (std::size_t k = 0; k < gf.size(); ++k) {
      if (!t.valid.contains(static_cast<TokenId>(k))) {
        if (gf[k] != 0.0) ++nonzero;
      } else if (std::abs(gf[k] - gm[k]) > 1e-15) {
        ++mismatch;
      }
    }
  }
  c.passed = nonzero == 0 && mismatch == 0;
  c.detail = std::to_string(nonzero) + " nonzero entries outside V_t, " + std::to_string(mismatch) +
             " entries inside V_t differing from the masked-row gradient";
  return c;
}

PropertyCheck check_coordinate_bound(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"coordinate-wise-gradient-bound", true, true, "", 0.0};
  std::mt19937_64 rng(cfg.seed + 3);
  std::size_t triples_violating = 0, coords = 0;
  for (std::size_t i = 0; i < cfg.triples; ++i) {
    const Triple t = random_triple(rng, 16);
    const std::vector<double> gf = grad_forced_ce(t.z, t.y, t.valid);
    const std::vector<double> gs = grad_ce(t.z, t.y);
    std::size_t bad = 0;
    for (std::size_t k = 0; k < gf.size(); ++k) bad += std::abs(gf[k]) > std::abs(gs[k]);
    coords += bad;
    triples_violating += bad > 0;
  }
  c.detail = std::to_string(triples_violating) + "/" + std::to_string(cfg.triples) +
             " triples have some |forced grad_k| > |standard grad_k| (" + std::to_string(coords) +
             " coordinates); the squared-norm bound is checked separately";
  return c;
}

PropertyCheck check_loss_fd(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"loss-gradient-finite-differences", false, false, "", 0.0};
  std::mt19937_64 rng(cfg.seed + 4);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Triple t = random_triple(rng, 16);
    std::vector<double> fd_s(16), fd_f(16, 0.0);
    std::vector<double> z = t.z;
    for (std::size_t k = 0; k < 16; ++k) {
      const double z0 = z[k];
      z[k] = z0 + h;
      const double sp = cross_entropy(z, t.y), fp = forced_cross_entropy(z, t.y, t.valid);
      z[k] = z0 - h;
      const double sm = cross_entropy(z, t.y), fm = forced_cross_entropy(z, t.y, t.valid);
      z[k] = z0;
      fd_s[k] = (sp - sm) / (2 * h);
      fd_f[k] = (fp - fm) / (2 * h);
    }
    worst = std::max({worst, rel_error(grad_ce(t.z, t.y), fd_s),
                      rel_error(grad_forced_ce(t.z, t.y, t.valid), fd_f)});
  }
  c.passed = worst <= 1e-8;
  std::ostringstream os;
  os << "max relative error " << worst << " (tolerance 1e-8)";
  c.detail = os.str();
  return c;
}

PropertyCheck check_model_fd(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"model-gradient-finite-differences", false, false, "", 0.0};
  const TlVocab tv(kDefaultMaxProps);
  const LtlGrammar g(tv);
  const ModelDims dims{7, static_cast<std::size_t>(tv.size()), 4, 6};
  ModelParams params = init_model(dims, cfg.seed);
  const std::vector<Example> batch{
      {{1, 2, 3}, to_tokens(parse_formula("F ( prop_1 AND X prop_2 )", tv), tv)},
      {{4, 5, 6, 2}, to_tokens(parse_formula("( prop_1 UNTIL NOT prop_1 )", tv), tv)}};
  std::vector<Example> data = batch;
  for (auto& e : data) e.tgt.push_back(kEosId);
  const double h = 1e-5;
  double worst = 0.0;
  for (LossMode mode : {LossMode::kStandard, LossMode::kGrammarForced}) {
    const GradientBundle analytic = backward(params, data, mode, g).grad;
    std::vector<double> numeric(analytic.size());
    auto values = params.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double v0 = values[i];
      values[i] = v0 + h;
      const double lp = batch_loss(params, data, mode, g);
      values[i] = v0 - h;
      const double lm = batch_loss(params, data, mode, g);
      values[i] = v0;
      numeric[i] = (lp - lm) / (2 * h);
    }
    worst = std::max(worst, rel_error(analytic, numeric));
  }
  c.passed = worst <= 1e-6;
  std::ostringstream os;
  os << "max relative error " << worst << " over " << params.size()
     << " parameters, both modes (tolerance 1e-6)";
  c.detail = os.str();
  return c;
}

PropertyCheck check_moments(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"gradient-second-moment", false, false, "", 0.0};
  const TlVocab tv(kDefaultMaxProps);
  const LtlGrammar g(tv);
  GenConfig gc;
  gc.seed = cfg.seed;
  gc.count = 200;
  const std::vector<LiftedExample> corpus = gen_corpus(gc);
  const SourceVocab vocab = build_source_vocab(corpus, kDefaultMaxProps);
  const std::vector<Example> data = encode_corpus(corpus, vocab, tv);
  const ModelDims dims{vocab.size(), static_cast<std::size_t>(tv.size()), 32, 64};
  std::size_t wins = 0;
  std::ostringstream os;
  for (std::size_t d = 0; d < cfg.moment_draws; ++d) {
    const ModelParams params = init_model(dims, cfg.seed + 100 + d);
    const MomentEstimate m = gradient_moments(params, data, cfg.moment_batches, 16, cfg.seed + d, g);
    wins += m.forced <= m.standard;
    os << (d ? "; " : "") << "draw " << d << ": forced " << m.forced << " vs standard " << m.standard;
  }
  c.passed = wins == cfg.moment_draws;
  c.detail = os.str();
  return c;
}

PropertyCheck check_roundtrip(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"lift-unlift-round-trip", false, false, "", 0.0};
  std::mt19937_64 rng(cfg.seed);
  std::size_t ok = 0, total = 0, coref = 0, wide = 0;
  auto test = [&](const LiftedExample& ex) {
    ++total;
    const LiftResult lr = lift(ex.tokens, ex.labels);
    const bool good = unlift(ex.lifted_tl, lr.ap_map, TextStyle::kAscii) == ex.grounded_tl &&
                      check_record(ex).empty();
    ok += good;
    std::set<int> ids(ex.labels.begin(), ex.labels.end());
    ids.erase(0);
    std::size_t spans = 0;
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
      spans += ex.labels[i] != 0 && (i == 0 || ex.labels[i - 1] != ex.labels[i]);
    }
    coref += spans > ids.size();
    wide += ids.size() >= 6;
  };
  const auto& names = builtin_domain_names();
  const std::size_t plain = cfg.roundtrips / 2;
  for (std::size_t i = 0; i < plain; ++i) {
    const DomainLexicon& lex = builtin_lexicon(names[i % names.size()]);
    test(render_example(sample_formula(rng, 4, 5, 0.3), lex, rng));
  }
  std::uniform_int_distribution<int> target(6, 15);
  while (total < cfg.roundtrips) {
    const DomainLexicon& lex = builtin_lexicon(names[total % names.size()]);
    const int want = target(rng);
    LiftedExample acc = render_example(sample_formula(rng, 3, 5, 0.3), lex, rng);
    int guard = 0;
    while (static_cast<int>(acc.ap_map.size()) < want && guard++ < 200) {
      const int room = std::min(5, want - static_cast<int>(acc.ap_map.size()));
      LiftedExample next = render_example(sample_formula(rng, 3, room, 0.3), lex, rng);
      try {
        acc = concat_examples(acc, next, rng);
      } catch (const DatagenError&) {
      }
    }
    test(acc);
  }
  c.passed = ok == total;
  c.detail = std::to_string(ok) + "/" + std::to_string(total) + " round trips exact (" +
             std::to_string(coref) + " with co-reference, " + std::to_string(wide) + " with 6-15 APs)";
  return c;
}

PropertyCheck check_bruteforce(const PropertySuiteConfig& cfg) {
  PropertyCheck c{"grammar-parser-equivalence", false, false, "", 0.0};
  const TlVocab tv(cfg.brute_max_props);
  const LtlGrammar g(tv);
  const int v = tv.size();
  std::size_t checked = 0, disagree = 0, accepted = 0;
  std::vector<TokenId> seq;
  for (std::size_t len = 0; len <= cfg.brute_max_len; ++len) {
    seq.assign(len, 0);
    while (true) {
      const bool engine = g.accepts(seq);
      const bool parser = parse_decoded(seq, tv).ok();
      disagree += engine != parser;
      accepted += engine;
      ++checked;
      std::size_t k = 0;
      while (k < len && ++seq[k] == v) seq[k++] = 0;
      if (k == len) break;
    }
  }
  c.passed = disagree == 0;
  c.detail = std::to_string(checked) + " sequences up to length " + std::to_string(cfg.brute_max_len) +
             " over " + std::to_string(v) + " tokens, " + std::to_string(accepted) + " accepted, " +
             std::to_string(disagree) + " disagreements";
  return c;
}

PropertyCheck check_valid_set_bounds() {
  PropertyCheck c{"valid-set-bounds", false, false, "", 0.0};
  const TlVocab tv(kDefaultMaxProps);
  const LtlGrammar g(tv);
  int lo = 1 << 30, hi = 0;
  std::size_t states = 0;
  // Depth-first over reachable states of up to 7 consumed tokens.
  std::vector<GrammarState> stack{g.init_state()};
  while (!stack.empty()) {
    GrammarState s = std::move(stack.back());
    stack.pop_back();
    if (s.terminal()) continue;
    ++states;
    const TokenSet valid = g.valid_tokens(s);
    lo = std::min(lo, valid.size());
    hi = std::max(hi, valid.size());
    if (s.consumed() >= 7) continue;
    for (TokenId t : valid.ids()) stack.push_back(g.update(s, t));
  }
  c.passed = lo >= 1 && hi == 10;
  c.detail = std::to_string(states) + " reachable states, |valid| in [" + std::to_string(lo) + ", " +
             std::to_string(hi) + "] with max_props 5";
  return c;
}

}  // namespace

std::vector<PropertyCheck> run_property_suite(const PropertySuiteConfig& cfg, const ProgressFn& progress) {
  using Fn = PropertyCheck (*)(const PropertySuiteConfig&);
  const std::vector<Fn> checks{
      check_validity,      check_unconstrained_failures, check_lower_ce,  check_zero_gradient,
      check_coordinate_bound, check_loss_fd,             check_model_fd,  check_moments,
      check_roundtrip,     check_bruteforce,
      [](const PropertySuiteConfig&) { return check_valid_set_bounds(); },
  };
  std::vector<PropertyCheck> out;
  for (Fn fn : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    PropertyCheck r = fn(cfg);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress((r.informational ? "INFO " : r.passed ? "PASS " : "FAIL ") + r.name + ": " + r.detail);
    out.push_back(std::move(r));
  }
  return out;
}

Json to_json(std::span<const PropertyCheck> checks, const PropertySuiteConfig& cfg) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = "property_suite";
  j["config"] = {{"seed", cfg.seed},
                 {"decodes", cfg.decodes},
                 {"triples", cfg.triples},
                 {"roundtrips", cfg.roundtrips},
                 {"moment_draws", cfg.moment_draws},
                 {"moment_batches", cfg.moment_batches},
                 {"brute_max_len", cfg.brute_max_len},
                 {"brute_max_props", cfg.brute_max_props}};
  Json arr = Json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"informational", c.informational},
                   {"detail", c.detail},
                   {"seconds", c.seconds}});
    all = all && (c.passed || c.informational);
  }
  j["checks"] = std::move(arr);
  j["all_passed"] = all;
  return j;
}

}  // namespace tlforge
