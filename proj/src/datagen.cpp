/*!
 * \file datagen.cpp
 */
#include "tlforge/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace tlforge {
namespace {

Words W(std::string_view text) { return split_words(text); }

std::vector<std::string> cross(std::initializer_list<const char*> heads,
                               std::initializer_list<const char*> nouns) {
  std::vector<std::string> out;
  for (const char* h : heads) {
    for (const char* n : nouns) out.push_back(std::string(h) + " " + n);
  }
  return out;
}

// Operator phrasings shared by every domain; each domain adds its own.
void add_shared(DomainLexicon& d) {
  d.negation.push_back(W("do not"));
  d.next.push_back(W("next"));
  d.eventually.push_back(W("eventually"));
  d.always.push_back(W("always"));
  d.conjunction.push_back({W("both"), W("and")});
  d.disjunction.push_back({W("either"), W("or")});
  d.implication.push_back({W("if"), W("then")});
  d.until.push_back({W("keep on"), W("until")});
}

DomainLexicon make_grid() {
  DomainLexicon d;
  d.name = "grid";
  d.ap_phrases = cross({"red", "blue", "green", "yellow", "purple", "orange", "white", "black"},
                       {"room", "door", "hallway", "corridor", "zone"});
  d.visit = {{W("go to the"), {}}, {W("visit the"), {}}, {W("enter the"), {}}};
  d.revisit = {{W("return to the"), {}}, {W("go back to the"), {}}, {W("visit the"), W("again")}};
  add_shared(d);
  d.negation.push_back(W("you must not"));
  d.next.push_back(W("in the next step"));
  d.eventually.push_back(W("at some point"));
  d.always.push_back(W("at all times"));
  d.conjunction.push_back({W("first"), W("and also")});
  d.disjunction.push_back({W("either"), W("or else")});
  d.implication.push_back({W("whenever"), W("then")});
  d.until.push_back({W("continue to"), W("until")});
  return d;
}

DomainLexicon make_blocks() {
  DomainLexicon d;
  d.name = "blocks";
  d.ap_phrases = cross({"wooden", "metal", "small", "large", "striped", "plastic"},
                       {"block", "cube", "pyramid", "crate", "cylinder", "tower"});
  d.visit = {{W("pick up the"), {}}, {W("grab the"), {}}, {W("touch the"), {}}};
  d.revisit = {{W("pick up the"), W("again")}, {W("grab the"), W("once more")}};
  add_shared(d);
  d.negation.push_back(W("never try to"));
  d.next.push_back(W("immediately"));
  d.eventually.push_back(W("sooner or later"));
  d.always.push_back(W("constantly"));
  d.conjunction.push_back({W("do both"), W("as well as")});
  d.disjunction.push_back({W("choose to either"), W("or")});
  d.implication.push_back({W("if"), W("then you must")});
  d.until.push_back({W("keep on"), W("up until")});
  return d;
}

DomainLexicon make_robot() {
  DomainLexicon d;
  d.name = "robot";
  d.ap_phrases = {"kitchen",        "lobby",          "elevator",        "staircase",
                  "front desk",     "coffee machine", "water fountain",  "vending machine",
                  "reception",      "library",        "cafeteria",       "parking lot",
                  "loading dock",   "server rack",    "charging station", "main entrance",
                  "back exit",      "storage closet", "break area",      "copy machine",
                  "supply cabinet", "bike rack",      "fire exit",       "security booth",
                  "gift shop",      "north wing",     "south wing",      "east wing",
                  "west wing",      "courtyard",      "bus stop",        "garden bench"};
  d.visit = {{W("navigate to the"), {}}, {W("reach the"), {}}, {W("head to the"), {}}};
  d.revisit = {{W("come back to the"), {}}, {W("return to the"), {}}};
  add_shared(d);
  d.negation.push_back(W("make sure not to"));
  d.next.push_back(W("right after that"));
  d.eventually.push_back(W("finally"));
  d.always.push_back(W("continuously"));
  d.conjunction.push_back({W("both"), W("and also")});
  d.disjunction.push_back({W("either"), W("or instead")});
  d.implication.push_back({W("in case you"), W("then")});
  d.until.push_back({W("persist to"), W("until")});
  return d;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, v.size() - 1);
  return v[dist(rng)];
}

struct SamplerState {
  int used = 0;
  int max_aps;
  double coref_prob;
};

Formula sample_node(std::mt19937_64& rng, int depth, int max_depth, SamplerState& st) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const bool recurse = depth < max_depth && coin(rng) < std::pow(0.6, depth);
  if (!recurse) {
    int id;
    const bool reuse = st.used > 0 && (st.used >= st.max_aps || coin(rng) < st.coref_prob);
    if (reuse) {
      id = std::uniform_int_distribution<int>(1, st.used)(rng);
    } else {
      id = ++st.used;
    }
    return Formula::Prop(id);
  }
  static constexpr Op kOps[] = {Op::kNot, Op::kNext, Op::kEventually, Op::kAlways,
                                Op::kAnd, Op::kOr,   Op::kImplies,    Op::kUntil};
  const Op op = kOps[std::uniform_int_distribution<int>(0, 7)(rng)];
  if (is_unary(op)) return Formula::Unary(op, sample_node(rng, depth + 1, max_depth, st));
  Formula lhs = sample_node(rng, depth + 1, max_depth, st);
  Formula rhs = sample_node(rng, depth + 1, max_depth, st);
  return Formula::Binary(op, std::move(lhs), std::move(rhs));
}

struct Realizer {
  const DomainLexicon& lex;
  std::mt19937_64& rng;
  const std::vector<std::string>& phrases;  // phrase of id i at index i - 1
  std::vector<std::string> tokens;
  std::vector<int> labels;
  std::set<int> mentioned;

  void words(const Words& ws) {
    for (const auto& w : ws) {
      tokens.push_back(w);
      labels.push_back(0);
    }
  }

  void run(const Formula& f) {
    switch (f.op()) {
      case Op::kProp: {
        const int id = f.prop();
        const bool again = mentioned.contains(id);
        const VerbTemplate& v = pick(again ? lex.revisit : lex.visit, rng);
        words(v.before);
        for (const auto& w : split_words(phrases[static_cast<std::size_t>(id - 1)])) {
          tokens.push_back(w);
          labels.push_back(id);
        }
        words(v.after);
        mentioned.insert(id);
        return;
      }
      case Op::kNot: words(pick(lex.negation, rng)); run(f.child()); return;
      case Op::kNext: words(pick(lex.next, rng)); run(f.child()); return;
      case Op::kEventually: words(pick(lex.eventually, rng)); run(f.child()); return;
      case Op::kAlways: words(pick(lex.always, rng)); run(f.child()); return;
      default: break;
    }
    const std::vector<BinaryTemplate>* forms = nullptr;
    switch (f.op()) {
      case Op::kAnd: forms = &lex.conjunction; break;
      case Op::kOr: forms = &lex.disjunction; break;
      case Op::kImplies: forms = &lex.implication; break;
      default: forms = &lex.until; break;
    }
    const BinaryTemplate& b = pick(*forms, rng);
    words(b.prefix);
    run(f.lhs());
    words(b.infix);
    run(f.rhs());
  }
};

Formula shift_props(const Formula& f, int offset) {
  if (f.is_prop()) return Formula::Prop(f.prop() + offset);
  if (is_unary(f.op())) return Formula::Unary(f.op(), shift_props(f.child(), offset));
  return Formula::Binary(f.op(), shift_props(f.lhs(), offset), shift_props(f.rhs(), offset));
}

void finish_example(LiftedExample& ex) {
  LiftResult lr = lift(ex.tokens, ex.labels);
  ex.lifted_nl = std::move(lr.lifted_nl);
  ex.ap_map = std::move(lr.ap_map);
  ex.grounded_tl = unlift(ex.lifted_tl, ex.ap_map, TextStyle::kAscii);
}

}  // namespace

const DomainLexicon& builtin_lexicon(std::string_view name) {
  static const DomainLexicon grid = make_grid();
  static const DomainLexicon blocks = make_blocks();
  static const DomainLexicon robot = make_robot();
  if (name == "grid") return grid;
  if (name == "blocks") return blocks;
  if (name == "robot") return robot;
  throw DatagenError("unknown domain '" + std::string(name) + "'");
}

const std::vector<std::string>& builtin_domain_names() {
  static const std::vector<std::string> names = {"blocks", "grid", "robot"};
  return names;
}

Formula sample_formula(std::mt19937_64& rng, int max_depth, int max_aps, double coref_prob) {
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (max_aps < 1) throw std::invalid_argument("max_aps must be >= 1");
  SamplerState st{0, max_aps, coref_prob};
  return sample_node(rng, 1, max_depth, st);
}

LiftedExample render_example(const Formula& f, const DomainLexicon& lex, std::mt19937_64& rng) {
  const std::vector<int> order = f.props_in_order();
  const int num_props = order.empty() ? 0 : *std::max_element(order.begin(), order.end());
  if (static_cast<std::size_t>(num_props) > lex.ap_phrases.size()) {
    throw DatagenError("TooManyProps: formula uses " + std::to_string(num_props) +
                       " propositions but domain '" + lex.name + "' has " +
                       std::to_string(lex.ap_phrases.size()) + " AP phrases");
  }
  // Ids must already be in first-appearance order for the labels to be canonical.
  std::vector<int> canon = canonicalize_labels(order);
  if (canon != order) throw std::invalid_argument("formula props are not in first-appearance order");

  std::vector<std::string> phrases = lex.ap_phrases;
  for (int i = 0; i < num_props; ++i) {
    std::uniform_int_distribution<std::size_t> dist(static_cast<std::size_t>(i), phrases.size() - 1);
    std::swap(phrases[static_cast<std::size_t>(i)], phrases[dist(rng)]);
  }
  phrases.resize(static_cast<std::size_t>(num_props));

  Realizer r{lex, rng, phrases, {}, {}, {}};
  r.run(f);
  r.words(W("."));
  r.tokens.front()[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(r.tokens.front()[0])));

  LiftedExample ex;
  ex.tokens = std::move(r.tokens);
  ex.labels = std::move(r.labels);
  ex.lifted_tl = f;
  ex.domain = lex.name;
  finish_example(ex);
  return ex;
}

LiftedExample concat_examples(const LiftedExample& a, const LiftedExample& b, std::mt19937_64& rng) {
  for (const auto& [ia, pa] : a.ap_map) {
    for (const auto& [ib, pb] : b.ap_map) {
      if (canonical_ap_name(pa) == canonical_ap_name(pb)) {
        throw DatagenError("SharedAP: '" + pa + "' occurs in both examples");
      }
    }
  }
  const int offset = static_cast<int>(a.ap_map.size());
  const bool use_until = std::uniform_int_distribution<int>(0, 1)(rng) == 1;

  LiftedExample ex;
  std::size_t keep = a.tokens.size();
  if (keep > 0 && a.tokens.back() == ".") --keep;
  ex.tokens.assign(a.tokens.begin(), a.tokens.begin() + static_cast<std::ptrdiff_t>(keep));
  ex.labels.assign(a.labels.begin(), a.labels.begin() + static_cast<std::ptrdiff_t>(keep));
  for (const auto& w : W(use_until ? "until" : "and then")) {
    ex.tokens.push_back(w);
    ex.labels.push_back(0);
  }
  for (std::size_t i = 0; i < b.tokens.size(); ++i) {
    std::string w = b.tokens[i];
    if (i == 0 && b.labels[i] == 0) {
      for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    ex.tokens.push_back(std::move(w));
    ex.labels.push_back(b.labels[i] == 0 ? 0 : b.labels[i] + offset);
  }
  ex.lifted_tl = Formula::Binary(use_until ? Op::kUntil : Op::kAnd, a.lifted_tl,
                                 shift_props(b.lifted_tl, offset));
  ex.domain = a.domain == b.domain ? a.domain : a.domain + "+" + b.domain;
  finish_example(ex);
  return ex;
}

std::vector<LiftedExample> gen_corpus(const GenConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("count must be >= 1");
  if (cfg.max_aps < 1 || cfg.max_aps > 15) throw std::invalid_argument("max_aps must be in 1..15");
  const DomainLexicon& lex = builtin_lexicon(cfg.domain);
  std::mt19937_64 rng(cfg.seed);
  std::vector<LiftedExample> out;
  out.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    Formula f = sample_formula(rng, cfg.max_depth, cfg.max_aps, cfg.coref_prob);
    out.push_back(render_example(f, lex, rng));
  }
  return out;
}

CorpusStats corpus_stats(std::span<const LiftedExample> corpus) {
  std::set<std::string> nl, tl, vocab;
  for (const auto& ex : corpus) {
    nl.insert(ex.nl());
    tl.insert(render(ex.lifted_tl, TextStyle::kAscii));
    for (const auto& w : ex.tokens) vocab.insert(w);
  }
  return {corpus.size(), nl.size(), tl.size(), vocab.size()};
}

}  // namespace tlforge
