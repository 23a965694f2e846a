/*!
 * \file tagger.cpp
 */
#include "tlforge/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace tlforge {
namespace {

enum Relation : int { kZero = 0, kContinue = 1, kNew = 2, kCoref = 3 };

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/*! Labeling history seen so far in one sentence. */
class History {
 public:
  explicit History(std::size_t n) : lowered_(n) {}

  void set_word(std::size_t i, std::string w) { lowered_[i] = std::move(w); }

  int prev_label() const { return prev_label_; }
  int num_ids() const { return static_cast<int>(first_mention_.size()); }

  void push(std::size_t i, int label) {
    if (label != 0) {
      if (label > num_ids()) {
        first_mention_.emplace_back();
        last_pos_.push_back(i);
      }
      const std::size_t k = static_cast<std::size_t>(label - 1);
      // Only the first mention of an id defines its surface words.
      if (first_mention_open_ == label || first_mention_[k].empty()) {
        first_mention_[k].push_back(lowered_[i]);
        first_mention_open_ = label;
      }
      last_pos_[k] = i;
    }
    if (label != first_mention_open_) first_mention_open_ = 0;
    prev_label_ = label;
  }

  bool in_mention(int id, const std::string& w) const {
    const auto& m = first_mention_[static_cast<std::size_t>(id - 1)];
    return std::find(m.begin(), m.end(), w) != m.end();
  }
  bool starts_mention(int id, const std::string& w) const {
    const auto& m = first_mention_[static_cast<std::size_t>(id - 1)];
    return !m.empty() && m.front() == w;
  }
  bool seen_in_any(const std::string& w) const {
    for (int id = 1; id <= num_ids(); ++id) {
      if (in_mention(id, w)) return true;
    }
    return false;
  }
  std::size_t last_pos(int id) const { return last_pos_[static_cast<std::size_t>(id - 1)]; }

 private:
  std::vector<std::string> lowered_;
  std::vector<std::vector<std::string>> first_mention_;
  std::vector<std::size_t> last_pos_;
  int prev_label_ = 0;
  int first_mention_open_ = 0;
};

struct Candidate {
  int label;
  Relation rel;
  std::vector<std::string> extra;
};

std::string word_at(std::span<const std::string> lowered, std::ptrdiff_t i) {
  if (i < 0) return "<s>";
  if (static_cast<std::size_t>(i) >= lowered.size()) return "</s>";
  return lowered[static_cast<std::size_t>(i)];
}

std::vector<std::string> base_features(std::span<const std::string> tokens,
                                       std::span<const std::string> lowered, std::size_t i,
                                       const History& h) {
  const auto at = [&](std::ptrdiff_t d) {
    return word_at(lowered, static_cast<std::ptrdiff_t>(i) + d);
  };
  const std::string& raw = tokens[i];
  const std::string w0 = at(0);
  std::vector<std::string> f;
  f.reserve(14);
  f.push_back("bias");
  f.push_back("W0=" + raw);
  f.push_back("w0=" + w0);
  f.push_back("w-1=" + at(-1));
  f.push_back("w+1=" + at(1));
  f.push_back("w-2=" + at(-2));
  f.push_back("w+2=" + at(2));
  f.push_back("w-1,w0=" + at(-1) + "|" + w0);
  f.push_back("w0,w+1=" + w0 + "|" + at(1));
  f.push_back("suf3=" + (w0.size() > 3 ? w0.substr(w0.size() - 3) : w0));
  f.push_back(std::string("cap=") + (!raw.empty() && std::isupper(static_cast<unsigned char>(raw[0])) ? "1" : "0"));
  f.push_back(std::string("prev=") + (h.prev_label() == 0 ? "0" : "ap"));
  f.push_back(std::string("prev,w0=") + (h.prev_label() == 0 ? "0|" : "ap|") + w0);
  f.push_back(std::string("seen=") + (h.seen_in_any(w0) ? "1" : "0"));
  return f;
}

std::string recency_bucket(std::size_t i, std::size_t last, std::size_t n) {
  const double frac = static_cast<double>(i - last) / static_cast<double>(std::max<std::size_t>(n, 1));
  if (frac < 0.1) return "0";
  if (frac < 0.25) return "1";
  if (frac < 0.5) return "2";
  return "3";
}

std::vector<Candidate> candidates(std::span<const std::string> lowered, std::size_t i,
                                  const History& h, int max_label) {
  const std::string& w0 = lowered[i];
  std::vector<Candidate> out;
  out.push_back({0, kZero, {}});
  const int prev = h.prev_label();
  if (prev != 0) {
    out.push_back({prev, kContinue, {std::string("cin=") + (h.in_mention(prev, w0) ? "1" : "0")}});
  }
  if (h.num_ids() < max_label) out.push_back({h.num_ids() + 1, kNew, {}});
  for (int id = 1; id <= h.num_ids(); ++id) {
    if (id == prev) continue;
    out.push_back({id,
                   kCoref,
                   {std::string("cstart=") + (h.starts_mention(id, w0) ? "1" : "0"),
                    std::string("cin=") + (h.in_mention(id, w0) ? "1" : "0"),
                    "crec=" + recency_bucket(i, h.last_pos(id), lowered.size())}});
  }
  return out;
}

std::vector<std::string> lowered_tokens(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lower(t));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Tagger::Tagger(int max_label) : max_label_(max_label) {
  if (max_label < 1 || max_label > kMaxSupportedProps) {
    throw std::invalid_argument("tagger max_label out of range");
  }
}

std::vector<int> Tagger::predict(std::span<const std::string> tokens) const {
  const std::vector<std::string> low = lowered_tokens(tokens);
  History h(tokens.size());
  for (std::size_t i = 0; i < low.size(); ++i) h.set_word(i, low[i]);
  std::vector<int> labels;
  labels.reserve(tokens.size());

  auto score = [&](const std::vector<std::string>& feats, int rel) {
    double s = 0.0;
    for (const auto& f : feats) {
      auto it = weights_.find(f);
      if (it != weights_.end()) s += it->second[static_cast<std::size_t>(rel)];
    }
    return s;
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::vector<std::string> base = base_features(tokens, low, i, h);
    double base_scores[kNumRelations];
    for (int r = 0; r < kNumRelations; ++r) base_scores[r] = score(base, r);
    int best_label = 0;
    double best = 0.0;
    bool first = true;
    for (const Candidate& c : candidates(low, i, h, max_label_)) {
      const double s = base_scores[c.rel] + score(c.extra, c.rel);
      // Candidates come ordered with 0 first, so ties keep label 0.
      if (first || s > best) {
        best = s;
        best_label = c.label;
        first = false;
      }
    }
    labels.push_back(best_label);
    h.push(i, best_label);
  }
  return canonicalize_labels(labels);
}

std::vector<int> predict_labels(const Tagger& tagger, std::span<const std::string> tokens) {
  return tagger.predict(tokens);
}

// ---------------------------------------------------------------------------

class TaggerTrainer {
 public:
  explicit TaggerTrainer(int max_label) : tagger_(max_label) {}

  void observe(std::span<const std::string> tokens, std::span<const int> gold) {
    const std::vector<std::string> low = lowered_tokens(tokens);
    History h(tokens.size());
    for (std::size_t i = 0; i < low.size(); ++i) h.set_word(i, low[i]);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      ++clock_;
      const std::vector<std::string> base = base_features(tokens, low, i, h);
      const std::vector<Candidate> cands = candidates(low, i, h, tagger_.max_label_);
      const Candidate* best = nullptr;
      const Candidate* truth = nullptr;
      double best_score = 0.0;
      for (const Candidate& c : cands) {
        const double s = score(base, c.rel) + score(c.extra, c.rel);
        if (best == nullptr || s > best_score) {
          best = &c;
          best_score = s;
        }
        if (c.label == gold[i]) truth = &c;
      }
      if (truth == nullptr) {
        throw TaggerError("gold label " + std::to_string(gold[i]) + " at token " +
                          std::to_string(i) + " is not reachable; labels must be canonical");
      }
      if (best->label != truth->label) {
        update(base, truth->rel, +1.0);
        update(truth->extra, truth->rel, +1.0);
        update(base, best->rel, -1.0);
        update(best->extra, best->rel, -1.0);
      }
      h.push(i, gold[i]);
    }
  }

  Tagger finish() {
    Tagger out(tagger_.max_label_);
    for (auto& [feat, acc] : acc_) {
      Tagger::Weights avg{};
      bool any = false;
      for (std::size_t r = 0; r < Tagger::kNumRelations; ++r) {
        const double total = acc.total[r] + static_cast<double>(clock_ - acc.stamp[r]) * acc.w[r];
        avg[r] = clock_ > 0 ? total / static_cast<double>(clock_) : 0.0;
        any = any || avg[r] != 0.0;
      }
      if (any) out.weights_.emplace(feat, avg);
    }
    return out;
  }

 private:
  struct Accumulator {
    Tagger::Weights w{};
    Tagger::Weights total{};
    std::array<std::uint64_t, Tagger::kNumRelations> stamp{};
  };

  double score(const std::vector<std::string>& feats, int rel) const {
    double s = 0.0;
    for (const auto& f : feats) {
      auto it = acc_.find(f);
      if (it != acc_.end()) s += it->second.w[static_cast<std::size_t>(rel)];
    }
    return s;
  }

  void update(const std::vector<std::string>& feats, int rel, double delta) {
    const auto r = static_cast<std::size_t>(rel);
    for (const auto& f : feats) {
      Accumulator& a = acc_[f];
      a.total[r] += static_cast<double>(clock_ - a.stamp[r]) * a.w[r];
      a.stamp[r] = clock_;
      a.w[r] += delta;
    }
  }

  Tagger tagger_;
  std::unordered_map<std::string, Accumulator> acc_;
  std::uint64_t clock_ = 0;
};

Tagger train_tagger(std::span<const LiftedExample> corpus, std::size_t epochs, std::uint64_t seed,
                    int max_label) {
  if (corpus.empty()) throw TaggerError("EmptyCorpus: no examples to train the tagger on");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].tokens.size() != corpus[i].labels.size() ||
        !labels_well_formed(corpus[i].labels, max_label)) {
      throw TaggerError("record " + std::to_string(i) + " has malformed labels");
    }
  }
  TaggerTrainer trainer(max_label);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) trainer.observe(corpus[idx].tokens, corpus[idx].labels);
  }
  return trainer.finish();
}

// ---------------------------------------------------------------------------

std::string escape_feature(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_feature(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    const char n = s[++i];
    out.push_back(n == 't' ? '\t' : n == 'n' ? '\n' : n);
  }
  return out;
}

void Tagger::save(std::ostream& out) const {
  std::vector<const std::pair<const std::string, Weights>*> rows;
  rows.reserve(weights_.size());
  for (const auto& kv : weights_) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  out << "tlforge-tagger 1\n"
      << "max_label " << max_label_ << "\n"
      << "features " << rows.size() << "\n";
  char buf[64];
  for (const auto* kv : rows) {
    out << escape_feature(kv->first) << '\t';
    for (std::size_t r = 0; r < kNumRelations; ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", kv->second[r]);
      out << (r ? " " : "") << buf;
    }
    out << '\n';
  }
}

Tagger Tagger::load(std::istream& in) {
  std::string line;
  auto header = [&](const std::string& key) {
    if (!std::getline(in, line)) throw TaggerError("tagger file: truncated header");
    std::istringstream ls(line);
    std::string k;
    long long v = -1;
    ls >> k >> v;
    if (k != key || v < 0) throw TaggerError("tagger file: expected '" + key + "'");
    return v;
  };
  if (header("tlforge-tagger") != 1) throw TaggerError("tagger file: unsupported version");
  Tagger t(static_cast<int>(header("max_label")));
  const long long n = header("features");
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw TaggerError("tagger file: truncated feature table");
    const std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos) throw TaggerError("tagger file: malformed line " + std::to_string(i));
    Weights w{};
    std::istringstream ws(line.substr(tab + 1));
    for (auto& x : w) {
      if (!(ws >> x)) throw TaggerError("tagger file: bad weight on line " + std::to_string(i));
    }
    t.weights_.emplace(unescape_feature(std::string_view(line).substr(0, tab)), w);
  }
  return t;
}

void Tagger::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save(out);
}

Tagger Tagger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TaggerError("cannot open tagger '" + path + "'");
  return load(in);
}

}  // namespace tlforge
