/*!
 * \file model.cpp
 * \brief Forward pass, backprop through time, and the SGD loop.
 */
#include "tlforge/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tlforge/kernels.hpp"
#include "tlforge/loss.hpp"

namespace tlforge {

std::size_t ModelDims::param_count() const { return ParamLayout(*this).total; }

ParamLayout::ParamLayout(const ModelDims& d) {
  const std::size_t E = d.d_emb, H = d.d_hidden, V = d.tgt_vocab, S = d.src_vocab;
  std::size_t at = 0;
  auto take = [&](std::size_t n) {
    std::size_t o = at;
    at += n;
    return o;
  };
  src_emb = take(S * E);
  tgt_emb = take(V * E);
  enc_w = take(3 * H * E);
  enc_u = take(3 * H * H);
  enc_b = take(3 * H);
  dec_w = take(3 * H * E);
  dec_u = take(3 * H * H);
  dec_b = take(3 * H);
  att_w = take(H * H);
  out_w = take(V * H);
  out_b = take(V);
  total = at;
}

ModelParams::ModelParams(const ModelDims& dims)
    : dims_(dims), layout_(dims), values_(layout_.total, 0.0) {}

const char* to_string(LossMode mode) {
  return mode == LossMode::kStandard ? "standard" : "grammar_forced";
}

LossMode loss_mode_from_string(std::string_view text) {
  if (text == "standard") return LossMode::kStandard;
  if (text == "grammar_forced" || text == "forced") return LossMode::kGrammarForced;
  throw std::invalid_argument("unknown loss mode '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// SourceVocab

SourceVocab::SourceVocab() : SourceVocab(std::vector<std::string>{}) {}

SourceVocab::SourceVocab(std::vector<std::string> words) {
  if (words.empty() || words.front() != kUnknown) words.insert(words.begin(), std::string(kUnknown));
  words_ = std::move(words);
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], static_cast<int>(i));
}

SourceVocab SourceVocab::build(std::span<const std::vector<std::string>> sentences, int max_props) {
  std::vector<std::string> words;
  for (const auto& s : sentences) words.insert(words.end(), s.begin(), s.end());
  for (int i = 1; i <= max_props; ++i) words.push_back("prop_" + std::to_string(i));
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  words.erase(std::remove(words.begin(), words.end(), std::string(kUnknown)), words.end());
  return SourceVocab(std::move(words));
}

int SourceVocab::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? 0 : it->second;
}

std::vector<int> SourceVocab::encode(std::span<const std::string> words) const {
  std::vector<int> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(id(w));
  return out;
}

std::uint64_t SourceVocab::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& w : words_) {
    for (unsigned char c : w) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Initialization

ModelParams init_model(const ModelDims& dims, std::uint64_t seed) {
  if (dims.src_vocab == 0 || dims.tgt_vocab == 0 || dims.d_emb == 0 || dims.d_hidden == 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  ModelParams p(dims);
  const ParamLayout& L = p.layout();
  std::span<double> v = p.values();
  std::mt19937_64 rng(seed);
  const double E = static_cast<double>(dims.d_emb);
  const double H = static_cast<double>(dims.d_hidden);
  const double V = static_cast<double>(dims.tgt_vocab);

  auto fill = [&](std::size_t offset, std::size_t count, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) v[offset + i] = dist(rng);
  };
  auto glorot = [](double fan_in, double fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); };

  const std::size_t e = dims.d_emb, h = dims.d_hidden, vv = dims.tgt_vocab;
  fill(L.src_emb, dims.src_vocab * e, std::sqrt(3.0 / E));
  fill(L.tgt_emb, vv * e, std::sqrt(3.0 / E));
  fill(L.enc_w, 3 * h * e, glorot(E, H));
  fill(L.enc_u, 3 * h * h, glorot(H, H));
  fill(L.enc_b, 3 * h, 1.0 / std::sqrt(H));
  fill(L.dec_w, 3 * h * e, glorot(E, H));
  fill(L.dec_u, 3 * h * h, glorot(H, H));
  fill(L.dec_b, 3 * h, 1.0 / std::sqrt(H));
  fill(L.att_w, h * h, glorot(H, H));
  fill(L.out_w, vv * h, glorot(H, V));
  fill(L.out_b, vv, 1.0 / std::sqrt(H));
  return p;
}

// ---------------------------------------------------------------------------
// Network

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct GruWeights {
  const double* w;
  const double* u;
  const double* b;
  std::size_t in;
  std::size_t hid;
};

struct GruGrads {
  double* w;
  double* u;
  double* b;
};

/*!
 * One GRU application. Writes gates r, z, candidate n, and output h.
 * `a` needs 3H doubles, `rh` H doubles.
 */
void gru_forward(const GruWeights& g, const double* x, const double* h_prev, double* r, double* z,
                 double* n, double* h, double* a, double* rh) {
  const kernels::KernelTable& k = kernels::active();
  const std::size_t H = g.hid;
  std::copy(g.b, g.b + 3 * H, a);
  k.gemv(g.w, 3 * H, g.in, x, a);
  k.gemv(g.u, 2 * H, H, h_prev, a);
  for (std::size_t i = 0; i < H; ++i) {
    r[i] = sigmoid(a[i]);
    z[i] = sigmoid(a[H + i]);
    rh[i] = r[i] * h_prev[i];
  }
  k.gemv(g.u + 2 * H * H, H, H, rh, a + 2 * H);
  for (std::size_t i = 0; i < H; ++i) {
    n[i] = std::tanh(a[2 * H + i]);
    h[i] = (1.0 - z[i]) * n[i] + z[i] * h_prev[i];
  }
}

/*!
 * Backprop through one GRU application given dL/dh in `dh`. Writes dL/dh_prev
 * into `dh_prev` (overwritten), accumulates weight grads and dL/dx into `dx`.
 * Scratch: `da` 3H, `drh` H, `rh` H.
 */
void gru_backward(const GruWeights& g, GruGrads& gg, const double* x, const double* h_prev,
                  const double* r, const double* z, const double* n, const double* dh,
                  double* dh_prev, double* dx, double* da, double* drh, double* rh) {
  const kernels::KernelTable& k = kernels::active();
  const std::size_t H = g.hid;
  for (std::size_t i = 0; i < H; ++i) {
    const double dn = dh[i] * (1.0 - z[i]);
    const double dz = dh[i] * (h_prev[i] - n[i]);
    dh_prev[i] = dh[i] * z[i];
    da[2 * H + i] = dn * (1.0 - n[i] * n[i]);
    da[H + i] = dz * z[i] * (1.0 - z[i]);
    rh[i] = r[i] * h_prev[i];
    drh[i] = 0.0;
  }
  const double* u_n = g.u + 2 * H * H;
  k.gemv_t(u_n, H, H, da + 2 * H, drh);
  k.ger(gg.u + 2 * H * H, H, H, da + 2 * H, rh);
  for (std::size_t i = 0; i < H; ++i) {
    dh_prev[i] += drh[i] * r[i];
    const double dr = drh[i] * h_prev[i];
    da[i] = dr * r[i] * (1.0 - r[i]);
  }
  k.ger(gg.u, 2 * H, H, da, h_prev);
  k.gemv_t(g.u, 2 * H, H, da, dh_prev);
  k.ger(gg.w, 3 * H, g.in, da, x);
  k.axpy(1.0, da, gg.b, 3 * H);
  k.gemv_t(g.w, 3 * H, g.in, da, dx);
}

/*!
 * Holds activations of one sequence so the backward pass can replay them.
 * Buffers are reused across sequences.
 */
class Runner {
 public:
  explicit Runner(const ModelParams& p)
      : p_(p),
        L_(p.layout()),
        E_(p.dims().d_emb),
        H_(p.dims().d_hidden),
        V_(p.dims().tgt_vocab),
        S_(p.dims().src_vocab) {
    const double* base = p.values().data();
    enc_ = {base + L_.enc_w, base + L_.enc_u, base + L_.enc_b, E_, H_};
    dec_ = {base + L_.dec_w, base + L_.dec_u, base + L_.dec_b, E_, H_};
    a_.resize(3 * H_);
    rh_.resize(H_);
    drh_.resize(H_);
    zeros_.assign(H_, 0.0);
  }

  void encode(std::span<const int> src) {
    if (src.empty()) throw ModelError(ModelErrorKind::kEmptySource, "EmptySource: source is empty");
    for (int id : src) {
      if (id < 0 || static_cast<std::size_t>(id) >= S_) {
        throw std::out_of_range("source id " + std::to_string(id) + " outside the vocabulary");
      }
    }
    src_.assign(src.begin(), src.end());
    const std::size_t n = src_.size();
    er_.resize(n * H_);
    ez_.resize(n * H_);
    en_.resize(n * H_);
    eh_.resize(n * H_);
    const double* emb = p_.values().data() + L_.src_emb;
    for (std::size_t j = 0; j < n; ++j) {
      const double* h_prev = j == 0 ? zeros_.data() : &eh_[(j - 1) * H_];
      gru_forward(enc_, emb + static_cast<std::size_t>(src_[j]) * E_, h_prev, &er_[j * H_],
                  &ez_[j * H_], &en_[j * H_], &eh_[j * H_], a_.data(), rh_.data());
    }
    steps_ = 0;
    prev_.clear();
  }

  /*! Run one decoder step; returns the logits row of this step. */
  const double* decode_step(TokenId prev) {
    if (prev < 0 || static_cast<std::size_t>(prev) >= V_) {
      throw std::out_of_range("target id " + std::to_string(prev) + " outside the vocabulary");
    }
    const std::size_t t = steps_++;
    const std::size_t n = src_.size();
    grow(steps_);
    prev_.push_back(prev);

    const kernels::KernelTable& k = kernels::active();
    const double* base = p_.values().data();
    const double* s_prev = t == 0 ? &eh_[(n - 1) * H_] : &ds_[(t - 1) * H_];
    double* s = &ds_[t * H_];
    gru_forward(dec_, base + L_.tgt_emb + static_cast<std::size_t>(prev) * E_, s_prev,
                &dr_[t * H_], &dz_[t * H_], &dn_[t * H_], s, a_.data(), rh_.data());

    // Dot-product attention over encoder states.
    double* alpha = &alpha_[t * n];
    double m = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      alpha[j] = k.dot(s, &eh_[j * H_], H_);
      m = std::max(m, alpha[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      alpha[j] = std::exp(alpha[j] - m);
      sum += alpha[j];
    }
    double* c = &ctx_[t * H_];
    std::fill(c, c + H_, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      alpha[j] /= sum;
      k.axpy(alpha[j], &eh_[j * H_], c, H_);
    }

    double* g = &g_[t * H_];
    std::copy(s, s + H_, g);
    k.gemv(base + L_.att_w, H_, H_, c, g);
    for (std::size_t i = 0; i < H_; ++i) g[i] = std::tanh(g[i]);

    double* z = &logits_[t * V_];
    std::copy(base + L_.out_b, base + L_.out_b + V_, z);
    k.gemv(base + L_.out_w, V_, H_, g, z);
    return z;
  }

  std::size_t steps() const { return steps_; }
  std::size_t vocab() const { return V_; }

  /*! Accumulate dL/dtheta into `grad` given dL/dz for every decoded step. */
  void backward(const double* dlogits, double* grad) {
    const kernels::KernelTable& k = kernels::active();
    const double* base = p_.values().data();
    const std::size_t n = src_.size();
    const std::size_t T = steps_;

    GruGrads enc_g{grad + L_.enc_w, grad + L_.enc_u, grad + L_.enc_b};
    GruGrads dec_g{grad + L_.dec_w, grad + L_.dec_u, grad + L_.dec_b};
    d_enc_.assign(n * H_, 0.0);
    std::vector<double>& ds_next = tmp_a_;
    std::vector<double>& ds = tmp_b_;
    std::vector<double>& dg = tmp_c_;
    std::vector<double>& dc = tmp_d_;
    std::vector<double>& ds_prev = tmp_e_;
    ds_next.assign(H_, 0.0);
    ds.assign(H_, 0.0);
    dg.assign(H_, 0.0);
    dc.assign(H_, 0.0);
    ds_prev.assign(H_, 0.0);
    dalpha_.resize(n);
    da_.resize(3 * H_);

    for (std::size_t t = T; t-- > 0;) {
      const double* dz = dlogits + t * V_;
      const double* g = &g_[t * H_];
      const double* c = &ctx_[t * H_];
      const double* s = &ds_[t * H_];
      const double* alpha = &alpha_[t * n];

      k.ger(grad + L_.out_w, V_, H_, dz, g);
      k.axpy(1.0, dz, grad + L_.out_b, V_);
      std::fill(dg.begin(), dg.end(), 0.0);
      k.gemv_t(base + L_.out_w, V_, H_, dz, dg.data());
      for (std::size_t i = 0; i < H_; ++i) {
        dg[i] *= 1.0 - g[i] * g[i];
        ds[i] = ds_next[i] + dg[i];
      }
      std::fill(dc.begin(), dc.end(), 0.0);
      k.gemv_t(base + L_.att_w, H_, H_, dg.data(), dc.data());
      k.ger(grad + L_.att_w, H_, H_, dg.data(), c);

      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        dalpha_[j] = k.dot(dc.data(), &eh_[j * H_], H_);
        weighted += alpha[j] * dalpha_[j];
        k.axpy(alpha[j], dc.data(), &d_enc_[j * H_], H_);
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double de = alpha[j] * (dalpha_[j] - weighted);
        k.axpy(de, &eh_[j * H_], ds.data(), H_);
        k.axpy(de, s, &d_enc_[j * H_], H_);
      }

      const std::size_t prev = static_cast<std::size_t>(prev_[t]);
      const double* s_prev = t == 0 ? &eh_[(n - 1) * H_] : &ds_[(t - 1) * H_];
      gru_backward(dec_, dec_g, base + L_.tgt_emb + prev * E_, s_prev, &dr_[t * H_], &dz_[t * H_],
                   &dn_[t * H_], ds.data(), ds_prev.data(), grad + L_.tgt_emb + prev * E_,
                   da_.data(), drh_.data(), rh_.data());
      std::swap(ds_next, ds_prev);
    }
    // s_0 is the last encoder state.
    k.axpy(1.0, ds_next.data(), &d_enc_[(n - 1) * H_], H_);

    std::vector<double>& dh_next = tmp_a_;
    std::vector<double>& dh = tmp_b_;
    std::vector<double>& dh_prev = tmp_e_;
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t j = n; j-- > 0;) {
      for (std::size_t i = 0; i < H_; ++i) dh[i] = d_enc_[j * H_ + i] + dh_next[i];
      const std::size_t id = static_cast<std::size_t>(src_[j]);
      const double* h_prev = j == 0 ? zeros_.data() : &eh_[(j - 1) * H_];
      gru_backward(enc_, enc_g, base + L_.src_emb + id * E_, h_prev, &er_[j * H_], &ez_[j * H_],
                   &en_[j * H_], dh.data(), dh_prev.data(), grad + L_.src_emb + id * E_,
                   da_.data(), drh_.data(), rh_.data());
      std::swap(dh_next, dh_prev);
    }
  }

 private:
  void grow(std::size_t T) {
    const std::size_t n = src_.size();
    if (ds_.size() < T * H_) {
      const std::size_t cap = std::max(T, 2 * ds_.size() / std::max<std::size_t>(H_, 1));
      ds_.resize(cap * H_);
      dr_.resize(cap * H_);
      dz_.resize(cap * H_);
      dn_.resize(cap * H_);
      ctx_.resize(cap * H_);
      g_.resize(cap * H_);
      logits_.resize(cap * V_);
    }
    if (alpha_.size() < T * n) alpha_.resize(std::max(T * n, 2 * alpha_.size()));
  }

  const ModelParams& p_;
  const ParamLayout& L_;
  std::size_t E_, H_, V_, S_;
  GruWeights enc_{}, dec_{};

  std::vector<int> src_;
  std::vector<TokenId> prev_;
  std::size_t steps_ = 0;

  std::vector<double> er_, ez_, en_, eh_;
  std::vector<double> ds_, dr_, dz_, dn_, ctx_, g_, logits_, alpha_;

  std::vector<double> a_, rh_, drh_, da_, zeros_, d_enc_, dalpha_;
  std::vector<double> tmp_a_, tmp_b_, tmp_c_, tmp_d_, tmp_e_;
};

std::string position_suffix(std::size_t index, std::size_t position) {
  return " (record " + std::to_string(index) + ", position " + std::to_string(position) + ")";
}

/*! Valid sets per target position, or a ModelError naming the first offence. */
std::vector<TokenSet> target_valid_sets(std::span<const TokenId> tgt, LossMode mode,
                                        const LtlGrammar& grammar, std::size_t index) {
  std::vector<TokenSet> sets;
  sets.reserve(tgt.size());
  GrammarState s = grammar.init_state();
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    if (grammar.is_accepting(s)) {
      throw ModelError(ModelErrorKind::kUnparseableTarget,
                       "UnparseableTarget: tokens after EOS" + position_suffix(index, t));
    }
    TokenSet valid = grammar.valid_tokens(s);
    if (!valid.contains(tgt[t])) {
      if (mode == LossMode::kGrammarForced) {
        throw ModelError(ModelErrorKind::kTargetNotValid,
                         "TargetNotValid: target token outside the grammar's valid set" +
                             position_suffix(index, t));
      }
      throw ModelError(ModelErrorKind::kUnparseableTarget,
                       "UnparseableTarget: target is not a well-formed formula" +
                           position_suffix(index, t));
    }
    sets.push_back(valid);
    grammar.advance(s, tgt[t]);
  }
  if (!grammar.is_accepting(s)) {
    throw ModelError(ModelErrorKind::kUnparseableTarget,
                     "UnparseableTarget: target does not end in EOS after a complete formula" +
                         position_suffix(index, tgt.size()));
  }
  return sets;
}

double run_batch(const ModelParams& params, std::span<const Example> batch, LossMode mode,
                 const LtlGrammar& grammar, double* grad) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Runner runner(params);
  const std::size_t V = params.dims().tgt_vocab;
  if (static_cast<std::size_t>(grammar.vocab().size()) != V) {
    throw std::invalid_argument("grammar vocabulary does not match the model");
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dlogits;
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Example& ex = batch[b];
    std::vector<TokenSet> sets = target_valid_sets(ex.tgt, mode, grammar, b);
    runner.encode(ex.src);
    dlogits.assign(ex.tgt.size() * V, 0.0);
    double seq_loss = 0.0;
    for (std::size_t t = 0; t < ex.tgt.size(); ++t) {
      const TokenId prev = t == 0 ? kEosId : ex.tgt[t - 1];
      const double* z = runner.decode_step(prev);
      const TokenSet* valid = mode == LossMode::kGrammarForced ? &sets[t] : nullptr;
      seq_loss += loss_and_grad(std::span<const double>(z, V), ex.tgt[t], valid, scale,
                                std::span<double>(&dlogits[t * V], V));
    }
    total += seq_loss;
    if (grad != nullptr) runner.backward(dlogits.data(), grad);
  }
  return total * scale;
}

}  // namespace

std::vector<std::vector<double>> forward(const ModelParams& params, std::span<const int> src,
                                         std::span<const TokenId> tgt_prefix,
                                         std::size_t max_len) {
  if (tgt_prefix.size() > max_len) {
    throw ModelError(ModelErrorKind::kLengthExceeded,
                     "LengthExceeded: target prefix of " + std::to_string(tgt_prefix.size()) +
                         " tokens exceeds max_len " + std::to_string(max_len));
  }
  Runner runner(params);
  runner.encode(src);
  const std::size_t V = params.dims().tgt_vocab;
  std::vector<std::vector<double>> rows;
  rows.reserve(tgt_prefix.size());
  for (std::size_t t = 0; t < tgt_prefix.size(); ++t) {
    const double* z = runner.decode_step(t == 0 ? kEosId : tgt_prefix[t - 1]);
    rows.emplace_back(z, z + V);
  }
  return rows;
}

BackwardResult backward(const ModelParams& params, std::span<const Example> batch, LossMode mode,
                        const LtlGrammar& grammar) {
  BackwardResult out;
  out.grad.assign(params.size(), 0.0);
  out.loss = run_batch(params, batch, mode, grammar, out.grad.data());
  return out;
}

double batch_loss(const ModelParams& params, std::span<const Example> batch, LossMode mode,
                  const LtlGrammar& grammar) {
  return run_batch(params, batch, mode, grammar, nullptr);
}

void validate_targets(std::span<const Example> corpus, LossMode mode, const LtlGrammar& grammar) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].src.empty()) {
      throw ModelError(ModelErrorKind::kEmptySource,
                       "EmptySource: record " + std::to_string(i) + " has an empty source");
    }
    target_valid_sets(corpus[i].tgt, mode, grammar, i);
  }
}

TrainResult train(std::span<const Example> corpus, const TrainConfig& cfg,
                  const LtlGrammar& grammar, std::size_t src_vocab_size,
                  const EpochCallback& on_epoch) {
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (cfg.batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  validate_targets(corpus, cfg.mode, grammar);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].tgt.size() > cfg.max_len) {
      throw ModelError(ModelErrorKind::kLengthExceeded,
                       "LengthExceeded: record " + std::to_string(i) + " target is longer than max_len");
    }
  }

  ModelDims dims{src_vocab_size, static_cast<std::size_t>(grammar.vocab().size()), cfg.d_emb,
                 cfg.d_hidden};
  TrainResult result{init_model(dims, cfg.seed), {}};
  std::span<double> theta = result.params.values();

  // The shuffle stream is separate from the init stream and independent of mode.
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x5DEECE66Dull);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;
  std::vector<double> grad(theta.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(corpus[order[i]]);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double loss = run_batch(result.params, batch, cfg.mode, grammar, grad.data());
      result.loss_curve.push_back(loss);
      kernels::axpy(-cfg.learning_rate, grad, theta);
      epoch_loss += loss;
      ++steps;
    }
    if (on_epoch) on_epoch(epoch, epoch_loss / static_cast<double>(steps));
  }
  return result;
}

// ---------------------------------------------------------------------------

struct DecoderSession::Impl {
  explicit Impl(const ModelParams& p) : runner(p) {}
  Runner runner;
  std::size_t vocab = 0;
};

DecoderSession::DecoderSession(const ModelParams& params, std::span<const int> src)
    : impl_(std::make_unique<Impl>(params)) {
  impl_->runner.encode(src);
  impl_->vocab = params.dims().tgt_vocab;
}

DecoderSession::~DecoderSession() = default;

std::span<const double> DecoderSession::step(TokenId previous) {
  const double* z = impl_->runner.decode_step(previous);
  return {z, impl_->vocab};
}

}  // namespace tlforge
