/*!
 * \file tlforge/model.hpp
 * \brief Small GRU encoder-decoder with dot-product attention, hand-written
 *        backprop, and a plain SGD training loop.
 *
 * Architecture, for a source sentence x_1..x_n and target y_1..y_T:
 *
 *   h_j = GRU_enc(E_src[x_j], h_{j-1}),       h_0 = 0
 *   s_t = GRU_dec(E_tgt[y_{t-1}], s_{t-1}),   s_0 = h_n, y_0 = EOS
 *   a_t = softmax_j(s_t . h_j),  c_t = sum_j a_tj h_j
 *   g_t = tanh(s_t + A c_t)
 *   z_t = W_out g_t + b_out                   (logits over the TL vocabulary)
 *
 * GRU cell (gate blocks stacked [r; z; n] in W, U, b):
 *
 *   r = sig(W_r x + U_r h + b_r)     z = sig(W_z x + U_z h + b_z)
 *   n = tanh(W_n x + U_n (r * h) + b_n)
 *   h' = (1 - z) * n + z * h
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tlforge/grammar.hpp"

namespace tlforge {

struct ModelDims {
  std::size_t src_vocab = 0;
  std::size_t tgt_vocab = 0;
  std::size_t d_emb = 32;
  std::size_t d_hidden = 64;

  std::size_t param_count() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/*! \brief Offsets of each parameter block inside the flat vector. */
struct ParamLayout {
  explicit ParamLayout(const ModelDims& d);

  std::size_t src_emb, tgt_emb;
  std::size_t enc_w, enc_u, enc_b;
  std::size_t dec_w, dec_u, dec_b;
  std::size_t att_w;
  std::size_t out_w, out_b;
  std::size_t total;
};

class ModelParams {
 public:
  explicit ModelParams(const ModelDims& dims);

  const ModelDims& dims() const { return dims_; }
  const ParamLayout& layout() const { return layout_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

 private:
  ModelDims dims_;
  ParamLayout layout_;
  std::vector<double> values_;
};

/*! \brief Flat gradient vector congruent with ModelParams::values(). */
using GradientBundle = std::vector<double>;

enum class LossMode { kStandard, kGrammarForced };

const char* to_string(LossMode mode);
LossMode loss_mode_from_string(std::string_view text);

struct TrainConfig {
  double learning_rate = 0.2;
  std::size_t epochs = 40;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  LossMode mode = LossMode::kStandard;
  std::size_t d_emb = 32;
  std::size_t d_hidden = 64;
  std::size_t max_len = 64;
};

enum class ModelErrorKind {
  kEmptySource,
  kLengthExceeded,
  kUnparseableTarget,
  kTargetNotValid,
  kParseFailure,
  kBadCheckpoint,
};

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ModelErrorKind kind() const { return kind_; }

 private:
  ModelErrorKind kind_;
};

/*!
 * \brief Word vocabulary of the (lifted) source language. Id 0 is <unk>.
 */
class SourceVocab {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  SourceVocab();
  explicit SourceVocab(std::vector<std::string> words);

  /*! \brief Sorted unique words of the sentences plus prop_1..prop_{max_props}. */
  static SourceVocab build(std::span<const std::vector<std::string>> sentences, int max_props);

  int id(std::string_view word) const;
  std::vector<int> encode(std::span<const std::string> words) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  /*! \brief FNV-1a over the word list; recorded in checkpoints. */
  std::uint64_t hash() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/*! \brief One training pair: source word ids and target token ids ending in EOS. */
struct Example {
  std::vector<int> src;
  std::vector<TokenId> tgt;
};

ModelParams init_model(const ModelDims& dims, std::uint64_t seed);

/*!
 * \brief Teacher-forced logits, one row per target position: row t scores
 *        the token at position t given tgt_prefix[0..t).
 */
std::vector<std::vector<double>> forward(const ModelParams& params, std::span<const int> src,
                                         std::span<const TokenId> tgt_prefix,
                                         std::size_t max_len = 64);

struct BackwardResult {
  GradientBundle grad;
  /*! \brief Batch mean of per-sequence summed cross-entropy. */
  double loss = 0.0;
};

/*!
 * \brief Exact gradient of the batch-mean sequence loss. In grammar-forced
 *        mode the valid set at each position comes from threading the grammar
 *        state over the target tokens, and logits are masked before softmax.
 */
BackwardResult backward(const ModelParams& params, std::span<const Example> batch, LossMode mode,
                        const LtlGrammar& grammar);

/*! \brief Loss only; same value as backward().loss. */
double batch_loss(const ModelParams& params, std::span<const Example> batch, LossMode mode,
                  const LtlGrammar& grammar);

/*!
 * \brief Check every target against the grammar.
 * \throws ModelError naming the record index and token position.
 */
void validate_targets(std::span<const Example> corpus, LossMode mode, const LtlGrammar& grammar);

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_curve;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/*!
 * \brief epochs x ceil(N / batch_size) constant-stepsize SGD steps. The
 *        shuffle order depends only on the seed, so both loss modes see the
 *        same batches.
 */
TrainResult train(std::span<const Example> corpus, const TrainConfig& cfg,
                  const LtlGrammar& grammar, std::size_t src_vocab_size,
                  const EpochCallback& on_epoch = {});

/*!
 * \brief Incremental decoder: encodes the source once, then produces one
 *        logits row per step.
 */
class DecoderSession {
 public:
  DecoderSession(const ModelParams& params, std::span<const int> src);
  ~DecoderSession();
  DecoderSession(const DecoderSession&) = delete;
  DecoderSession& operator=(const DecoderSession&) = delete;

  /*! \brief Feed the previous token (EOS at the first step); returns next-token logits. */
  std::span<const double> step(TokenId previous);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tlforge
