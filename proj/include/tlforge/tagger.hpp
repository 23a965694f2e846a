/*!
 * \file tlforge/tagger.hpp
 * \brief Averaged-perceptron tagger that predicts integer AP labels.
 *
 * Decoding is greedy, left to right. Instead of scoring the integer ids
 * directly, each candidate label is scored through its relation to the
 * history: 0 (outside), continue the current mention, open a new id, or
 * refer back to an existing id. This keeps weights shared across ids, so a
 * tagger trained on sentences with few APs still labels sentences with more.
 *
 * Checkpoint format (text, version 1):
 *
 *   tlforge-tagger 1
 *   max_label <n>
 *   features <m>
 *   <feature>\t<w_zero> <w_continue> <w_new> <w_coref>     (m lines)
 *
 * Feature names escape backslash, tab and newline as \\, \t and \n.
 */
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tlforge/lifting.hpp"

namespace tlforge {

class Tagger {
 public:
  static constexpr int kNumRelations = 4;
  using Weights = std::array<double, kNumRelations>;

  explicit Tagger(int max_label = kDefaultMaxProps);

  int max_label() const { return max_label_; }
  std::size_t feature_count() const { return weights_.size(); }

  /*! \brief One label per token, canonical (first-appearance) ids. */
  std::vector<int> predict(std::span<const std::string> tokens) const;

  void save(std::ostream& out) const;
  static Tagger load(std::istream& in);
  void save(const std::string& path) const;
  static Tagger load(const std::string& path);

 private:
  friend class TaggerTrainer;
  int max_label_;
  std::unordered_map<std::string, Weights> weights_;
};

class TaggerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/*!
 * \brief Train on gold labels with teacher-forced history.
 * \throws TaggerError("EmptyCorpus") when there is nothing to learn from.
 */
Tagger train_tagger(std::span<const LiftedExample> corpus, std::size_t epochs, std::uint64_t seed,
                    int max_label = kDefaultMaxProps);

std::vector<int> predict_labels(const Tagger& tagger, std::span<const std::string> tokens);

std::string escape_feature(std::string_view s);
std::string unescape_feature(std::string_view s);

}  // namespace tlforge
