/*!
 * \file tlforge/lifting.hpp
 * \brief Integer AP labels, lifting NL to placeholder form, and grounding
 *        lifted formulas back to domain atoms.
 *
 * Label convention: 0 marks a token outside any atomic proposition; n >= 1
 * marks a token inside a mention of the n-th proposition, where ids are
 * numbered by first appearance. Several mentions may share an id
 * (co-reference); each maximal run of equal nonzero labels is one mention.
 */
#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tlforge/formula.hpp"

namespace tlforge {

/*! \brief Proposition id -> surface text of its first mention. */
using ApMap = std::map<int, std::string>;

struct LiftedExample {
  std::vector<std::string> tokens;
  std::vector<int> labels;
  std::string lifted_nl;
  ApMap ap_map;
  Formula lifted_tl = Formula::Prop(1);
  std::string grounded_tl;
  std::string domain;

  /*! \brief Tokens joined with single spaces. */
  std::string nl() const;
};

enum class LiftErrorKind { kNonContiguousIds, kLabelOutOfRange, kLengthMismatch, kMissingAp };

class LiftError : public std::runtime_error {
 public:
  LiftError(LiftErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  LiftErrorKind kind() const { return kind_; }

 private:
  LiftErrorKind kind_;
};

struct LiftResult {
  std::vector<std::string> lifted_tokens;
  std::string lifted_nl;
  ApMap ap_map;
};

/*!
 * \brief Replace each mention with "prop_n".
 * \throws LiftError(kNonContiguousIds) unless ids first appear as 1, 2, 3, ...
 * \throws LiftError(kLabelOutOfRange) for labels outside 0..max_label.
 */
LiftResult lift(std::span<const std::string> tokens, std::span<const int> labels,
                int max_label = kMaxSupportedProps);

/*! \brief Renumber nonzero labels by order of first appearance. */
std::vector<int> canonicalize_labels(std::span<const int> labels);

/*! \brief True iff labels are canonical and within 0..max_label. */
bool labels_well_formed(std::span<const int> labels, int max_label);

/*! \brief Lowercase, spaces to underscores: "Red Room" -> "red_room". */
std::string canonical_ap_name(std::string_view text);

/*!
 * \brief Render `lifted` with every prop_i replaced by the canonical name of ap_map[i].
 * \throws LiftError(kMissingAp) naming the first index without an entry.
 */
std::string unlift(const Formula& lifted, const ApMap& ap_map,
                   TextStyle style = TextStyle::kUnicode);

/*! \brief Atom table that parses grounded text back to lifted ids. */
AtomTable grounding_atoms(const ApMap& ap_map);

/*! \brief Whitespace tokenization used for NL input. */
std::vector<std::string> split_words(std::string_view text);

std::string join_words(std::span<const std::string> words);

}  // namespace tlforge
