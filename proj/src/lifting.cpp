/*!
 * \file lifting.cpp
 */
#include "tlforge/lifting.hpp"

#include <cctype>
#include <unordered_map>

namespace tlforge {

std::string LiftedExample::nl() const { return join_words(tokens); }

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_words(std::span<const std::string> words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

bool labels_well_formed(std::span<const int> labels, int max_label) {
  int next = 1;
  for (int l : labels) {
    if (l < 0 || l > max_label) return false;
    if (l == next) ++next;
    else if (l > next) return false;
  }
  return true;
}

std::vector<int> canonicalize_labels(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    if (l == 0) {
      out.push_back(0);
      continue;
    }
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()) + 1);
    out.push_back(it->second);
  }
  return out;
}

LiftResult lift(std::span<const std::string> tokens, std::span<const int> labels, int max_label) {
  if (tokens.size() != labels.size()) {
    throw LiftError(LiftErrorKind::kLengthMismatch,
                    "LengthMismatch: " + std::to_string(tokens.size()) + " tokens but " +
                        std::to_string(labels.size()) + " labels");
  }
  int next = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l > max_label) {
      throw LiftError(LiftErrorKind::kLabelOutOfRange,
                      "LabelOutOfRange: label " + std::to_string(l) + " at token " +
                          std::to_string(i));
    }
    if (l == next) {
      ++next;
    } else if (l > next) {
      throw LiftError(LiftErrorKind::kNonContiguousIds,
                      "NonContiguousIds: id " + std::to_string(l) + " at token " +
                          std::to_string(i) + " before id " + std::to_string(next));
    }
  }

  LiftResult r;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const int l = labels[i];
    if (l == 0) {
      r.lifted_tokens.push_back(tokens[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tokens.size() && labels[j] == l) ++j;
    r.lifted_tokens.push_back("prop_" + std::to_string(l));
    if (!r.ap_map.contains(l)) r.ap_map.emplace(l, join_words(tokens.subspan(i, j - i)));
    i = j;
  }
  r.lifted_nl = join_words(r.lifted_tokens);
  return r;
}

std::string canonical_ap_name(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back('_');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string unlift(const Formula& lifted, const ApMap& ap_map, TextStyle style) {
  std::unordered_map<int, std::string> names;
  for (int p : lifted.props_in_order()) {
    if (names.contains(p)) continue;
    auto it = ap_map.find(p);
    if (it == ap_map.end()) {
      throw LiftError(LiftErrorKind::kMissingAp,
                      "MissingAP(" + std::to_string(p) + "): no atomic proposition for prop_" +
                          std::to_string(p));
    }
    names.emplace(p, canonical_ap_name(it->second));
  }
  return render_with_atoms(lifted, names, style);
}

AtomTable grounding_atoms(const ApMap& ap_map) {
  AtomTable atoms;
  for (const auto& [id, text] : ap_map) atoms.emplace(canonical_ap_name(text), id);
  return atoms;
}

}  // namespace tlforge
