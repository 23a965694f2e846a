/*!
 * \file tlforge/corpus_io.hpp
 * \brief JSONL corpus records.
 *
 * One JSON object per line with fields, in this order: nl, tokens, labels,
 * lifted_nl, ap_map (object keyed by the decimal id), lifted_tl, grounded_tl,
 * domain. Formulas are written with ASCII operator names.
 */
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tlforge/lifting.hpp"

namespace tlforge {

std::string to_jsonl_line(const LiftedExample& ex);
/*! \throws std::runtime_error with the offending field on malformed records. */
LiftedExample from_jsonl_line(const std::string& line);

void write_jsonl(const std::string& path, std::span<const LiftedExample> corpus);
std::vector<LiftedExample> read_jsonl(const std::string& path);

/*!
 * \brief Internal consistency of a record: lift(tokens, labels) reproduces
 *        lifted_nl and ap_map, every prop has an AP, and grounded_tl parses
 *        back to lifted_tl. Returns an empty string when clean.
 */
std::string check_record(const LiftedExample& ex);

}  // namespace tlforge
