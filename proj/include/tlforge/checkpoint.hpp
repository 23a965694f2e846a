/*!
 * \file tlforge/checkpoint.hpp
 * \brief Model checkpoint file.
 *
 * Layout (version 1): a text header of `key value` lines, the source
 * vocabulary one word per line, a line `data`, then the parameters as
 * little-endian IEEE-754 doubles.
 *
 *   tlforge-model 1
 *   max_props 5
 *   d_emb 32
 *   d_hidden 64
 *   src_vocab <n>
 *   tgt_vocab <max_props + 11>
 *   seed <u64>
 *   mode standard|grammar_forced
 *   vocab_hash <16 hex digits>
 *   params <count>
 *   <n vocabulary lines>
 *   data
 *   <count x 8 bytes>
 */
#pragma once

#include <cstdint>
#include <string>

#include "tlforge/model.hpp"

namespace tlforge {

struct Checkpoint {
  ModelParams params;
  SourceVocab vocab;
  int max_props = kDefaultMaxProps;
  std::uint64_t seed = 0;
  LossMode mode = LossMode::kStandard;
};

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/*! \throws ModelError(kBadCheckpoint) on malformed or inconsistent files. */
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tlforge
