#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tlforge/checkpoint.hpp"

using namespace tlforge;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("tlforge_ckpt_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

Checkpoint sample() {
  SourceVocab vocab({"<unk>", "go", "prop_1", "to"});
  return Checkpoint{init_model({vocab.size(), 16, 4, 6}, 9), vocab, 5, 9, LossMode::kGrammarForced};
}

void expect_bad(const std::string& path) {
  try {
    load_checkpoint(path);
    FAIL("expected BadCheckpoint");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::kBadCheckpoint);
  }
}

}  // namespace

TEST_CASE("round trip is bit exact") {
  const std::string path = temp_path("rt");
  const Checkpoint c = sample();
  save_checkpoint(path, c);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.params == c.params);
  CHECK(back.vocab.words() == c.vocab.words());
  CHECK(back.max_props == 5);
  CHECK(back.seed == 9);
  CHECK(back.mode == LossMode::kGrammarForced);
}

TEST_CASE("parameters are little-endian doubles after the data marker") {
  const std::string path = temp_path("le");
  Checkpoint c = sample();
  c.params.values()[0] = 1.0;  // 0x3FF0000000000000
  save_checkpoint(path, c);
  const std::string bytes = slurp(path);
  const auto at = bytes.find("data\n");
  REQUIRE(at != std::string::npos);
  const std::string first = bytes.substr(at + 5, 8);
  CHECK(first == std::string("\x00\x00\x00\x00\x00\x00\xf0\x3f", 8));
  CHECK(bytes.size() == at + 5 + 8 * c.params.size());
  CHECK(bytes.rfind("tlforge-model 1\n", 0) == 0);
}

TEST_CASE("damaged files are rejected") {
  const std::string path = temp_path("bad");
  save_checkpoint(path, sample());
  const std::string good = slurp(path);

  spit(path, good.substr(0, good.size() - 3));
  expect_bad(path);

  spit(path, good.substr(0, 20));
  expect_bad(path);

  std::string renamed = good;
  renamed.replace(renamed.find("\ngo\n"), 4, "\nGO\n");
  spit(path, renamed);
  expect_bad(path);

  std::string version = good;
  version[version.find('1')] = '7';
  spit(path, version);
  expect_bad(path);

  std::string props = good;
  props.replace(props.find("max_props 5"), 11, "max_props 4");
  spit(path, props);
  expect_bad(path);

  std::string mode = good;
  mode.replace(mode.find("grammar_forced"), 14, "grammar_unsure");
  spit(path, mode);
  expect_bad(path);

  spit(path, "");
  expect_bad(path);
  expect_bad(temp_path("does_not_exist"));
}
