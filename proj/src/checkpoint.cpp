/*!
 * \file checkpoint.cpp
 */
#include "tlforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tlforge {
namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ModelError(ModelErrorKind::kBadCheckpoint, "bad checkpoint '" + path + "': " + why);
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const ModelDims& d = ckpt.params.dims();
  out << "tlforge-model " << kCheckpointVersion << "\n"
      << "max_props " << ckpt.max_props << "\n"
      << "d_emb " << d.d_emb << "\n"
      << "d_hidden " << d.d_hidden << "\n"
      << "src_vocab " << d.src_vocab << "\n"
      << "tgt_vocab " << d.tgt_vocab << "\n"
      << "seed " << ckpt.seed << "\n"
      << "mode " << to_string(ckpt.mode) << "\n"
      << "vocab_hash " << hex64(ckpt.vocab.hash()) << "\n"
      << "params " << ckpt.params.size() << "\n";
  for (const auto& w : ckpt.vocab.words()) out << w << "\n";
  out << "data\n";
  std::string bytes(ckpt.params.size() * 8, '\0');
  std::size_t at = 0;
  for (double v : ckpt.params.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes[at++] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad(path, "cannot open");
  std::string line;
  auto expect_key = [&](const std::string& key) {
    if (!std::getline(in, line)) bad(path, "truncated header");
    std::istringstream ls(line);
    std::string k, v;
    ls >> k >> v;
    if (k != key || v.empty()) bad(path, "expected '" + key + "', got '" + line + "'");
    return v;
  };
  if (expect_key("tlforge-model") != std::to_string(kCheckpointVersion)) {
    bad(path, "unsupported version");
  }
  try {
    const int max_props = std::stoi(expect_key("max_props"));
    ModelDims dims;
    dims.d_emb = std::stoull(expect_key("d_emb"));
    dims.d_hidden = std::stoull(expect_key("d_hidden"));
    dims.src_vocab = std::stoull(expect_key("src_vocab"));
    dims.tgt_vocab = std::stoull(expect_key("tgt_vocab"));
    const std::uint64_t seed = std::stoull(expect_key("seed"));
    const LossMode mode = loss_mode_from_string(expect_key("mode"));
    const std::string hash = expect_key("vocab_hash");
    const std::size_t count = std::stoull(expect_key("params"));

    if (static_cast<int>(dims.tgt_vocab) != max_props + kNumFixedTokens) {
      bad(path, "tgt_vocab does not match max_props");
    }
    std::vector<std::string> words;
    for (std::size_t i = 0; i < dims.src_vocab; ++i) {
      if (!std::getline(in, line)) bad(path, "truncated vocabulary");
      words.push_back(line);
    }
    if (!std::getline(in, line) || line != "data") bad(path, "missing data marker");
    SourceVocab vocab(std::move(words));
    if (vocab.size() != dims.src_vocab) bad(path, "vocabulary size mismatch");
    if (hex64(vocab.hash()) != hash) bad(path, "vocabulary hash mismatch");

    ModelParams params(dims);
    if (params.size() != count) bad(path, "parameter count mismatch");
    std::string bytes(count * 8, '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) bad(path, "truncated parameter data");
    std::span<double> v = params.values();
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
      }
      v[i] = std::bit_cast<double>(bits);
    }
    return Checkpoint{std::move(params), std::move(vocab), max_props, seed, mode};
  } catch (const std::invalid_argument& e) {
    bad(path, e.what());
  } catch (const std::out_of_range& e) {
    bad(path, e.what());
  }
}

}  // namespace tlforge
