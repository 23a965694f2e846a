/*!
 * \file corpus_io.cpp
 */
#include "tlforge/corpus_io.hpp"

#include <fstream>
#include "json.hpp"

namespace tlforge {

using ojson = nlohmann::ordered_json;

namespace {

const TlVocab& wide_vocab() {
  static const TlVocab v(kMaxSupportedProps);
  return v;
}

template <typename T>
T field(const ojson& j, const char* name) {
  if (!j.contains(name)) throw std::runtime_error(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error(std::string("bad type for field '") + name + "'");
  }
}

}  // namespace

std::string to_jsonl_line(const LiftedExample& ex) {
  ojson j;
  j["nl"] = ex.nl();
  j["tokens"] = ex.tokens;
  j["labels"] = ex.labels;
  j["lifted_nl"] = ex.lifted_nl;
  ojson ap = ojson::object();
  for (const auto& [id, text] : ex.ap_map) ap[std::to_string(id)] = text;
  j["ap_map"] = std::move(ap);
  j["lifted_tl"] = render(ex.lifted_tl, TextStyle::kAscii);
  j["grounded_tl"] = ex.grounded_tl;
  j["domain"] = ex.domain;
  return j.dump();
}

LiftedExample from_jsonl_line(const std::string& line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("record is not a JSON object");
  LiftedExample ex;
  ex.tokens = field<std::vector<std::string>>(j, "tokens");
  ex.labels = field<std::vector<int>>(j, "labels");
  ex.lifted_nl = field<std::string>(j, "lifted_nl");
  if (!j.contains("ap_map") || !j["ap_map"].is_object()) {
    throw std::runtime_error("missing field 'ap_map'");
  }
  for (const auto& [key, value] : j["ap_map"].items()) {
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw std::runtime_error("bad ap_map key '" + key + "'");
    }
    if (!value.is_string()) throw std::runtime_error("bad type for ap_map entry '" + key + "'");
    ex.ap_map[id] = value.get<std::string>();
  }
  const auto tl = field<std::string>(j, "lifted_tl");
  try {
    ex.lifted_tl = parse_formula(tl, wide_vocab());
  } catch (const FormulaError& e) {
    throw std::runtime_error("unparseable lifted_tl '" + tl + "': " + e.what());
  }
  ex.grounded_tl = field<std::string>(j, "grounded_tl");
  ex.domain = j.contains("domain") ? field<std::string>(j, "domain") : std::string();
  if (j.contains("nl") && field<std::string>(j, "nl") != ex.nl()) {
    throw std::runtime_error("field 'nl' disagrees with 'tokens'");
  }
  return ex;
}

void write_jsonl(const std::string& path, std::span<const LiftedExample> corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const auto& ex : corpus) out << to_jsonl_line(ex) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<LiftedExample> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<LiftedExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_jsonl_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string check_record(const LiftedExample& ex) {
  LiftResult lr;
  try {
    lr = lift(ex.tokens, ex.labels);
  } catch (const LiftError& e) {
    return e.what();
  }
  if (lr.lifted_nl != ex.lifted_nl) return "lifted_nl does not match lift(tokens, labels)";
  if (lr.ap_map != ex.ap_map) return "ap_map does not match lift(tokens, labels)";
  for (int p : ex.lifted_tl.props_in_order()) {
    if (!ex.ap_map.contains(p)) return "MissingAP: prop_" + std::to_string(p) + " has no AP";
  }
  try {
    const Formula g = parse_formula(ex.grounded_tl, wide_vocab(), grounding_atoms(ex.ap_map));
    if (!ast_equal(g, ex.lifted_tl)) return "grounded_tl does not ground lifted_tl";
  } catch (const std::exception& e) {
    return std::string("unparseable grounded_tl: ") + e.what();
  }
  return {};
}

}  // namespace tlforge
