#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xladapt/corpus.hpp"
#include "xladapt/errors.hpp"

namespace xladapt::mining {

enum class PositiveMode { paraphrase, translation };

inline std::string to_string(PositiveMode m) {
  return m == PositiveMode::paraphrase ? "paraphrase" : "translation";
}

inline std::optional<PositiveMode> positive_mode_from_string(std::string_view s) {
  if (s == "paraphrase") return PositiveMode::paraphrase;
  if (s == "translation") return PositiveMode::translation;
  return std::nullopt;
}

// One supervised contrastive training unit. Scores are the judge scores the
// pair was accepted with; translation positives carry the flipped language.
struct Triplet {
  std::string source;
  std::string positive;
  std::string negative;
  std::string pattern_id;
  PositiveMode positive_mode = PositiveMode::paraphrase;
  double neg_score = 0.0;
  double pos_score = 0.0;
  corpus::Lang lang_source = corpus::Lang::ko;
  corpus::Lang lang_positive = corpus::Lang::ko;
};

inline nlohmann::json to_json(const Triplet& t) {
  return nlohmann::json{{"source", t.source},
                        {"positive", t.positive},
                        {"negative", t.negative},
                        {"pattern_id", t.pattern_id},
                        {"positive_mode", to_string(t.positive_mode)},
                        {"neg_score", t.neg_score},
                        {"pos_score", t.pos_score},
                        {"lang_source", corpus::to_string(t.lang_source)},
                        {"lang_positive", corpus::to_string(t.lang_positive)}};
}

inline void write_triplets(std::ostream& os, const std::vector<Triplet>& triplets) {
  for (const auto& t : triplets) os << to_json(t).dump() << '\n';
}

// Structural validation only: texts non-empty and pairwise distinct, scores
// in [0,10], translation positives in the other language. Threshold floors
// are a mining-time property, not re-checked here.
inline std::vector<Triplet> read_triplets(std::istream& in) {
  std::vector<Triplet> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (corpus::trim(line).empty()) continue;
    auto where = [&] { return "triplet " + std::to_string(line_no) + ": "; };
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError(where() + "invalid JSON");
    Triplet t;
    for (const char* key : {"source", "positive", "negative", "pattern_id", "positive_mode",
                            "neg_score", "pos_score", "lang_source", "lang_positive"}) {
      if (!j.contains(key)) throw DataError(where() + "missing field '" + key + "'");
    }
    t.source = j["source"].get<std::string>();
    t.positive = j["positive"].get<std::string>();
    t.negative = j["negative"].get<std::string>();
    t.pattern_id = j["pattern_id"].get<std::string>();
    auto mode = positive_mode_from_string(j["positive_mode"].get<std::string>());
    if (!mode) throw DataError(where() + "unknown positive_mode");
    t.positive_mode = *mode;
    t.neg_score = j["neg_score"].get<double>();
    t.pos_score = j["pos_score"].get<double>();
    auto ls = corpus::lang_from_string(j["lang_source"].get<std::string>());
    auto lp = corpus::lang_from_string(j["lang_positive"].get<std::string>());
    if (!ls || !lp) throw DataError(where() + "unknown language code");
    t.lang_source = *ls;
    t.lang_positive = *lp;

    if (t.source.empty() || t.positive.empty() || t.negative.empty())
      throw DataError(where() + "empty text");
    if (t.source == t.positive || t.source == t.negative || t.positive == t.negative)
      throw DataError(where() + "texts must be pairwise distinct");
    if (t.neg_score < 0 || t.neg_score > 10 || t.pos_score < 0 || t.pos_score > 10)
      throw DataError(where() + "scores must lie in [0,10]");
    if (t.positive_mode == PositiveMode::translation && t.lang_positive == t.lang_source)
      throw DataError(where() + "translation positive must flip the language");
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<Triplet> read_triplets(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  return read_triplets(in);
}

}  // namespace xladapt::mining
