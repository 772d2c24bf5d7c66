#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xladapt/errors.hpp"
#include "xladapt/io.hpp"
#include "xladapt/utf8.hpp"

namespace xladapt::tokaudit {

struct Vocab {
  std::vector<std::string> tokens;
  size_t size() const { return tokens.size(); }
};

enum class VocabFormat { lines, json_map };

inline Vocab load_vocab(std::istream& in, VocabFormat format) {
  Vocab v;
  if (format == VocabFormat::lines) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      v.tokens.push_back(line);
    }
    // a trailing newline produces no extra empty token by construction
    return v;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("vocab json: parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw DataError("vocab json: expected an object mapping token to id");
  v.tokens.reserve(j.size());
  for (const auto& [token, id] : j.items()) v.tokens.push_back(token);
  return v;
}

inline Vocab load_vocab(const std::filesystem::path& path, VocabFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  return load_vocab(in, format);
}

struct AuditConfig {
  std::vector<std::string> strip_prefixes;  // subword continuation markers, applied once
  bool include_jamo = false;                // widen the rule to jamo blocks
};

// True iff non-empty and every codepoint is a composed Hangul syllable
// (U+AC00-U+D7A3); jamo blocks count only when include_jamo is set.
// Undecodable tokens classify false.
inline bool is_full_korean_token(std::string_view token, const AuditConfig& config = {}) {
  for (const auto& prefix : config.strip_prefixes) {
    if (!prefix.empty() && token.substr(0, prefix.size()) == prefix) {
      token.remove_prefix(prefix.size());
      break;
    }
  }
  if (token.empty()) return false;
  std::vector<uint32_t> cps;
  if (!utf8::decode(token, cps)) return false;
  for (uint32_t cp : cps) {
    if (utf8::is_hangul_syllable(cp)) continue;
    if (config.include_jamo && utf8::is_hangul_jamo(cp)) continue;
    return false;
  }
  return true;
}

struct CoverageReport {
  int64_t vocab_size = 0;
  int64_t korean_token_count = 0;
  int64_t undecodable_count = 0;
  double korean_token_pct = 0.0;  // 100 * count / size, full precision
};

inline CoverageReport coverage_report(const Vocab& vocab, const AuditConfig& config = {}) {
  if (vocab.tokens.empty()) throw DataError("coverage_report: empty vocab");
  CoverageReport r;
  r.vocab_size = static_cast<int64_t>(vocab.size());
  std::vector<uint32_t> scratch;
  for (const auto& token : vocab.tokens) {
    if (!utf8::decode(token, scratch)) ++r.undecodable_count;
    if (is_full_korean_token(token, config)) ++r.korean_token_count;
  }
  r.korean_token_pct =
      100.0 * static_cast<double>(r.korean_token_count) / static_cast<double>(r.vocab_size);
  return r;
}

inline void write_coverage_csv(std::ostream& os, std::string_view model,
                               const CoverageReport& r) {
  io::csv_row(os, {"model", "vocab_size", "korean_token_count", "korean_token_pct"});
  io::csv_row(os, {model, std::to_string(r.vocab_size), std::to_string(r.korean_token_count),
                   io::fmt_fixed(r.korean_token_pct, 2)});
}

}  // namespace xladapt::tokaudit
