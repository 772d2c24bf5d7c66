#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xladapt/errors.hpp"
#include "xladapt/io.hpp"
#include "xladapt/rng.hpp"
#include "xladapt/utf8.hpp"

namespace xladapt::corpus {

enum class Lang { ko, en };
enum class SourceDomain { news, disclosure, research_report, legal };

inline constexpr SourceDomain kAllDomains[] = {SourceDomain::news, SourceDomain::disclosure,
                                               SourceDomain::research_report, SourceDomain::legal};

inline std::string to_string(Lang l) { return l == Lang::ko ? "ko" : "en"; }

inline std::string to_string(SourceDomain d) {
  switch (d) {
    case SourceDomain::news: return "news";
    case SourceDomain::disclosure: return "disclosure";
    case SourceDomain::research_report: return "research_report";
    case SourceDomain::legal: return "legal";
  }
  return "?";
}

inline std::optional<Lang> lang_from_string(std::string_view s) {
  if (s == "ko") return Lang::ko;
  if (s == "en") return Lang::en;
  return std::nullopt;
}

inline std::optional<SourceDomain> domain_from_string(std::string_view s) {
  if (s == "news") return SourceDomain::news;
  if (s == "disclosure") return SourceDomain::disclosure;
  if (s == "research_report") return SourceDomain::research_report;
  if (s == "legal") return SourceDomain::legal;
  return std::nullopt;
}

inline Lang other_lang(Lang l) { return l == Lang::ko ? Lang::en : Lang::ko; }

// One corpus record. token_count comes from the input record when present,
// otherwise it is the whitespace token count of text.
struct Document {
  std::string id;
  Lang lang = Lang::ko;
  SourceDomain source_domain = SourceDomain::news;
  std::string text;
  int64_t token_count = 0;
};

struct FilterConfig {
  int64_t min_tokens = 128;
  int64_t max_tokens = 4096;
  double max_html_marker_ratio = 0.02;
  double max_typo_char_ratio = 0.05;
  uint64_t seed = 0;
};

// First-failing rule, in fixed order.
enum class DropReason { length, html_markers, typo_chars };

inline std::string to_string(DropReason r) {
  switch (r) {
    case DropReason::length: return "length";
    case DropReason::html_markers: return "html_markers";
    case DropReason::typo_chars: return "typo_chars";
  }
  return "?";
}

struct FilterVerdict {
  bool keep = true;
  std::optional<DropReason> reason;
};

struct CorpusStats {
  size_t total = 0;
  std::map<SourceDomain, size_t> per_class;
  std::map<Lang, size_t> per_lang;
  std::map<std::string, size_t> dropped_by_reason;
};

enum class InputFormat { jsonl, tsv };

inline size_t whitespace_token_count(std::string_view text) {
  size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!ws && !in_token) ++n;
    in_token = !ws;
  }
  return n;
}

inline std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(b, e - b + 1));
}

namespace detail {

inline Document validate_record(std::string&& id, std::string&& lang_s, std::string&& domain_s,
                                std::string&& text, std::optional<int64_t> token_count,
                                size_t line_no) {
  auto where = [&] { return "record " + std::to_string(line_no) + ": "; };
  Document d;
  d.id = std::move(id);
  auto lang = lang_from_string(lang_s);
  if (!lang) throw DataError(where() + "unknown lang '" + lang_s + "'");
  d.lang = *lang;
  auto dom = domain_from_string(domain_s);
  if (!dom) throw DataError(where() + "unknown source_domain '" + domain_s + "'");
  d.source_domain = *dom;
  if (trim(text).empty()) throw DataError(where() + "empty text");
  d.text = std::move(text);
  d.token_count = token_count ? *token_count
                              : static_cast<int64_t>(whitespace_token_count(d.text));
  if (d.token_count < 1) throw DataError(where() + "token_count must be >= 1");
  return d;
}

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      out.emplace_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

// Reads documents in file order. Malformed records raise DataError naming the
// 1-based record index; nothing is skipped silently.
inline std::vector<Document> load_documents(std::istream& in, InputFormat format) {
  std::vector<Document> docs;
  std::string line;
  size_t line_no = 0;

  if (format == InputFormat::jsonl) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      auto where = [&] { return "record " + std::to_string(line_no) + ": "; };
      if (!utf8::is_valid(line)) throw DataError(where() + "invalid UTF-8");
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw DataError(where() + "invalid JSON");
      for (const char* key : {"id", "lang", "source_domain", "text"}) {
        if (!j.contains(key))
          throw DataError(where() + "missing required field '" + key + "'");
      }
      std::optional<int64_t> tc;
      if (j.contains("token_count")) {
        if (!j["token_count"].is_number_integer())
          throw DataError(where() + "token_count must be an integer");
        tc = j["token_count"].get<int64_t>();
      }
      if (!j["id"].is_string() || !j["lang"].is_string() || !j["source_domain"].is_string() ||
          !j["text"].is_string())
        throw DataError(where() + "id, lang, source_domain, text must be strings");
      docs.push_back(detail::validate_record(j["id"].get<std::string>(),
                                             j["lang"].get<std::string>(),
                                             j["source_domain"].get<std::string>(),
                                             j["text"].get<std::string>(), tc, line_no));
    }
    return docs;
  }

  // TSV: header row names the columns; text must not contain tabs.
  std::vector<std::string> header;
  std::map<std::string, size_t> col;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!utf8::is_valid(line))
      throw DataError("record " + std::to_string(line_no) + ": invalid UTF-8");
    auto fields = detail::split_tabs(line);
    if (!saw_header) {
      header = fields;
      for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
      for (const char* key : {"id", "lang", "source_domain", "text"}) {
        if (!col.count(key)) throw DataError(std::string("tsv header missing column '") + key + "'");
      }
      saw_header = true;
      continue;
    }
    auto where = [&] { return "record " + std::to_string(line_no) + ": "; };
    if (fields.size() != header.size())
      throw DataError(where() + "expected " + std::to_string(header.size()) + " columns, got " +
                      std::to_string(fields.size()));
    std::optional<int64_t> tc;
    if (col.count("token_count") && !fields[col["token_count"]].empty()) {
      try {
        tc = std::stoll(fields[col["token_count"]]);
      } catch (const std::exception&) {
        throw DataError(where() + "token_count must be an integer");
      }
    }
    docs.push_back(detail::validate_record(std::string(fields[col["id"]]),
                                           std::string(fields[col["lang"]]),
                                           std::string(fields[col["source_domain"]]),
                                           std::string(fields[col["text"]]), tc, line_no));
  }
  return docs;
}

inline std::vector<Document> load_documents(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  return load_documents(in, format);
}

// Fraction of codepoints covered by <...> spans or &...; entities.
inline double html_marker_ratio(std::string_view text) {
  auto cps = utf8::decode_lenient(text);
  if (cps.empty()) return 0.0;
  size_t marked = 0;
  for (size_t i = 0; i < cps.size();) {
    if (cps[i] == '<') {
      size_t j = i + 1;
      while (j < cps.size() && cps[j] != '>') ++j;
      if (j < cps.size()) {
        marked += j - i + 1;
        i = j + 1;
        continue;
      }
    } else if (cps[i] == '&') {
      size_t j = i + 1;
      size_t len = 0;
      while (j < cps.size() && len < 10) {
        uint32_t c = cps[j];
        bool entity_char = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                           (c >= '0' && c <= '9') || c == '#';
        if (!entity_char) break;
        ++j;
        ++len;
      }
      if (len > 0 && j < cps.size() && cps[j] == ';') {
        marked += j - i + 1;
        i = j + 1;
        continue;
      }
    }
    ++i;
  }
  return static_cast<double>(marked) / static_cast<double>(cps.size());
}

namespace detail {

// Characters considered ordinary prose: ASCII printable plus common
// whitespace, Latin letters with diacritics, common typographic punctuation,
// and composed Hangul syllables. Everything else (jamo fragments, control
// bytes, replacement chars, mojibake symbols) counts toward the typo ratio.
inline bool is_benign_char(uint32_t cp) {
  if (cp == '\t' || cp == '\n' || cp == '\r') return true;
  if (cp >= 0x20 && cp <= 0x7E) return true;
  if (cp >= 0xC0 && cp <= 0x17F && cp != 0xD7 && cp != 0xF7) return true;
  if (cp == 0xB7) return true;
  if (cp >= 0x2010 && cp <= 0x203A) return true;
  if (utf8::is_hangul_syllable(cp)) return true;
  return false;
}

}  // namespace detail

// Fraction of codepoints outside the benign character classes.
inline double typo_char_ratio(std::string_view text) {
  auto cps = utf8::decode_lenient(text);
  if (cps.empty()) return 0.0;
  size_t bad = 0;
  for (uint32_t cp : cps) {
    if (!detail::is_benign_char(cp)) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(cps.size());
}

// Pure; the reason is the first failing rule in the fixed order
// length -> html markers -> typo chars. Bounds are inclusive.
inline FilterVerdict filter_document(const Document& doc, const FilterConfig& config) {
  if (doc.token_count < config.min_tokens || doc.token_count > config.max_tokens)
    return {false, DropReason::length};
  if (html_marker_ratio(doc.text) > config.max_html_marker_ratio)
    return {false, DropReason::html_markers};
  if (typo_char_ratio(doc.text) > config.max_typo_char_ratio)
    return {false, DropReason::typo_chars};
  return {true, std::nullopt};
}

struct FilterOutcome {
  std::vector<Document> kept;
  CorpusStats stats;  // totals describe the kept set; dropped_by_reason the rest
};

inline CorpusStats corpus_stats(const std::vector<Document>& docs) {
  CorpusStats s;
  s.total = docs.size();
  for (const auto& d : docs) {
    ++s.per_class[d.source_domain];
    ++s.per_lang[d.lang];
  }
  return s;
}

inline FilterOutcome filter_corpus(const std::vector<Document>& docs, const FilterConfig& config) {
  FilterOutcome out;
  for (const auto& d : docs) {
    auto v = filter_document(d, config);
    if (v.keep) {
      out.kept.push_back(d);
    } else {
      ++out.stats.dropped_by_reason[to_string(*v.reason)];
    }
  }
  auto kept_stats = corpus_stats(out.kept);
  out.stats.total = kept_stats.total;
  out.stats.per_class = std::move(kept_stats.per_class);
  out.stats.per_lang = std::move(kept_stats.per_lang);
  return out;
}

// Down-samples every source_domain class to the smallest present class size.
// Selection is uniform without replacement per class; relative input order of
// the surviving documents is preserved.
inline std::vector<Document> balance_by_class(const std::vector<Document>& docs, uint64_t seed) {
  if (docs.empty()) throw DataError("balance_by_class: empty input");
  std::map<SourceDomain, std::vector<size_t>> by_class;
  for (size_t i = 0; i < docs.size(); ++i) by_class[docs[i].source_domain].push_back(i);
  size_t m = docs.size();
  for (const auto& [dom, idx] : by_class) m = std::min(m, idx.size());

  std::vector<size_t> selected;
  for (const auto& [dom, idx] : by_class) {
    rng::Rng r(rng::derive(seed, to_string(dom)));
    for (size_t pos : r.sample_indices(idx.size(), m)) selected.push_back(idx[pos]);
  }
  std::sort(selected.begin(), selected.end());
  std::vector<Document> out;
  out.reserve(selected.size());
  for (size_t i : selected) out.push_back(docs[i]);
  return out;
}

inline nlohmann::json to_json(const Document& d) {
  return nlohmann::json{{"id", d.id},
                        {"lang", to_string(d.lang)},
                        {"source_domain", to_string(d.source_domain)},
                        {"text", d.text},
                        {"token_count", d.token_count}};
}

inline void write_jsonl(std::ostream& os, const std::vector<Document>& docs) {
  for (const auto& d : docs) os << to_json(d).dump() << '\n';
}

// Stats report rows: metric,key,value.
inline void write_stats_csv(std::ostream& os, const CorpusStats& s) {
  io::csv_row(os, {"metric", "key", "value"});
  io::csv_row(os, {"total", "", std::to_string(s.total)});
  for (const auto& [k, v] : s.per_class)
    io::csv_row(os, {"per_class", to_string(k), std::to_string(v)});
  for (const auto& [k, v] : s.per_lang)
    io::csv_row(os, {"per_lang", to_string(k), std::to_string(v)});
  for (const auto& [k, v] : s.dropped_by_reason)
    io::csv_row(os, {"dropped", k, std::to_string(v)});
}

}  // namespace xladapt::corpus
