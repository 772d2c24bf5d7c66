#pragma once

#include <atomic>
#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "xladapt/errors.hpp"
#include "xladapt/hash.hpp"
#include "xladapt/mining.hpp"
#include "xladapt/rng.hpp"
#include "xladapt/utf8.hpp"

namespace xladapt::mocks {

// Korean -> English financial lexicon shared by the mock translator and the
// mock judge's canonicalizer. One English word per Korean word.
inline const std::vector<std::pair<std::string, std::string>>& ko_en_dictionary() {
  static const std::vector<std::pair<std::string, std::string>> dict = {
      // intensity / tone
      {"상당한", "significant"},
      {"완만한", "modest"},
      {"강한", "strong"},
      {"약한", "weak"},
      // plans
      {"예정", "planned"},
      {"취소", "canceled"},
      {"완료", "completed"},
      {"중단", "suspended"},
      // time
      {"오늘", "today"},
      {"어제", "yesterday"},
      {"현재", "current"},
      {"과거", "former"},
      // scope
      {"종목", "stock"},
      {"경제", "economy"},
      {"개별", "individual"},
      {"전체", "aggregate"},
      // stance
      {"발표", "reported"},
      {"전망", "predicted"},
      {"확정", "confirmed"},
      {"추측", "speculated"},
      // register
      {"유동성", "liquidity"},
      {"현금", "cash"},
      {"변동성", "volatility"},
      {"출렁임", "swings"},
      // deontic
      {"의무", "obligation"},
      {"권고", "recommendation"},
      {"허용", "permitted"},
      {"금지", "prohibited"},
      // sanctions
      {"부과", "imposed"},
      {"면제", "waived"},
      {"과징금", "penalty"},
      {"경고", "warning"},
      // procedure
      {"즉시", "immediately"},
      {"순차", "gradually"},
      {"서면", "written"},
      {"구두", "verbal"},
      // paraphrase vocabulary
      {"회사", "company"},
      {"기업", "firm"},
      {"이익", "profit"},
      {"수익", "revenue"},
      {"상승", "rose"},
      {"오름", "climbed"},
      // general fillers
      {"시장", "market"},
      {"은행", "bank"},
      {"금리", "interest"},
      {"투자", "investment"},
      {"자산", "assets"},
      {"부채", "debt"},
      {"매출", "sales"},
      {"비용", "costs"},
      {"성장", "growth"},
      {"증가", "increase"},
      {"감소", "decrease"},
      {"보고서", "report"},
      {"공시", "filing"},
      {"규제", "regulation"},
      {"계약", "contract"},
      {"법원", "court"},
      {"판결", "ruling"},
      {"위험", "risk"},
      {"채권", "bond"},
      {"배당", "dividend"},
      {"실적", "results"},
      {"이사회", "board"},
      {"주주", "shareholder"},
      {"분석", "analysis"},
      {"목표", "target"},
      {"연간", "annual"},
      {"분기", "quarter"},
  };
  return dict;
}

namespace detail {

inline const std::unordered_map<std::string_view, std::string_view>& ko_to_en() {
  static const auto map = [] {
    std::unordered_map<std::string_view, std::string_view> m;
    for (const auto& [ko, en] : ko_en_dictionary()) m.emplace(ko, en);
    return m;
  }();
  return map;
}

inline const std::unordered_map<std::string_view, std::string_view>& en_to_ko() {
  static const auto map = [] {
    std::unordered_map<std::string_view, std::string_view> m;
    for (const auto& [ko, en] : ko_en_dictionary()) m.emplace(en, ko);
    return m;
  }();
  return map;
}

// Synonyms the canonicalizer collapses; pairs absent here stay distinct so a
// paraphrase perturbs the judge's trigram overlap.
inline const std::unordered_map<std::string_view, std::string_view>& en_canon_collapse() {
  static const std::unordered_map<std::string_view, std::string_view> m = {{"firm", "company"}};
  return m;
}

inline constexpr std::string_view kPunct = ".,;:!?()[]\"'%";

struct TokenParts {
  std::string_view pre, core, post;
};

inline TokenParts split_punct(std::string_view tok) {
  size_t b = 0, e = tok.size();
  while (b < e && kPunct.find(tok[b]) != std::string_view::npos) ++b;
  while (e > b && kPunct.find(tok[e - 1]) != std::string_view::npos) --e;
  return {tok.substr(0, b), tok.substr(b, e - b), tok.substr(e)};
}

template <typename PerToken>
inline void for_each_token(std::string_view text, PerToken&& fn) {
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) fn(text.substr(i, j - i));
    i = j;
  }
}

inline std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
  return out;
}

// Per-token word swaps; punctuation stuck to a token is preserved. Tokens are
// rejoined with single spaces, so callers must treat "no swaps" as unchanged
// rather than comparing strings.
struct SwapResult {
  std::string text;
  size_t changes = 0;
};

inline SwapResult apply_swaps(std::string_view text,
                              const std::vector<std::pair<std::string_view, std::string_view>>& table) {
  SwapResult out;
  for_each_token(text, [&](std::string_view tok) {
    auto parts = split_punct(tok);
    std::string_view core = parts.core;
    for (const auto& [from, to] : table) {
      if (core == from) {
        core = to;
        ++out.changes;
        break;
      }
    }
    if (!out.text.empty()) out.text += ' ';
    out.text.append(parts.pre);
    out.text.append(core);
    out.text.append(parts.post);
  });
  return out;
}

inline bool contains_hangul(std::string_view text) {
  for (uint32_t cp : utf8::decode_lenient(text))
    if (utf8::is_hangul_syllable(cp)) return true;
  return false;
}

inline bool contains_digit(std::string_view text) {
  for (char c : text)
    if (c >= '0' && c <= '9') return true;
  return false;
}

// Lowercase, strip punctuation, map Korean words through the dictionary,
// collapse canonical synonyms. Both sides of a translation pair canonicalize
// to the same string.
inline std::string canonicalize(std::string_view text) {
  std::string out;
  for_each_token(text, [&](std::string_view tok) {
    auto parts = split_punct(tok);
    if (parts.core.empty()) return;
    std::string core = lowercase_ascii(parts.core);
    if (auto it = ko_to_en().find(core); it != ko_to_en().end()) core = std::string(it->second);
    if (auto it = en_canon_collapse().find(core); it != en_canon_collapse().end())
      core = std::string(it->second);
    if (!out.empty()) out += ' ';
    out += core;
  });
  return out;
}

inline std::unordered_set<std::string> char_trigrams(std::string_view s) {
  std::unordered_set<std::string> grams;
  if (s.size() < 3) {
    grams.emplace(s);
    return grams;
  }
  for (size_t i = 0; i + 3 <= s.size(); ++i) grams.emplace(s.substr(i, 3));
  return grams;
}

inline double jaccard(const std::unordered_set<std::string>& a,
                      const std::unordered_set<std::string>& b) {
  size_t inter = 0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& g : small)
    if (large.count(g)) ++inter;
  size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline double trigram_jaccard(std::string_view source, std::string_view candidate) {
  return jaccard(char_trigrams(canonicalize(source)), char_trigrams(canonicalize(candidate)));
}

using SwapTable = std::vector<std::pair<std::string_view, std::string_view>>;

inline const SwapTable& negative_swaps(std::string_view pattern_id) {
  static const std::unordered_map<std::string_view, SwapTable> tables = {
      {"temporal_variation",
       {{"today", "yesterday"}, {"current", "former"}, {"오늘", "어제"}, {"현재", "과거"}}},
      {"micro_vs_macro_analysis",
       {{"stock", "economy"}, {"individual", "aggregate"}, {"종목", "경제"}, {"개별", "전체"}}},
      {"facts_vs_opinions",
       {{"reported", "predicted"}, {"confirmed", "speculated"}, {"발표", "전망"}, {"확정", "추측"}}},
      {"financial_jargon_vs_everyday_language",
       {{"liquidity", "cash"}, {"volatility", "swings"}, {"유동성", "현금"}, {"변동성", "출렁임"}}},
      {"intensified_sentiment",
       {{"significant", "modest"}, {"strong", "weak"}, {"상당한", "완만한"}, {"강한", "약한"}}},
      {"elaborated_details", {}},
      {"plan_realization",
       {{"planned", "canceled"}, {"completed", "suspended"}, {"예정", "취소"}, {"완료", "중단"}}},
      {"emerging_situations", {}},
      {"legal_interpretation_shifts",
       {{"obligation", "recommendation"},
        {"permitted", "prohibited"},
        {"의무", "권고"},
        {"허용", "금지"}}},
      {"shifts_in_sanction_application",
       {{"imposed", "waived"}, {"penalty", "warning"}, {"부과", "면제"}, {"과징금", "경고"}}},
      {"procedural_clarifications",
       {{"immediately", "gradually"}, {"written", "verbal"}, {"즉시", "순차"}, {"서면", "구두"}}},
  };
  static const SwapTable empty;
  auto it = tables.find(pattern_id);
  return it == tables.end() ? empty : it->second;
}

inline const SwapTable& paraphrase_swaps() {
  static const SwapTable table = {
      {"company", "firm"},   {"profit", "earnings"}, {"rose", "climbed"},
      {"회사", "기업"},      {"이익", "수익"},       {"상승", "오름"},
  };
  return table;
}

inline constexpr std::string_view kEmergingClauseKo = "한편 돌발 변수가 전반에 새로 부상했다";
inline constexpr std::string_view kEmergingClauseEn =
    "meanwhile an unforeseen development newly reshaped conditions";

inline bool pattern_applies(std::string_view pattern_id, std::string_view text) {
  if (pattern_id == "emerging_situations") return true;
  if (pattern_id == "elaborated_details") return contains_digit(text);
  bool found = false;
  const auto& table = negative_swaps(pattern_id);
  for_each_token(text, [&](std::string_view tok) {
    auto core = split_punct(tok).core;
    for (const auto& [from, to] : table)
      if (core == from) found = true;
  });
  return found;
}

// nullopt when the pattern's transform leaves the text unchanged.
inline std::optional<std::string> transform_negative(std::string_view pattern_id,
                                                     std::string_view text) {
  if (pattern_id == "elaborated_details") {
    if (!contains_digit(text)) return std::nullopt;
    std::string out(text);
    for (char& c : out)
      if (c >= '0' && c <= '9') c = static_cast<char>('0' + (c - '0' + 4) % 10);
    return out;
  }
  auto swapped = apply_swaps(text, negative_swaps(pattern_id));
  if (pattern_id == "emerging_situations") {
    swapped.text += ' ';
    swapped.text += contains_hangul(text) ? kEmergingClauseKo : kEmergingClauseEn;
    return std::move(swapped.text);
  }
  if (swapped.changes == 0) return std::nullopt;
  return std::move(swapped.text);
}

inline std::string translate(std::string_view text, corpus::Lang lang_source) {
  const auto& dict = lang_source == corpus::Lang::ko ? ko_to_en() : en_to_ko();
  std::string out;
  for_each_token(text, [&](std::string_view tok) {
    auto parts = split_punct(tok);
    std::string_view core = parts.core;
    if (auto it = dict.find(core); it != dict.end()) core = it->second;
    if (!out.empty()) out += ' ';
    out.append(parts.pre);
    out.append(core);
    out.append(parts.post);
  });
  return out;
}

}  // namespace detail

struct MockGenerationOptions {
  uint64_t seed = 0;
  double tag_keep_rate = 1.0;    // per-(text, pattern) deterministic thinning
  bool tag_all_catalog = false;  // return every catalog id regardless of fit
  bool add_bogus_tag = false;    // append an id that is not in the catalog
  bool echo_negatives = false;   // return the source verbatim
  bool refuse_negatives = false;
  int fail_first_n_calls = 0;  // transient fault injection
};

class MockGenerationClient final : public mining::GenerationClient {
 public:
  explicit MockGenerationClient(MockGenerationOptions options = {})
      : options_(options), fail_remaining_(options.fail_first_n_calls) {}

  std::vector<std::string> tag_axes(const std::string& text,
                                    std::span<const typology::ShiftPattern> candidates) override {
    maybe_fail();
    std::vector<std::string> tags;
    if (options_.tag_all_catalog) {
      for (const auto& p : typology::pattern_catalog()) tags.push_back(p.id);
    } else {
      for (const auto& p : candidates) {
        if (!detail::pattern_applies(p.id, text)) continue;
        if (options_.tag_keep_rate < 1.0) {
          rng::Rng r(rng::derive(rng::derive(options_.seed, "tag-keep"),
                                 hash::fnv1a64(text + "|" + p.id)));
          if (r.next_double() >= options_.tag_keep_rate) continue;
        }
        tags.push_back(p.id);
      }
    }
    if (options_.add_bogus_tag) tags.push_back("weather_forecast");
    return tags;
  }

  std::optional<std::string> make_negative(const std::string& text,
                                           const typology::ShiftPattern& pattern) override {
    maybe_fail();
    if (options_.refuse_negatives) return std::nullopt;
    if (options_.echo_negatives) return text;
    return detail::transform_negative(pattern.id, text);
  }

  std::string make_positive(const std::string& text, mining::PositiveMode mode,
                            corpus::Lang lang_source) override {
    maybe_fail();
    if (mode == mining::PositiveMode::translation) return detail::translate(text, lang_source);
    return detail::apply_swaps(text, detail::paraphrase_swaps()).text;
  }

 private:
  void maybe_fail() {
    if (fail_remaining_.fetch_sub(1, std::memory_order_relaxed) > 0)
      throw ClientTransientError("synthetic transient fault");
  }

  MockGenerationOptions options_;
  std::atomic<int64_t> fail_remaining_;
};

struct MockJudgeOptions {
  std::optional<double> fixed_negative_score;  // may be out of range, for error tests
  std::optional<double> fixed_positive_score;
  int fail_first_n_calls = 0;
};

// Scores by trigram Jaccard over dictionary-canonicalized text. Positives:
// 10*J. Negatives: a tent that peaks at 10 for moderate overlap (the
// lexically-similar band [0.3, 0.8]) and falls to 0 at J=0 and J=1.
class MockJudgeClient final : public mining::JudgeClient {
 public:
  explicit MockJudgeClient(MockJudgeOptions options = {})
      : options_(options), fail_remaining_(options.fail_first_n_calls) {}

  double score(mining::PairKind kind, const std::string& source,
               const std::string& candidate) override {
    if (fail_remaining_.fetch_sub(1, std::memory_order_relaxed) > 0)
      throw ClientTransientError("synthetic transient fault");
    if (kind == mining::PairKind::negative && options_.fixed_negative_score)
      return *options_.fixed_negative_score;
    if (kind == mining::PairKind::positive && options_.fixed_positive_score)
      return *options_.fixed_positive_score;
    double j = detail::trigram_jaccard(source, candidate);
    if (kind == mining::PairKind::positive) return 10.0 * j;
    if (j <= 0.3) return 10.0 * (j / 0.3);
    if (j <= 0.8) return 10.0;
    return 10.0 * (1.0 - j) / 0.2;
  }

 private:
  MockJudgeOptions options_;
  std::atomic<int64_t> fail_remaining_;
};

}  // namespace xladapt::mocks
