#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xladapt/corpus.hpp"
#include "xladapt/evalsts.hpp"
#include "xladapt/mock_clients.hpp"
#include "xladapt/rng.hpp"
#include "xladapt/tokaudit.hpp"
#include "xladapt/triplet.hpp"
#include "xladapt/typology.hpp"
#include "xladapt/utf8.hpp"

namespace xladapt::fixtures {

// Base sentences tuned so that, for every pattern of the domain, the mock
// negative transform perturbs enough of the trigram set to land in the
// judge's acceptance band, and the mock paraphrase touches only the
// canon-collapsed company/firm pair (so positives score 10).
inline const std::string& tuned_source_text(corpus::SourceDomain domain, corpus::Lang lang) {
  using D = corpus::SourceDomain;
  static const std::string news_en =
      "today the current market mood lifted company shares as 4205 desks tracked the broad index";
  static const std::string news_ko =
      "오늘 현재 시장 흐름 이 회사 지수 를 4205 거래 창구 와 함께 끌어올렸다";
  static const std::string disclosure_en =
      "the company posted significant gains and strong margins, completed the planned buyback, "
      "and booked 1204 5873 9067 in receipts";
  static const std::string disclosure_ko =
      "회사 는 상당한 실적 과 강한 마진 을 기록했고 예정 된 자사주 매입 을 완료 했으며 "
      "1204 5873 9067 의 수입 을 장부 에 올렸다";
  static const std::string report_en =
      "analysts reported that individual stock picks confirmed resilient liquidity even as "
      "volatility struck the company index";
  static const std::string report_ko =
      "연구진 은 개별 종목 선택 이 탄탄한 유동성 을 확정 했다고 발표 했으며 변동성 이 "
      "회사 지수 를 흔들었다";
  static const std::string legal_en =
      "the court imposed a penalty and ruled the obligation permitted under written terms must "
      "begin immediately for the company";
  static const std::string legal_ko =
      "법원 은 과징금 을 부과 했고 서면 조건 에서 허용 된 의무 는 회사 에 대해 즉시 시작 "
      "되어야 한다 고 판결 했다";
  bool ko = lang == corpus::Lang::ko;
  switch (domain) {
    case D::news: return ko ? news_ko : news_en;
    case D::disclosure: return ko ? disclosure_ko : disclosure_en;
    case D::research_report: return ko ? report_ko : report_en;
    case D::legal: return ko ? legal_ko : legal_en;
  }
  return news_en;
}

// Repetition adds almost no new trigrams, so the judge's view of a repeated
// sentence matches the single sentence while the token count grows.
inline std::string repeat_to_min_tokens(const std::string& base, size_t min_tokens) {
  size_t per = corpus::whitespace_token_count(base);
  std::string out = base;
  size_t total = per;
  while (total < min_tokens) {
    out += ' ';
    out += base;
    total += per;
  }
  return out;
}

// Clean documents that pass the default filters and accept at every mining
// stage; one triplet per (doc, domain pattern) with the default thresholds.
inline std::vector<corpus::Document> make_mining_corpus(size_t docs_per_domain,
                                                        size_t min_tokens = 132) {
  std::vector<corpus::Document> docs;
  for (auto domain : corpus::kAllDomains) {
    for (size_t i = 0; i < docs_per_domain; ++i) {
      corpus::Lang lang = i % 2 == 0 ? corpus::Lang::ko : corpus::Lang::en;
      corpus::Document d;
      d.id = corpus::to_string(domain) + "-" + corpus::to_string(lang) + "-" + std::to_string(i);
      d.lang = lang;
      d.source_domain = domain;
      d.text = repeat_to_min_tokens(tuned_source_text(domain, lang), min_tokens);
      d.token_count = static_cast<int64_t>(corpus::whitespace_token_count(d.text));
      docs.push_back(std::move(d));
    }
  }
  return docs;
}

// Korean filler words absent from the mock dictionary; sources built from the
// dictionary share no vocabulary with sentences built from these.
inline const std::vector<std::string>& vocab_b_ko() {
  static const std::vector<std::string> words = {
      "파도",   "하늘",   "구름",   "바람",   "노을",   "섬마을", "등대",   "항구",
      "모래",   "자갈",   "숲길",   "나무",   "이슬",   "안개",   "강변",   "계곡",
      "폭포",   "돌담",   "기와",   "처마",   "마루",   "창문",   "골목",   "지붕",
      "담장",   "우물",   "텃밭",   "들판",   "냇가",   "산봉",   "능선",   "바위",
      "동굴",   "해안",   "갯벌",   "갈대",   "억새",   "둔덕",   "언덕",   "노래",
  };
  return words;
}

// English fillers absent from the dictionary's English column.
inline const std::vector<std::string>& distractor_en() {
  static const std::vector<std::string> words = {
      "alpha",  "beta",   "gamma",  "delta",  "epsilon", "zeta",   "theta",  "iota",
      "kappa",  "lambda", "sigma",  "omega",  "north",   "south",  "east",   "west",
      "river",  "forest", "cloud",  "stone",  "valley",  "meadow", "harbor", "lantern",
      "pebble", "willow", "summit", "canyon", "prairie", "glacier", "dune",  "reef",
  };
  return words;
}

// Sources draw on the Korean dictionary column, positives are their exact
// dictionary translations, negatives draw on the disjoint filler pool.
inline std::vector<mining::Triplet> make_separable_triplets(size_t n, uint64_t seed) {
  const auto& dict = mocks::ko_en_dictionary();
  const auto& pool_b = vocab_b_ko();
  const auto& catalog = typology::pattern_catalog();
  rng::Rng r(rng::derive(seed, "separable-triplets"));
  std::vector<mining::Triplet> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    size_t len = 8 + r.below(5);
    std::string source, negative;
    for (size_t k = 0; k < len; ++k) {
      if (k) {
        source += ' ';
        negative += ' ';
      }
      source += dict[r.below(dict.size())].first;
      negative += pool_b[r.below(pool_b.size())];
    }
    mining::Triplet t;
    t.source = std::move(source);
    t.positive = mocks::detail::translate(t.source, corpus::Lang::ko);
    t.negative = std::move(negative);
    t.pattern_id = catalog[i % catalog.size()].id;
    t.positive_mode = mining::PositiveMode::translation;
    t.neg_score = 8.5;
    t.pos_score = 9.5;
    t.lang_source = corpus::Lang::ko;
    t.lang_positive = corpus::Lang::en;
    out.push_back(std::move(t));
  }
  return out;
}

// Korean/English pairs whose gold score is the fraction of the Korean
// sentence actually translated on the English side; the rest is distractor
// vocabulary. An encoder aligned across the dictionary ranks these correctly.
inline std::vector<evalsts::StsPair> make_alignment_sts(size_t n, uint64_t seed) {
  const auto& dict = mocks::ko_en_dictionary();
  const auto& fillers = distractor_en();
  rng::Rng r(rng::derive(seed, "alignment-sts"));
  constexpr size_t kLen = 8;
  std::vector<evalsts::StsPair> pairs;
  pairs.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    size_t k = i % (kLen + 1);
    std::vector<size_t> words(kLen);
    for (auto& w : words) w = r.below(dict.size());
    evalsts::StsPair p;
    for (size_t j = 0; j < kLen; ++j) {
      if (j) {
        p.sentence1 += ' ';
        p.sentence2 += ' ';
      }
      p.sentence1 += dict[words[j]].first;
      p.sentence2 += j < k ? dict[words[j]].second : fillers[r.below(fillers.size())];
    }
    p.gold = 5.0 * static_cast<double>(k) / static_cast<double>(kLen);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

// 1,991 pairs: subdomains {news 355, disclosure 500, research_report 421,
// legal 715}; gold multiset {0 x809, 0.5 x14, 1 x1168} giving mean 0.5902 and
// population std 0.4900.
inline std::vector<evalsts::StsPair> make_table2_sts() {
  struct Block {
    corpus::SourceDomain domain;
    size_t count;
  };
  static const Block blocks[] = {
      {corpus::SourceDomain::news, 355},
      {corpus::SourceDomain::disclosure, 500},
      {corpus::SourceDomain::research_report, 421},
      {corpus::SourceDomain::legal, 715},
  };
  std::vector<evalsts::StsPair> pairs;
  pairs.reserve(1991);
  size_t idx = 0;
  for (const auto& block : blocks) {
    for (size_t i = 0; i < block.count; ++i, ++idx) {
      evalsts::StsPair p;
      p.sentence1 = "기준 지표 문장 " + std::to_string(idx);
      p.sentence2 = "비교 지표 문장 " + std::to_string(idx);
      p.gold = idx < 809 ? 0.0 : (idx < 823 ? 0.5 : 1.0);
      p.subdomain = block.domain;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

// Synthetic vocabulary with an exact full-Korean-token count; the remainder
// is ASCII.
inline tokaudit::Vocab make_vocab(size_t total, size_t korean) {
  tokaudit::Vocab v;
  v.tokens.reserve(total);
  for (size_t i = 0; i < korean; ++i) {
    std::string tok;
    utf8::append_codepoint(tok, 0xAC00 + static_cast<uint32_t>(i % 11172));
    utf8::append_codepoint(tok, 0xAC00 + static_cast<uint32_t>((i / 11172 + i + 1) % 11172));
    v.tokens.push_back(std::move(tok));
  }
  for (size_t i = korean; i < total; ++i) v.tokens.push_back("tok" + std::to_string(i));
  return v;
}

// Disclosure documents with graded filler padding: the plan-realization and
// paraphrase perturbations shrink relative to the text, so judge scores for
// both negatives and paraphrase positives sweep across the scale.
inline std::vector<corpus::Document> make_threshold_sweep_corpus(size_t max_fillers) {
  std::vector<corpus::Document> docs;
  const auto& ko_fill = vocab_b_ko();
  const auto& en_fill = distractor_en();
  for (size_t k = 0; k <= max_fillers; ++k) {
    corpus::Document en;
    en.id = "sweep-en-" + std::to_string(k);
    en.lang = corpus::Lang::en;
    en.source_domain = corpus::SourceDomain::disclosure;
    en.text = "planned completed profit company";
    for (size_t j = 0; j < k; ++j) en.text += ' ' + en_fill[(k + j) % en_fill.size()];
    en.token_count = static_cast<int64_t>(corpus::whitespace_token_count(en.text));
    docs.push_back(std::move(en));

    corpus::Document ko;
    ko.id = "sweep-ko-" + std::to_string(k);
    ko.lang = corpus::Lang::ko;
    ko.source_domain = corpus::SourceDomain::disclosure;
    ko.text = "예정 완료 이익 회사";
    for (size_t j = 0; j < k; ++j) ko.text += ' ' + ko_fill[(k + 2 * j) % ko_fill.size()];
    ko.token_count = static_cast<int64_t>(corpus::whitespace_token_count(ko.text));
    docs.push_back(std::move(ko));
  }
  return docs;
}

}  // namespace xladapt::fixtures
