#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "xladapt/corpus.hpp"

using namespace xladapt;
using corpus::Document;
using corpus::Lang;
using corpus::SourceDomain;

namespace {

Document make_doc(std::string id, Lang lang, SourceDomain dom, std::string text,
                  std::optional<int64_t> tokens = std::nullopt) {
  Document d;
  d.id = std::move(id);
  d.lang = lang;
  d.source_domain = dom;
  d.token_count = tokens ? *tokens
                         : static_cast<int64_t>(corpus::whitespace_token_count(text));
  d.text = std::move(text);
  return d;
}

std::string repeat_tokens(const std::string& unit, int copies) {
  std::string out;
  for (int i = 0; i < copies; ++i) {
    if (!out.empty()) out += ' ';
    out += unit;
  }
  return out;
}

}  // namespace

TEST_CASE("whitespace_token_count splits on any whitespace run") {
  CHECK(corpus::whitespace_token_count("") == 0);
  CHECK(corpus::whitespace_token_count("   \t\n") == 0);
  CHECK(corpus::whitespace_token_count("one") == 1);
  CHECK(corpus::whitespace_token_count("a b\t\tc\nd") == 4);
  CHECK(corpus::whitespace_token_count(" lead and trail ") == 3);
}

TEST_CASE("names round trip through their string forms") {
  CHECK(corpus::lang_from_string("ko") == Lang::ko);
  CHECK(corpus::lang_from_string("en") == Lang::en);
  CHECK_FALSE(corpus::lang_from_string("jp").has_value());
  for (auto d : corpus::kAllDomains) CHECK(corpus::domain_from_string(to_string(d)) == d);
  CHECK_FALSE(corpus::domain_from_string("blog").has_value());
  CHECK(corpus::other_lang(Lang::ko) == Lang::en);
  CHECK(corpus::other_lang(Lang::en) == Lang::ko);
}

TEST_CASE("load_documents parses jsonl and computes token_count when absent") {
  std::istringstream in(
      R"({"id":"a","lang":"ko","source_domain":"news","text":"하나 둘 셋"})"
      "\n\n"
      R"({"id":"b","lang":"en","source_domain":"legal","text":"one two","token_count":99})"
      "\n");
  auto docs = corpus::load_documents(in, corpus::InputFormat::jsonl);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "a");
  CHECK(docs[0].lang == Lang::ko);
  CHECK(docs[0].source_domain == SourceDomain::news);
  CHECK(docs[0].token_count == 3);
  CHECK(docs[1].token_count == 99);  // taken from the record, not recomputed
}

TEST_CASE("load_documents names the failing record") {
  auto load = [](const std::string& body) {
    std::istringstream in(body);
    return corpus::load_documents(in, corpus::InputFormat::jsonl);
  };
  const std::string good =
      R"({"id":"a","lang":"ko","source_domain":"news","text":"하나 둘"})";

  CHECK_THROWS_WITH(load(good + "\n\nnot json\n"),
                    Catch::Matchers::StartsWith("record 3: invalid JSON"));
  CHECK_THROWS_WITH(load(R"({"id":"a","lang":"ko","source_domain":"news"})"),
                    Catch::Matchers::ContainsSubstring("missing required field 'text'"));
  CHECK_THROWS_WITH(load(R"({"id":"a","lang":"xx","source_domain":"news","text":"t"})"),
                    Catch::Matchers::ContainsSubstring("unknown lang 'xx'"));
  CHECK_THROWS_WITH(load(R"({"id":"a","lang":"ko","source_domain":"blog","text":"t"})"),
                    Catch::Matchers::ContainsSubstring("unknown source_domain 'blog'"));
  CHECK_THROWS_WITH(load(R"({"id":"a","lang":"ko","source_domain":"news","text":"  "})"),
                    Catch::Matchers::ContainsSubstring("record 1: empty text"));
  CHECK_THROWS_WITH(
      load(R"({"id":"a","lang":"ko","source_domain":"news","text":"t","token_count":1.5})"),
      Catch::Matchers::ContainsSubstring("token_count must be an integer"));
  CHECK_THROWS_WITH(load("{\"id\":\"a\",\"lang\":\"ko\",\"source_domain\":\"news\",\"text\":\"\xff\"}"),
                    Catch::Matchers::ContainsSubstring("invalid UTF-8"));
}

TEST_CASE("load_documents reads tsv via its header row") {
  std::istringstream in(
      "text\tid\tlang\tsource_domain\ttoken_count\n"
      "the filing text\tx1\ten\tdisclosure\t\n"
      "두 번째 문서\tx2\tko\tresearch_report\t7\n");
  auto docs = corpus::load_documents(in, corpus::InputFormat::tsv);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "x1");
  CHECK(docs[0].token_count == 3);
  CHECK(docs[1].source_domain == SourceDomain::research_report);
  CHECK(docs[1].token_count == 7);
}

TEST_CASE("tsv errors name the header or record") {
  {
    std::istringstream in("id\tlang\tsource_domain\n");
    CHECK_THROWS_WITH(corpus::load_documents(in, corpus::InputFormat::tsv),
                      Catch::Matchers::ContainsSubstring("tsv header missing column 'text'"));
  }
  {
    std::istringstream in("id\tlang\tsource_domain\ttext\na\tko\tnews\n");
    CHECK_THROWS_WITH(corpus::load_documents(in, corpus::InputFormat::tsv),
                      Catch::Matchers::ContainsSubstring("record 2: expected 4 columns, got 3"));
  }
}

TEST_CASE("documents round trip through jsonl") {
  std::vector<Document> docs{
      make_doc("r1", Lang::ko, SourceDomain::disclosure, "예정 완료 이익"),
      make_doc("r2", Lang::en, SourceDomain::legal, "shall comply with \"rules\", always", 42),
  };
  std::ostringstream os;
  corpus::write_jsonl(os, docs);
  std::istringstream in(os.str());
  auto back = corpus::load_documents(in, corpus::InputFormat::jsonl);
  REQUIRE(back.size() == docs.size());
  for (size_t i = 0; i < docs.size(); ++i) {
    CHECK(back[i].id == docs[i].id);
    CHECK(back[i].lang == docs[i].lang);
    CHECK(back[i].source_domain == docs[i].source_domain);
    CHECK(back[i].text == docs[i].text);
    CHECK(back[i].token_count == docs[i].token_count);
  }
}

TEST_CASE("html_marker_ratio measures tag spans and entities") {
  CHECK(corpus::html_marker_ratio("") == 0.0);
  CHECK(corpus::html_marker_ratio("plain text") == 0.0);
  CHECK(corpus::html_marker_ratio("<b>x</b>") == Catch::Approx(7.0 / 8.0));
  CHECK(corpus::html_marker_ratio("x &amp; y") == Catch::Approx(5.0 / 9.0));
  CHECK(corpus::html_marker_ratio("a < b") == 0.0);          // unterminated span
  CHECK(corpus::html_marker_ratio("&abcdefghijk;") == 0.0);  // entity body too long
  CHECK(corpus::html_marker_ratio("&abcdefghij;") == 1.0);   // ten chars still counts
}

TEST_CASE("typo_char_ratio counts non-prose codepoints") {
  CHECK(corpus::typo_char_ratio("Hello, 금융 시장 123. naïve-quote “ok”") == 0.0);
  CHECK(corpus::typo_char_ratio("a\x01z") == Catch::Approx(1.0 / 3.0));
  CHECK(corpus::typo_char_ratio("a×z") == Catch::Approx(1.0 / 3.0));  // multiplication sign
  CHECK(corpus::typo_char_ratio("ㄱㄴ") == 1.0);                      // bare jamo
}

TEST_CASE("filter_document keeps the inclusive token bounds") {
  corpus::FilterConfig config;
  auto doc_with = [&](int64_t tokens) {
    return make_doc("d", Lang::en, SourceDomain::news, "clean text", tokens);
  };
  CHECK_FALSE(corpus::filter_document(doc_with(127), config).keep);
  CHECK(corpus::filter_document(doc_with(128), config).keep);
  CHECK(corpus::filter_document(doc_with(4096), config).keep);
  CHECK_FALSE(corpus::filter_document(doc_with(4097), config).keep);
  CHECK(corpus::filter_document(doc_with(127), config).reason == corpus::DropReason::length);
}

TEST_CASE("drop reason is the first failing rule") {
  corpus::FilterConfig config;
  // Fails length and html markers at once: length wins.
  auto both = make_doc("d", Lang::en, SourceDomain::news, "<b>tiny</b>", 5);
  auto v = corpus::filter_document(both, config);
  REQUIRE_FALSE(v.keep);
  CHECK(v.reason == corpus::DropReason::length);

  auto html = make_doc("h", Lang::en, SourceDomain::news,
                       repeat_tokens("see <b>bold</b> text", 50));
  REQUIRE(html.token_count >= config.min_tokens);
  v = corpus::filter_document(html, config);
  REQUIRE_FALSE(v.keep);
  CHECK(v.reason == corpus::DropReason::html_markers);

  auto typo = make_doc("t", Lang::en, SourceDomain::news,
                       repeat_tokens("data \x01\x02 row", 50));
  REQUIRE(typo.token_count >= config.min_tokens);
  v = corpus::filter_document(typo, config);
  REQUIRE_FALSE(v.keep);
  CHECK(v.reason == corpus::DropReason::typo_chars);
}

TEST_CASE("filter_corpus splits kept stats from drop reasons") {
  corpus::FilterConfig config;
  std::vector<Document> docs{
      make_doc("k1", Lang::ko, SourceDomain::news, "깨끗한 문서", 200),
      make_doc("k2", Lang::en, SourceDomain::legal, "clean doc", 300),
      make_doc("d1", Lang::en, SourceDomain::news, "too short", 5),
      make_doc("d2", Lang::en, SourceDomain::news, repeat_tokens("see <b>bold</b> text", 50)),
  };
  auto out = corpus::filter_corpus(docs, config);
  REQUIRE(out.kept.size() == 2);
  CHECK(out.kept[0].id == "k1");
  CHECK(out.stats.total == 2);
  CHECK(out.stats.per_class.at(SourceDomain::news) == 1);
  CHECK(out.stats.per_class.at(SourceDomain::legal) == 1);
  CHECK(out.stats.per_lang.at(Lang::ko) == 1);
  CHECK(out.stats.per_lang.at(Lang::en) == 1);
  CHECK(out.stats.dropped_by_reason.at("length") == 1);
  CHECK(out.stats.dropped_by_reason.at("html_markers") == 1);
}

TEST_CASE("balance_by_class downsamples every class to the smallest") {
  std::vector<Document> docs;
  auto add = [&docs](SourceDomain dom, int n) {
    for (int i = 0; i < n; ++i)
      docs.push_back(make_doc(to_string(dom) + "-" + std::to_string(i),
                              i % 2 ? Lang::en : Lang::ko, dom, "text", 200));
  };
  add(SourceDomain::news, 5);
  add(SourceDomain::disclosure, 3);
  add(SourceDomain::legal, 4);

  auto balanced = corpus::balance_by_class(docs, 17);
  auto stats = corpus::corpus_stats(balanced);
  REQUIRE(balanced.size() == 9);
  CHECK(stats.per_class.at(SourceDomain::news) == 3);
  CHECK(stats.per_class.at(SourceDomain::disclosure) == 3);
  CHECK(stats.per_class.at(SourceDomain::legal) == 3);

  // Survivors keep their relative input order.
  size_t cursor = 0;
  for (const auto& d : balanced) {
    while (cursor < docs.size() && docs[cursor].id != d.id) ++cursor;
    REQUIRE(cursor < docs.size());
    ++cursor;
  }

  auto again = corpus::balance_by_class(docs, 17);
  REQUIRE(again.size() == balanced.size());
  for (size_t i = 0; i < balanced.size(); ++i) CHECK(again[i].id == balanced[i].id);

  CHECK_THROWS_AS(corpus::balance_by_class({}, 17), DataError);
}

TEST_CASE("write_stats_csv emits metric,key,value rows") {
  corpus::CorpusStats s;
  s.total = 3;
  s.per_class[SourceDomain::news] = 2;
  s.per_class[SourceDomain::disclosure] = 1;
  s.per_lang[Lang::ko] = 1;
  s.per_lang[Lang::en] = 2;
  s.dropped_by_reason["length"] = 4;
  std::ostringstream os;
  corpus::write_stats_csv(os, s);
  CHECK(os.str() ==
        "metric,key,value\n"
        "total,,3\n"
        "per_class,news,2\n"
        "per_class,disclosure,1\n"
        "per_lang,ko,1\n"
        "per_lang,en,2\n"
        "dropped,length,4\n");
}
