#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "xladapt/typology.hpp"

using namespace xladapt;
using corpus::SourceDomain;

TEST_CASE("the catalog holds eleven patterns partitioned by domain") {
  const auto& catalog = typology::pattern_catalog();
  REQUIRE(catalog.size() == 11);

  std::set<std::string> ids;
  for (const auto& p : catalog) {
    CHECK(ids.insert(p.id).second);  // unique ids
    CHECK_FALSE(p.description.empty());
  }

  CHECK(typology::patterns_for_source(SourceDomain::news).size() == 1);
  CHECK(typology::patterns_for_source(SourceDomain::research_report).size() == 3);
  CHECK(typology::patterns_for_source(SourceDomain::disclosure).size() == 4);
  CHECK(typology::patterns_for_source(SourceDomain::legal).size() == 3);

  // The four domain subsets partition the catalog.
  size_t total = 0;
  std::set<std::string> seen;
  for (auto dom : corpus::kAllDomains) {
    for (const auto& p : typology::patterns_for_source(dom)) {
      CHECK(seen.insert(p.id).second);
      CHECK(p.source_domain == dom);
      ++total;
    }
  }
  CHECK(total == catalog.size());
}

TEST_CASE("find_pattern resolves known ids and rejects unknown ones") {
  const auto* p = typology::find_pattern("temporal_variation");
  REQUIRE(p != nullptr);
  CHECK(p->axis == typology::ShiftAxis::temporal_variation);
  CHECK(p->source_domain == SourceDomain::news);
  CHECK(typology::find_pattern("weather_forecast") == nullptr);
}

TEST_CASE("patterns_for_source accepts domain names and keeps catalog order") {
  auto by_name = typology::patterns_for_source("disclosure");
  auto by_enum = typology::patterns_for_source(SourceDomain::disclosure);
  REQUIRE(by_name.size() == by_enum.size());
  for (size_t i = 0; i < by_name.size(); ++i) CHECK(by_name[i].id == by_enum[i].id);
  CHECK(by_name[0].id == "intensified_sentiment");
  CHECK_THROWS_AS(typology::patterns_for_source("tabloid"), DataError);
}

TEST_CASE("validate_axis_tags keeps in-domain catalog tags once") {
  std::vector<std::string> tags{"intensified_sentiment"};
  auto v = typology::validate_axis_tags(tags, SourceDomain::disclosure);
  CHECK(v.tags == std::vector<std::string>{"intensified_sentiment"});
  CHECK(v.filtered_out == 0);

  // Same tag on a news document: domain mismatch.
  v = typology::validate_axis_tags(tags, SourceDomain::news);
  CHECK(v.tags.empty());
  CHECK(v.filtered_out == 1);

  std::vector<std::string> dup{"plan_realization", "plan_realization", "emerging_situations"};
  v = typology::validate_axis_tags(dup, SourceDomain::disclosure);
  CHECK(v.tags == std::vector<std::string>{"plan_realization", "emerging_situations"});
  CHECK(v.filtered_out == 0);

  std::vector<std::string> mixed{"weather_forecast", "temporal_variation"};
  v = typology::validate_axis_tags(mixed, SourceDomain::news);
  CHECK(v.tags == std::vector<std::string>{"temporal_variation"});
  CHECK(v.filtered_out == 1);
}

TEST_CASE("validate_axis_tags is idempotent") {
  std::vector<std::string> tags{"legal_interpretation_shifts", "procedural_clarifications",
                                "intensified_sentiment", "legal_interpretation_shifts"};
  auto once = typology::validate_axis_tags(tags, SourceDomain::legal);
  auto twice = typology::validate_axis_tags(once.tags, SourceDomain::legal);
  CHECK(twice.tags == once.tags);
  CHECK(twice.filtered_out == 0);
}

TEST_CASE("catalog_json mirrors the catalog") {
  auto j = typology::catalog_json();
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 11);
  const auto& catalog = typology::pattern_catalog();
  for (size_t i = 0; i < catalog.size(); ++i) {
    CHECK(j[i].at("id") == catalog[i].id);
    CHECK(j[i].at("axis") == to_string(catalog[i].axis));
    CHECK(j[i].at("source_domain") == corpus::to_string(catalog[i].source_domain));
    CHECK(j[i].at("description") == catalog[i].description);
  }
}
