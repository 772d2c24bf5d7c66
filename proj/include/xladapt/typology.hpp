#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "xladapt/corpus.hpp"
#include "xladapt/errors.hpp"

namespace xladapt::typology {

enum class ShiftAxis {
  temporal_variation,
  perspectival_framing,
  structural_formality,
  rule_based_semantics,
};

inline std::string to_string(ShiftAxis a) {
  switch (a) {
    case ShiftAxis::temporal_variation: return "temporal_variation";
    case ShiftAxis::perspectival_framing: return "perspectival_framing";
    case ShiftAxis::structural_formality: return "structural_formality";
    case ShiftAxis::rule_based_semantics: return "rule_based_semantics";
  }
  return "?";
}

// One catalog entry. description is the guidance string handed to the
// generation client when crafting a hard negative for this pattern.
struct ShiftPattern {
  std::string id;
  ShiftAxis axis;
  corpus::SourceDomain source_domain;
  std::string description;
};

// The closed pattern catalog: 1 news, 3 research-report, 4 disclosure and
// 3 legal patterns. Ids are frozen; downstream triplet files depend on them.
inline const std::vector<ShiftPattern>& pattern_catalog() {
  using D = corpus::SourceDomain;
  using A = ShiftAxis;
  static const std::vector<ShiftPattern> catalog = {
      {"temporal_variation", A::temporal_variation, D::news,
       "Shift the time frame of the event so the same facts read as a different stage of the "
       "market cycle."},
      {"micro_vs_macro_analysis", A::perspectival_framing, D::research_report,
       "Swap company-level specifics for sector- or economy-wide framing, or the reverse."},
      {"facts_vs_opinions", A::perspectival_framing, D::research_report,
       "Recast reported figures as analyst judgment, or judgment as established fact."},
      {"financial_jargon_vs_everyday_language", A::perspectival_framing, D::research_report,
       "Replace domain jargon with everyday wording whose ordinary sense diverges from the "
       "technical one."},
      {"intensified_sentiment", A::structural_formality, D::disclosure,
       "Dial the tone of a disclosed result up or down while keeping the surrounding wording."},
      {"elaborated_details", A::structural_formality, D::disclosure,
       "Alter supporting details or figures so the narrative changes while the sentence frame "
       "stays put."},
      {"plan_realization", A::structural_formality, D::disclosure,
       "Flip the status of a forward-looking statement between planned, completed and "
       "withdrawn."},
      {"emerging_situations", A::structural_formality, D::disclosure,
       "Introduce new external circumstances that reframe the disclosed fact."},
      {"legal_interpretation_shifts", A::rule_based_semantics, D::legal,
       "Resolve an ambiguous legal term in a different direction, changing the obligation it "
       "creates."},
      {"shifts_in_sanction_application", A::rule_based_semantics, D::legal,
       "Change how a penalty is computed or to whom it applies."},
      {"procedural_clarifications", A::rule_based_semantics, D::legal,
       "Modify a procedural step or deadline so the compliance burden changes."},
  };
  return catalog;
}

inline const ShiftPattern* find_pattern(std::string_view id) {
  for (const auto& p : pattern_catalog()) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

// Catalog subset for one document type, in catalog order.
inline std::vector<ShiftPattern> patterns_for_source(corpus::SourceDomain domain) {
  std::vector<ShiftPattern> out;
  for (const auto& p : pattern_catalog()) {
    if (p.source_domain == domain) out.push_back(p);
  }
  return out;
}

inline std::vector<ShiftPattern> patterns_for_source(std::string_view domain) {
  auto d = corpus::domain_from_string(domain);
  if (!d) throw DataError("unknown source_domain '" + std::string(domain) + "'");
  return patterns_for_source(*d);
}

struct ValidatedTags {
  std::vector<std::string> tags;  // order-preserving, deduplicated
  size_t filtered_out = 0;        // unknown ids or ids for another domain
};

// Keeps the tags that exist in the catalog and belong to the document's own
// source domain; invalid tags are counted, never an error.
inline ValidatedTags validate_axis_tags(std::span<const std::string> tags,
                                        corpus::SourceDomain domain) {
  ValidatedTags out;
  std::unordered_set<std::string_view> seen;
  for (const auto& tag : tags) {
    if (seen.count(tag)) continue;
    seen.insert(tag);
    const ShiftPattern* p = find_pattern(tag);
    if (p != nullptr && p->source_domain == domain) {
      out.tags.push_back(tag);
    } else {
      ++out.filtered_out;
    }
  }
  return out;
}

// JSON export used for prompt templating.
inline nlohmann::json catalog_json() {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pattern_catalog()) {
    arr.push_back({{"id", p.id},
                   {"axis", to_string(p.axis)},
                   {"source_domain", corpus::to_string(p.source_domain)},
                   {"description", p.description}});
  }
  return arr;
}

}  // namespace xladapt::typology
