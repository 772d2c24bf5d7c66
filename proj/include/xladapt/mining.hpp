#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "xladapt/corpus.hpp"
#include "xladapt/errors.hpp"
#include "xladapt/rng.hpp"
#include "xladapt/triplet.hpp"
#include "xladapt/typology.hpp"
#include "xladapt/utf8.hpp"

namespace xladapt::mining {

// Implementations must be callable from several threads at once; mine_triplets
// issues up to max_inflight requests concurrently. Throw ClientTransientError
// for retryable faults and ClientError for terminal ones.
class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual std::vector<std::string> tag_axes(const std::string& text,
                                            std::span<const typology::ShiftPattern> candidates) = 0;
  // nullopt = refusal: no lexically-similar divergent variant can be crafted.
  virtual std::optional<std::string> make_negative(const std::string& text,
                                                   const typology::ShiftPattern& pattern) = 0;
  virtual std::string make_positive(const std::string& text, PositiveMode mode,
                                    corpus::Lang lang_source) = 0;
};

enum class PairKind { negative, positive };

inline std::string to_string(PairKind k) {
  return k == PairKind::negative ? "negative" : "positive";
}

class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual double score(PairKind kind, const std::string& source, const std::string& candidate) = 0;
};

struct MiningConfig {
  double neg_threshold = 8.0;
  double pos_threshold = 9.0;
  double positive_mode_ratio = 0.5;  // fraction of translation positives
  int max_inflight = 4;
  int retry_limit = 3;  // total attempts per client call
  double backoff_base_ms = 0.0;
  uint64_t seed = 0;
};

inline void validate_config(const MiningConfig& c) {
  if (c.neg_threshold < 0.0 || c.neg_threshold > 10.0)
    throw ConfigError("mining: neg_threshold must be in [0,10]");
  if (c.pos_threshold < 0.0 || c.pos_threshold > 10.0)
    throw ConfigError("mining: pos_threshold must be in [0,10]");
  if (c.positive_mode_ratio < 0.0 || c.positive_mode_ratio > 1.0)
    throw ConfigError("mining: positive_mode_ratio must be in [0,1]");
  if (c.max_inflight < 1) throw ConfigError("mining: max_inflight must be >= 1");
  if (c.retry_limit < 1) throw ConfigError("mining: retry_limit must be >= 1");
  if (c.backoff_base_ms < 0.0) throw ConfigError("mining: backoff_base_ms must be >= 0");
}

// Exponential backoff with seeded jitter: 2^(attempt-1) * base * [0.5, 1.0).
inline double backoff_delay_ms(int attempt, double base_ms, rng::Rng& jitter) {
  return std::ldexp(base_ms, attempt - 1) * (0.5 + 0.5 * jitter.next_double());
}

// Runs fn, retrying transient failures up to retry_limit total attempts.
template <typename F>
auto with_retries(F&& fn, int retry_limit, uint64_t jitter_seed, double backoff_base_ms)
    -> decltype(fn()) {
  rng::Rng jitter(jitter_seed);
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const ClientTransientError& e) {
      if (attempt >= retry_limit)
        throw ClientError("retries exhausted after " + std::to_string(retry_limit) +
                          " attempts: " + e.what());
      double delay = backoff_delay_ms(attempt, backoff_base_ms, jitter);
      if (delay > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
    }
  }
}

namespace detail {

inline uint64_t retry_seed(const MiningConfig& config, std::string_view call_tag) {
  return rng::derive(rng::derive(config.seed, "retry"), call_tag);
}

// First 32 codepoints, for error messages.
inline std::string excerpt(std::string_view text) {
  std::vector<size_t> offsets;
  auto cps = utf8::decode_lenient_with_offsets(text, offsets);
  if (cps.size() <= 32) return std::string(text);
  return std::string(text.substr(0, offsets[32])) + "...";
}

}  // namespace detail

struct MiningStats {
  uint64_t docs_in = 0;
  uint64_t tags_returned = 0;
  uint64_t tags_invalid = 0;
  uint64_t tags_valid = 0;
  uint64_t neg_candidates_in = 0;  // == tags_valid
  uint64_t neg_skipped_refusal = 0;
  uint64_t neg_skipped_degenerate = 0;
  uint64_t neg_generated = 0;
  uint64_t neg_accepted = 0;
  uint64_t neg_rejected = 0;
  uint64_t pos_candidates_in = 0;  // == neg_accepted
  uint64_t pos_skipped_degenerate = 0;
  uint64_t pos_generated = 0;
  uint64_t pos_accepted = 0;
  uint64_t pos_rejected = 0;
  uint64_t positives_paraphrase = 0;
  uint64_t positives_translation = 0;
  uint64_t triplets_emitted = 0;  // == pos_accepted

  MiningStats& operator+=(const MiningStats& o) {
    docs_in += o.docs_in;
    tags_returned += o.tags_returned;
    tags_invalid += o.tags_invalid;
    tags_valid += o.tags_valid;
    neg_candidates_in += o.neg_candidates_in;
    neg_skipped_refusal += o.neg_skipped_refusal;
    neg_skipped_degenerate += o.neg_skipped_degenerate;
    neg_generated += o.neg_generated;
    neg_accepted += o.neg_accepted;
    neg_rejected += o.neg_rejected;
    pos_candidates_in += o.pos_candidates_in;
    pos_skipped_degenerate += o.pos_skipped_degenerate;
    pos_generated += o.pos_generated;
    pos_accepted += o.pos_accepted;
    pos_rejected += o.pos_rejected;
    positives_paraphrase += o.positives_paraphrase;
    positives_translation += o.positives_translation;
    triplets_emitted += o.triplets_emitted;
    return *this;
  }
};

// Step 1: tag, then keep only catalog ids matching the document's domain.
inline std::vector<std::string> identify_axes(const corpus::Document& doc, GenerationClient& gen,
                                              const MiningConfig& config = {}) {
  auto candidates = typology::patterns_for_source(doc.source_domain);
  auto raw = with_retries([&] { return gen.tag_axes(doc.text, candidates); }, config.retry_limit,
                          detail::retry_seed(config, "tag|" + doc.id), config.backoff_base_ms);
  return typology::validate_axis_tags(raw, doc.source_domain).tags;
}

struct NegativeOutcome {
  enum class Kind { candidate, skipped_refusal, skipped_degenerate };
  Kind kind = Kind::skipped_refusal;
  std::string text;  // set only for candidate
};

// Step 2: refusal and verbatim echo both count as skips, not errors.
inline NegativeOutcome generate_negative(const std::string& source,
                                         const typology::ShiftPattern& pattern,
                                         GenerationClient& gen, const MiningConfig& config = {}) {
  auto candidate =
      with_retries([&] { return gen.make_negative(source, pattern); }, config.retry_limit,
                   detail::retry_seed(config, "negative|" + pattern.id + "|" + source),
                   config.backoff_base_ms);
  if (!candidate) return {NegativeOutcome::Kind::skipped_refusal, {}};
  if (*candidate == source) return {NegativeOutcome::Kind::skipped_degenerate, {}};
  return {NegativeOutcome::Kind::candidate, std::move(*candidate)};
}

struct JudgeOutcome {
  bool accepted = false;
  double score = 0.0;
};

// Steps 3 and 4's gate: accept iff score >= threshold (inclusive).
inline JudgeOutcome judge_pair(PairKind kind, const std::string& source,
                               const std::string& candidate, JudgeClient& judge,
                               double threshold) {
  double s = judge.score(kind, source, candidate);
  if (!std::isfinite(s) || s < 0.0 || s > 10.0)
    throw DataError("judge returned out-of-range score " + std::to_string(s) + " for " +
                    to_string(kind) + " pair (source=\"" + detail::excerpt(source) +
                    "\", candidate=\"" + detail::excerpt(candidate) + "\")");
  return {s >= threshold, s};
}

struct PositiveOutcome {
  std::string text;
  corpus::Lang lang_positive = corpus::Lang::ko;
};

// Step 4: paraphrase keeps the language; translation flips it.
inline PositiveOutcome generate_positive(const std::string& source, PositiveMode mode,
                                         corpus::Lang lang_source, GenerationClient& gen,
                                         const MiningConfig& config = {}) {
  auto text = with_retries([&] { return gen.make_positive(source, mode, lang_source); },
                           config.retry_limit,
                           detail::retry_seed(config, "positive|" + to_string(mode) + "|" + source),
                           config.backoff_base_ms);
  corpus::Lang lang =
      mode == PositiveMode::translation ? corpus::other_lang(lang_source) : lang_source;
  return {std::move(text), lang};
}

// Mode draw is keyed by (doc index, pattern index) so concurrency and skip
// patterns upstream cannot shift later draws.
inline PositiveMode choose_positive_mode(uint64_t seed, size_t doc_idx, size_t pattern_idx,
                                         double ratio) {
  rng::Rng r(rng::derive(rng::derive(seed, "positive-mode"),
                         (static_cast<uint64_t>(doc_idx) << 6) | static_cast<uint64_t>(pattern_idx)));
  return r.next_double() < ratio ? PositiveMode::translation : PositiveMode::paraphrase;
}

struct MineResult {
  std::vector<Triplet> triplets;
  MiningStats stats;
};

namespace detail {

struct DocOutcome {
  std::vector<Triplet> triplets;
  MiningStats stats;
};

inline DocOutcome mine_one_document(const corpus::Document& doc, size_t doc_idx,
                                    GenerationClient& gen, JudgeClient& judge,
                                    const MiningConfig& config) {
  DocOutcome out;
  out.stats.docs_in = 1;

  auto candidates = typology::patterns_for_source(doc.source_domain);
  auto raw = with_retries([&] { return gen.tag_axes(doc.text, candidates); }, config.retry_limit,
                          retry_seed(config, "tag|" + doc.id), config.backoff_base_ms);
  out.stats.tags_returned = raw.size();
  auto validated = typology::validate_axis_tags(raw, doc.source_domain);
  out.stats.tags_invalid = validated.filtered_out;
  out.stats.tags_valid = validated.tags.size();

  for (size_t ti = 0; ti < validated.tags.size(); ++ti) {
    const auto& tag = validated.tags[ti];
    const auto* pattern = typology::find_pattern(tag);
    ++out.stats.neg_candidates_in;

    auto neg = generate_negative(doc.text, *pattern, gen, config);
    if (neg.kind == NegativeOutcome::Kind::skipped_refusal) {
      ++out.stats.neg_skipped_refusal;
      continue;
    }
    if (neg.kind == NegativeOutcome::Kind::skipped_degenerate) {
      ++out.stats.neg_skipped_degenerate;
      continue;
    }
    ++out.stats.neg_generated;

    auto nj = with_retries(
        [&] { return judge_pair(PairKind::negative, doc.text, neg.text, judge, config.neg_threshold); },
        config.retry_limit, retry_seed(config, "judge-neg|" + doc.id + "|" + tag),
        config.backoff_base_ms);
    if (!nj.accepted) {
      ++out.stats.neg_rejected;
      continue;
    }
    ++out.stats.neg_accepted;
    ++out.stats.pos_candidates_in;

    PositiveMode mode = choose_positive_mode(config.seed, doc_idx, ti, config.positive_mode_ratio);
    if (mode == PositiveMode::translation)
      ++out.stats.positives_translation;
    else
      ++out.stats.positives_paraphrase;

    auto pos = generate_positive(doc.text, mode, doc.lang, gen, config);
    if (pos.text == doc.text || pos.text == neg.text || pos.text.empty()) {
      ++out.stats.pos_skipped_degenerate;
      continue;
    }
    ++out.stats.pos_generated;

    auto pj = with_retries(
        [&] { return judge_pair(PairKind::positive, doc.text, pos.text, judge, config.pos_threshold); },
        config.retry_limit, retry_seed(config, "judge-pos|" + doc.id + "|" + tag),
        config.backoff_base_ms);
    if (!pj.accepted) {
      ++out.stats.pos_rejected;
      continue;
    }
    ++out.stats.pos_accepted;

    Triplet t;
    t.source = doc.text;
    t.positive = pos.text;
    t.negative = neg.text;
    t.pattern_id = tag;
    t.positive_mode = mode;
    t.neg_score = nj.score;
    t.pos_score = pj.score;
    t.lang_source = doc.lang;
    t.lang_positive = pos.lang_positive;
    out.triplets.push_back(std::move(t));
    ++out.stats.triplets_emitted;
  }
  return out;
}

}  // namespace detail

// Full pipeline. Documents are processed as independent tasks with at most
// max_inflight outstanding; results are consumed in input order, so the
// output is byte-identical for any max_inflight.
inline MineResult mine_triplets(const std::vector<corpus::Document>& docs, GenerationClient& gen,
                                JudgeClient& judge, const MiningConfig& config) {
  validate_config(config);
  MineResult result;

  auto run_one = [&](size_t idx) -> detail::DocOutcome {
    try {
      return detail::mine_one_document(docs[idx], idx, gen, judge, config);
    } catch (const ClientError& e) {
      throw ClientError("document " + docs[idx].id + ": " + e.what());
    }
  };

  std::deque<std::future<detail::DocOutcome>> inflight;
  size_t next_launch = 0;
  const size_t window = static_cast<size_t>(config.max_inflight);
  for (size_t next_consume = 0; next_consume < docs.size(); ++next_consume) {
    while (next_launch < docs.size() && next_launch - next_consume < window) {
      inflight.push_back(
          std::async(window == 1 ? std::launch::deferred : std::launch::async, run_one,
                     next_launch));
      ++next_launch;
    }
    auto out = inflight.front().get();
    inflight.pop_front();
    result.stats += out.stats;
    for (auto& t : out.triplets) result.triplets.push_back(std::move(t));
  }
  return result;
}

}  // namespace xladapt::mining
