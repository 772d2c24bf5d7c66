#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xladapt/corpus.hpp"
#include "xladapt/encoder.hpp"
#include "xladapt/errors.hpp"
#include "xladapt/utf8.hpp"

namespace xladapt::evalsts {

inline constexpr const char* kSuiteFinSts = "FinSTS";
inline constexpr const char* kSuiteKorFinSts = "KorFinSTS";
inline constexpr const char* kSuiteSts = "STS";
inline constexpr const char* kSuiteKorSts = "KorSTS";

struct StsPair {
  std::string sentence1;
  std::string sentence2;
  double gold = 0.0;  // 0-5 scale
  std::optional<corpus::SourceDomain> subdomain;
};

namespace detail {

inline void validate_pair(const StsPair& p, size_t record) {
  auto where = [record] { return "record " + std::to_string(record) + ": "; };
  if (corpus::trim(p.sentence1).empty() || corpus::trim(p.sentence2).empty())
    throw DataError(where() + "empty sentence");
  if (!std::isfinite(p.gold) || p.gold < 0.0 || p.gold > 5.0)
    throw DataError(where() + "gold score outside [0,5]");
}

inline double parse_score(const std::string& s, size_t record) {
  size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &consumed);
  } catch (const std::exception&) {
    throw DataError("record " + std::to_string(record) + ": unparsable score \"" + s + "\"");
  }
  if (consumed != s.size())
    throw DataError("record " + std::to_string(record) + ": unparsable score \"" + s + "\"");
  return v;
}

inline std::optional<corpus::SourceDomain> parse_subdomain(const std::string& s, size_t record) {
  if (s.empty()) return std::nullopt;
  auto dom = corpus::domain_from_string(s);
  if (!dom)
    throw DataError("record " + std::to_string(record) + ": unknown subdomain \"" + s + "\"");
  return dom;
}

}  // namespace detail

enum class StsFormat { tsv, jsonl };

inline std::vector<StsPair> load_sts(std::istream& in, StsFormat format) {
  std::vector<StsPair> pairs;
  std::string line;
  size_t record = 0;

  if (format == StsFormat::tsv) {
    if (!std::getline(in, line)) return pairs;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      std::string col;
      while (std::getline(ss, col, '\t')) header.push_back(col);
    }
    auto col_of = [&header](std::string_view name) -> std::optional<size_t> {
      for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
      return std::nullopt;
    };
    auto c1 = col_of("sentence1"), c2 = col_of("sentence2"), cs = col_of("score");
    auto cd = col_of("subdomain");
    if (!c1 || !c2 || !cs)
      throw DataError("sts tsv: header must name sentence1, sentence2, score");
    while (std::getline(in, line)) {
      ++record;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!utf8::is_valid(line))
        throw DataError("record " + std::to_string(record) + ": invalid UTF-8");
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, '\t')) cells.push_back(cell);
      cells.resize(header.size());
      StsPair p;
      p.sentence1 = cells[*c1];
      p.sentence2 = cells[*c2];
      p.gold = detail::parse_score(cells[*cs], record);
      if (cd) p.subdomain = detail::parse_subdomain(cells[*cd], record);
      detail::validate_pair(p, record);
      pairs.push_back(std::move(p));
    }
    return pairs;
  }

  while (std::getline(in, line)) {
    ++record;
    if (corpus::trim(line).empty()) continue;
    if (!utf8::is_valid(line))
      throw DataError("record " + std::to_string(record) + ": invalid UTF-8");
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw DataError("record " + std::to_string(record) + ": invalid JSON");
    for (const char* key : {"sentence1", "sentence2", "score"})
      if (!j.contains(key))
        throw DataError("record " + std::to_string(record) + ": missing field \"" + key + "\"");
    if (!j["sentence1"].is_string() || !j["sentence2"].is_string() ||
        !j["score"].is_number())
      throw DataError("record " + std::to_string(record) + ": wrong field type");
    StsPair p;
    p.sentence1 = j["sentence1"].get<std::string>();
    p.sentence2 = j["sentence2"].get<std::string>();
    p.gold = j["score"].get<double>();
    if (j.contains("subdomain") && !j["subdomain"].is_null()) {
      if (!j["subdomain"].is_string())
        throw DataError("record " + std::to_string(record) + ": wrong field type");
      p.subdomain = detail::parse_subdomain(j["subdomain"].get<std::string>(), record);
    }
    detail::validate_pair(p, record);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline std::vector<StsPair> load_sts(const std::filesystem::path& path, StsFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  return load_sts(in, format);
}

// Fractional (average) ranks, 1-based: ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  const size_t n = xs.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&xs](size_t a, size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("pearson: length mismatch");
  const size_t n = xs.size();
  if (n < 2) throw DataError("pearson: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw DataError("pearson: constant input (correlation undefined)");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DataError("spearman_rho: length mismatch");
  if (xs.size() < 2) throw DataError("spearman_rho: need at least 2 points");
  auto constant = [](std::span<const double> v) {
    for (double x : v)
      if (x != v[0]) return false;
    return true;
  };
  if (constant(xs) || constant(ys))
    throw DataError("spearman_rho: constant input (rho undefined)");
  auto rx = average_ranks(xs);
  auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

struct EvalResult {
  std::string suite;
  double spearman = 0.0;
  double pearson = 0.0;
  int64_t n_pairs = 0;
};

inline EvalResult evaluate_sts(const std::vector<StsPair>& pairs,
                               const encoder::EncoderParams& params,
                               std::string suite = {}) {
  if (pairs.size() < 2) throw DataError("evaluate_sts: need at least 2 pairs");
  std::vector<double> preds, golds;
  preds.reserve(pairs.size());
  golds.reserve(pairs.size());
  for (const auto& p : pairs) {
    preds.push_back(
        encoder::cosine(encoder::encode(p.sentence1, params), encoder::encode(p.sentence2, params)));
    golds.push_back(p.gold);
  }
  EvalResult r;
  r.suite = std::move(suite);
  r.spearman = spearman_rho(preds, golds);
  r.pearson = pearson(preds, golds);
  r.n_pairs = static_cast<int64_t>(pairs.size());
  return r;
}

struct BenchmarkStats {
  int64_t total = 0;
  std::map<std::string, int64_t> per_subdomain;  // pairs without one count as "unspecified"
  double avg_tokens_s1 = 0.0;                    // whitespace tokens
  double avg_tokens_s2 = 0.0;
  int64_t vocab_size = 0;  // unique whitespace tokens across both sides
  double gold_mean = 0.0;
  double gold_std = 0.0;  // population
  bool empty = true;
};

inline BenchmarkStats benchmark_stats(const std::vector<StsPair>& pairs) {
  BenchmarkStats s;
  s.total = static_cast<int64_t>(pairs.size());
  s.empty = pairs.empty();
  if (s.empty) return s;

  std::set<std::string> vocab;
  double tok1 = 0.0, tok2 = 0.0, sum = 0.0, sum_sq = 0.0;
  auto collect = [&vocab](const std::string& text) {
    std::stringstream ss(text);
    std::string tok;
    size_t count = 0;
    while (ss >> tok) {
      vocab.insert(tok);
      ++count;
    }
    return count;
  };
  for (const auto& p : pairs) {
    tok1 += static_cast<double>(collect(p.sentence1));
    tok2 += static_cast<double>(collect(p.sentence2));
    std::string key = p.subdomain ? corpus::to_string(*p.subdomain) : "unspecified";
    ++s.per_subdomain[key];
    sum += p.gold;
    sum_sq += p.gold * p.gold;
  }
  const double n = static_cast<double>(pairs.size());
  s.avg_tokens_s1 = tok1 / n;
  s.avg_tokens_s2 = tok2 / n;
  s.vocab_size = static_cast<int64_t>(vocab.size());
  s.gold_mean = sum / n;
  double var = std::max(0.0, sum_sq / n - s.gold_mean * s.gold_mean);
  s.gold_std = std::sqrt(var);
  return s;
}

struct DeltaReport {
  std::map<std::string, double> before;
  std::map<std::string, double> after;
  std::map<std::string, double> delta;  // suites present on both sides
  double mean_delta = 0.0;              // (delta FinSTS + delta KorFinSTS) / 2
};

inline DeltaReport delta_report(const std::map<std::string, double>& before,
                                const std::map<std::string, double>& after) {
  for (const char* suite : {kSuiteFinSts, kSuiteKorFinSts}) {
    if (!before.count(suite) || !after.count(suite))
      throw DataError("delta_report: missing suite " + std::string(suite));
  }
  DeltaReport r;
  r.before = before;
  r.after = after;
  for (const auto& [suite, b] : before) {
    auto it = after.find(suite);
    if (it != after.end()) r.delta[suite] = it->second - b;
  }
  r.mean_delta = (r.delta.at(kSuiteFinSts) + r.delta.at(kSuiteKorFinSts)) / 2.0;
  return r;
}

}  // namespace xladapt::evalsts
