#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xladapt/corpus.hpp"
#include "xladapt/encoder.hpp"
#include "xladapt/errors.hpp"
#include "xladapt/evalsts.hpp"
#include "xladapt/hash.hpp"
#include "xladapt/io.hpp"
#include "xladapt/mining.hpp"
#include "xladapt/mock_clients.hpp"
#include "xladapt/rng.hpp"
#include "xladapt/tokaudit.hpp"
#include "xladapt/trainer.hpp"
#include "xladapt/triplet.hpp"

namespace xladapt::pipeline {

inline constexpr const char* kVersion = "0.1.0";

struct SuiteSpec {
  std::string name;
  std::string path;
  evalsts::StsFormat format = evalsts::StsFormat::tsv;
};

struct VocabSpec {
  std::string model;
  std::string path;
  tokaudit::VocabFormat format = tokaudit::VocabFormat::lines;
};

struct PipelineConfig {
  uint64_t seed = 0;
  std::string out_dir = "out";

  corpus::FilterConfig filter;
  std::string corpus_input_path;
  corpus::InputFormat corpus_input_format = corpus::InputFormat::jsonl;
  bool balance = true;

  mining::MiningConfig mining;
  std::string mining_input_path;  // defaults to <out_dir>/filtered.jsonl
  std::string client_kind = "mock";
  std::string client_base_url;
  std::string client_auth_env;
  std::string client_model;

  encoder::EncoderConfig enc;

  trainer::TrainConfig train;
  std::string triplets_path;  // defaults to <out_dir>/triplets.jsonl

  std::string model_name = "reference-encoder";
  std::vector<SuiteSpec> suites;
  std::string checkpoint_before;  // defaults to <out_dir>/encoder_before.bin
  std::string checkpoint_after;   // defaults to <out_dir>/encoder_after.bin

  std::vector<VocabSpec> vocabs;
  std::vector<std::string> strip_prefixes;
  bool include_jamo = false;

  uint64_t config_digest = 0;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& pointer) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed)
      if (key == a) known = true;
    if (!known) throw ConfigError("unknown key " + pointer + "/" + key);
  }
}

inline const json* maybe(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double get_number(const json& v, const std::string& pointer) {
  if (!v.is_number()) throw ConfigError(pointer + ": expected a number");
  return v.get<double>();
}

inline int64_t get_integer(const json& v, const std::string& pointer) {
  if (!v.is_number_integer()) throw ConfigError(pointer + ": expected an integer");
  return v.get<int64_t>();
}

inline uint64_t get_u64(const json& v, const std::string& pointer) {
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw ConfigError(pointer + ": expected an unsigned integer");
  auto i = v.get<int64_t>();
  if (v.is_number_integer() && !v.is_number_unsigned() && i < 0)
    throw ConfigError(pointer + ": expected an unsigned integer");
  return v.is_number_unsigned() ? v.get<uint64_t>() : static_cast<uint64_t>(i);
}

inline std::string get_string(const json& v, const std::string& pointer) {
  if (!v.is_string()) throw ConfigError(pointer + ": expected a string");
  return v.get<std::string>();
}

inline bool get_bool(const json& v, const std::string& pointer) {
  if (!v.is_boolean()) throw ConfigError(pointer + ": expected a boolean");
  return v.get<bool>();
}

}  // namespace detail

inline PipelineConfig parse_config_json(const nlohmann::json& root, uint64_t digest = 0) {
  using detail::get_bool;
  using detail::get_integer;
  using detail::get_number;
  using detail::get_string;
  using detail::get_u64;
  using detail::maybe;
  using detail::require_keys;

  if (!root.is_object()) throw ConfigError("config root: expected an object");
  require_keys(root, {"seed", "out_dir", "corpus", "mining", "encoder", "trainer", "eval",
                      "tokaudit"},
               "");
  PipelineConfig c;
  c.config_digest = digest;
  if (auto* v = maybe(root, "seed")) c.seed = get_u64(*v, "/seed");
  if (auto* v = maybe(root, "out_dir")) c.out_dir = get_string(*v, "/out_dir");

  if (auto* sec = maybe(root, "corpus")) {
    require_keys(*sec,
                 {"input_path", "input_format", "min_tokens", "max_tokens",
                  "max_html_marker_ratio", "max_typo_char_ratio", "balance"},
                 "/corpus");
    if (auto* v = maybe(*sec, "input_path")) c.corpus_input_path = get_string(*v, "/corpus/input_path");
    if (auto* v = maybe(*sec, "input_format")) {
      auto f = get_string(*v, "/corpus/input_format");
      if (f == "jsonl")
        c.corpus_input_format = corpus::InputFormat::jsonl;
      else if (f == "tsv")
        c.corpus_input_format = corpus::InputFormat::tsv;
      else
        throw ConfigError("/corpus/input_format: expected \"jsonl\" or \"tsv\"");
    }
    if (auto* v = maybe(*sec, "min_tokens")) c.filter.min_tokens = get_integer(*v, "/corpus/min_tokens");
    if (auto* v = maybe(*sec, "max_tokens")) c.filter.max_tokens = get_integer(*v, "/corpus/max_tokens");
    if (auto* v = maybe(*sec, "max_html_marker_ratio"))
      c.filter.max_html_marker_ratio = get_number(*v, "/corpus/max_html_marker_ratio");
    if (auto* v = maybe(*sec, "max_typo_char_ratio"))
      c.filter.max_typo_char_ratio = get_number(*v, "/corpus/max_typo_char_ratio");
    if (auto* v = maybe(*sec, "balance")) c.balance = get_bool(*v, "/corpus/balance");
    if (c.filter.min_tokens < 1 || c.filter.min_tokens > c.filter.max_tokens)
      throw ConfigError("/corpus: requires 0 < min_tokens <= max_tokens");
    if (c.filter.max_html_marker_ratio < 0 || c.filter.max_html_marker_ratio > 1)
      throw ConfigError("/corpus/max_html_marker_ratio: expected a fraction in [0,1]");
    if (c.filter.max_typo_char_ratio < 0)
      throw ConfigError("/corpus/max_typo_char_ratio: must be >= 0");
  }

  if (auto* sec = maybe(root, "mining")) {
    require_keys(*sec,
                 {"input_path", "neg_threshold", "pos_threshold", "positive_mode_ratio",
                  "max_inflight", "retry_limit", "backoff_base_ms", "client"},
                 "/mining");
    if (auto* v = maybe(*sec, "input_path")) c.mining_input_path = get_string(*v, "/mining/input_path");
    if (auto* v = maybe(*sec, "neg_threshold"))
      c.mining.neg_threshold = get_number(*v, "/mining/neg_threshold");
    if (auto* v = maybe(*sec, "pos_threshold"))
      c.mining.pos_threshold = get_number(*v, "/mining/pos_threshold");
    if (auto* v = maybe(*sec, "positive_mode_ratio"))
      c.mining.positive_mode_ratio = get_number(*v, "/mining/positive_mode_ratio");
    if (auto* v = maybe(*sec, "max_inflight"))
      c.mining.max_inflight = static_cast<int>(get_integer(*v, "/mining/max_inflight"));
    if (auto* v = maybe(*sec, "retry_limit"))
      c.mining.retry_limit = static_cast<int>(get_integer(*v, "/mining/retry_limit"));
    if (auto* v = maybe(*sec, "backoff_base_ms"))
      c.mining.backoff_base_ms = get_number(*v, "/mining/backoff_base_ms");
    if (auto* client = maybe(*sec, "client")) {
      require_keys(*client, {"kind", "base_url", "auth_token_env", "model"}, "/mining/client");
      if (auto* v = maybe(*client, "kind")) c.client_kind = get_string(*v, "/mining/client/kind");
      if (auto* v = maybe(*client, "base_url"))
        c.client_base_url = get_string(*v, "/mining/client/base_url");
      if (auto* v = maybe(*client, "auth_token_env"))
        c.client_auth_env = get_string(*v, "/mining/client/auth_token_env");
      if (auto* v = maybe(*client, "model"))
        c.client_model = get_string(*v, "/mining/client/model");
    }
    if (c.client_kind != "mock")
      throw ConfigError("/mining/client/kind: only \"mock\" is bundled");
    mining::validate_config(c.mining);
  }

  if (auto* sec = maybe(root, "encoder")) {
    require_keys(*sec, {"d", "num_buckets", "ngram"}, "/encoder");
    if (auto* v = maybe(*sec, "d")) c.enc.d = static_cast<int>(get_integer(*v, "/encoder/d"));
    if (auto* v = maybe(*sec, "num_buckets"))
      c.enc.num_buckets = static_cast<int>(get_integer(*v, "/encoder/num_buckets"));
    if (auto* v = maybe(*sec, "ngram"))
      c.enc.ngram = static_cast<int>(get_integer(*v, "/encoder/ngram"));
    encoder::validate_config(c.enc);
  }

  if (auto* sec = maybe(root, "trainer")) {
    require_keys(*sec,
                 {"tau", "base_lr", "warmup_fraction", "batch_size", "epochs", "weight_decay",
                  "beta1", "beta2", "eps", "triplets_path"},
                 "/trainer");
    if (auto* v = maybe(*sec, "tau")) c.train.tau = get_number(*v, "/trainer/tau");
    if (auto* v = maybe(*sec, "base_lr")) c.train.base_lr = get_number(*v, "/trainer/base_lr");
    if (auto* v = maybe(*sec, "warmup_fraction"))
      c.train.warmup_fraction = get_number(*v, "/trainer/warmup_fraction");
    if (auto* v = maybe(*sec, "batch_size"))
      c.train.batch_size = static_cast<int>(get_integer(*v, "/trainer/batch_size"));
    if (auto* v = maybe(*sec, "epochs"))
      c.train.epochs = static_cast<int>(get_integer(*v, "/trainer/epochs"));
    if (auto* v = maybe(*sec, "weight_decay"))
      c.train.weight_decay = get_number(*v, "/trainer/weight_decay");
    if (auto* v = maybe(*sec, "beta1")) c.train.beta1 = get_number(*v, "/trainer/beta1");
    if (auto* v = maybe(*sec, "beta2")) c.train.beta2 = get_number(*v, "/trainer/beta2");
    if (auto* v = maybe(*sec, "eps")) c.train.eps = get_number(*v, "/trainer/eps");
    if (auto* v = maybe(*sec, "triplets_path"))
      c.triplets_path = get_string(*v, "/trainer/triplets_path");
    if (!(c.train.tau > 0)) throw ConfigError("/trainer/tau: must be > 0");
    if (c.train.warmup_fraction < 0 || c.train.warmup_fraction > 1)
      throw ConfigError("/trainer/warmup_fraction: expected a fraction in [0,1]");
    if (c.train.batch_size < 1) throw ConfigError("/trainer/batch_size: must be >= 1");
    if (c.train.epochs < 1) throw ConfigError("/trainer/epochs: must be >= 1");
  }

  if (auto* sec = maybe(root, "eval")) {
    require_keys(*sec, {"model_name", "suites", "checkpoint_before", "checkpoint_after"}, "/eval");
    if (auto* v = maybe(*sec, "model_name")) c.model_name = get_string(*v, "/eval/model_name");
    if (auto* v = maybe(*sec, "checkpoint_before"))
      c.checkpoint_before = get_string(*v, "/eval/checkpoint_before");
    if (auto* v = maybe(*sec, "checkpoint_after"))
      c.checkpoint_after = get_string(*v, "/eval/checkpoint_after");
    if (auto* suites = maybe(*sec, "suites")) {
      if (!suites->is_array()) throw ConfigError("/eval/suites: expected an array");
      size_t i = 0;
      for (const auto& s : *suites) {
        std::string pointer = "/eval/suites/" + std::to_string(i++);
        require_keys(s, {"name", "path", "format"}, pointer);
        SuiteSpec spec;
        if (auto* v = maybe(s, "name")) spec.name = get_string(*v, pointer + "/name");
        if (auto* v = maybe(s, "path")) spec.path = get_string(*v, pointer + "/path");
        if (spec.name.empty() || spec.path.empty())
          throw ConfigError(pointer + ": requires name and path");
        if (auto* v = maybe(s, "format")) {
          auto f = get_string(*v, pointer + "/format");
          if (f == "tsv")
            spec.format = evalsts::StsFormat::tsv;
          else if (f == "jsonl")
            spec.format = evalsts::StsFormat::jsonl;
          else
            throw ConfigError(pointer + "/format: expected \"tsv\" or \"jsonl\"");
        }
        c.suites.push_back(std::move(spec));
      }
    }
  }

  if (auto* sec = maybe(root, "tokaudit")) {
    require_keys(*sec, {"vocabs", "strip_prefixes", "include_jamo"}, "/tokaudit");
    if (auto* v = maybe(*sec, "include_jamo"))
      c.include_jamo = get_bool(*v, "/tokaudit/include_jamo");
    if (auto* prefixes = maybe(*sec, "strip_prefixes")) {
      if (!prefixes->is_array()) throw ConfigError("/tokaudit/strip_prefixes: expected an array");
      for (const auto& p : *prefixes)
        c.strip_prefixes.push_back(get_string(p, "/tokaudit/strip_prefixes"));
    }
    if (auto* vocabs = maybe(*sec, "vocabs")) {
      if (!vocabs->is_array()) throw ConfigError("/tokaudit/vocabs: expected an array");
      size_t i = 0;
      for (const auto& s : *vocabs) {
        std::string pointer = "/tokaudit/vocabs/" + std::to_string(i++);
        require_keys(s, {"model", "path", "format"}, pointer);
        VocabSpec spec;
        if (auto* v = maybe(s, "model")) spec.model = get_string(*v, pointer + "/model");
        if (auto* v = maybe(s, "path")) spec.path = get_string(*v, pointer + "/path");
        if (spec.model.empty() || spec.path.empty())
          throw ConfigError(pointer + ": requires model and path");
        if (auto* v = maybe(s, "format")) {
          auto f = get_string(*v, pointer + "/format");
          if (f == "lines")
            spec.format = tokaudit::VocabFormat::lines;
          else if (f == "json_map")
            spec.format = tokaudit::VocabFormat::json_map;
          else
            throw ConfigError(pointer + "/format: expected \"lines\" or \"json_map\"");
        }
        c.vocabs.push_back(std::move(spec));
      }
    }
  }
  return c;
}

inline PipelineConfig parse_config(const std::filesystem::path& path) {
  std::string raw = io::read_file(path);
  nlohmann::json root = nlohmann::json::parse(raw, nullptr, false);
  if (root.is_discarded()) throw ConfigError("config " + path.string() + ": invalid JSON");
  return parse_config_json(root, hash::fnv1a64(raw));
}

// Fills path defaults relative to out_dir and derives per-stage seeds from
// the global seed. Idempotent.
inline void resolve_defaults(PipelineConfig& c) {
  auto in_out = [&c](const char* name) { return (std::filesystem::path(c.out_dir) / name).string(); };
  if (c.mining_input_path.empty()) c.mining_input_path = in_out("filtered.jsonl");
  if (c.triplets_path.empty()) c.triplets_path = in_out("triplets.jsonl");
  if (c.checkpoint_before.empty()) c.checkpoint_before = in_out("encoder_before.bin");
  if (c.checkpoint_after.empty()) c.checkpoint_after = in_out("encoder_after.bin");
  c.filter.seed = rng::derive(c.seed, "corpus");
  c.mining.seed = rng::derive(c.seed, "mining");
  c.train.seed = rng::derive(c.seed, "trainer");
}

// CLI exit code for an error: 2 config, 3 data, 4 client, 5 numeric, 1 other.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ClientError*>(&e)) return 4;
  if (dynamic_cast<const NumericError*>(&e)) return 5;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 1;
}

inline const char* error_kind(int code) {
  switch (code) {
    case 2: return "config";
    case 3: return "data";
    case 4: return "client";
    case 5: return "numeric";
    default: return "unknown";
  }
}

namespace detail {

// One run at a time per output directory.
class LockFile {
 public:
  explicit LockFile(const std::filesystem::path& dir) : path_(dir / ".lock") {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw DataError("output directory " + dir.string() + " is locked by another run");
    ::close(fd);
  }
  ~LockFile() { std::error_code ec; std::filesystem::remove(path_, ec); }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::filesystem::path path_;
};

struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> inputs;   // path -> fnv64 hex digest
  std::map<std::string, std::string> outputs;
};

inline std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void note_input(RunManifest& m, const std::string& path) {
  m.inputs[path] = hex64(io::file_digest(path));
}

// Outputs all live directly in out_dir; keying by filename keeps manifests
// identical across output directories.
inline void note_output(RunManifest& m, const std::string& path) {
  m.outputs[std::filesystem::path(path).filename().string()] = hex64(io::file_digest(path));
}

inline void write_manifest(const PipelineConfig& c, const RunManifest& m) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["subcommand"] = m.subcommand;
  j["seed"] = c.seed;
  j["config_digest"] = hex64(c.config_digest);
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  auto path = std::filesystem::path(c.out_dir) / ("manifest_" + m.subcommand + ".json");
  io::write_file_atomic(path, j.dump(2) + "\n");
}

inline std::string require_input(const std::string& path, const std::string& role) {
  if (path.empty() || !std::filesystem::exists(path))
    throw DataError(role + " not found: " + (path.empty() ? "(unset)" : path));
  return path;
}

inline void run_filter(const PipelineConfig& c, RunManifest& m) {
  auto input = require_input(c.corpus_input_path, "corpus input");
  note_input(m, input);
  auto docs = corpus::load_documents(input, c.corpus_input_format);
  auto outcome = corpus::filter_corpus(docs, c.filter);
  auto kept = c.balance ? corpus::balance_by_class(outcome.kept, c.filter.seed) : outcome.kept;

  std::ostringstream jsonl;
  corpus::write_jsonl(jsonl, kept);
  auto filtered_path = (std::filesystem::path(c.out_dir) / "filtered.jsonl").string();
  io::write_file_atomic(filtered_path, jsonl.str());
  note_output(m, filtered_path);

  auto combined = corpus::corpus_stats(kept);
  combined.dropped_by_reason = outcome.stats.dropped_by_reason;
  std::ostringstream stats;
  corpus::write_stats_csv(stats, combined);
  auto stats_path = (std::filesystem::path(c.out_dir) / "corpus_stats.csv").string();
  io::write_file_atomic(stats_path, stats.str());
  note_output(m, stats_path);
}

inline void run_mine(const PipelineConfig& c, RunManifest& m) {
  auto input = require_input(c.mining_input_path, "mining input");
  note_input(m, input);
  auto docs = corpus::load_documents(input, corpus::InputFormat::jsonl);

  mocks::MockGenerationOptions gen_options;
  gen_options.seed = rng::derive(c.mining.seed, "mock-gen");
  mocks::MockGenerationClient gen(gen_options);
  mocks::MockJudgeClient judge;
  auto result = mining::mine_triplets(docs, gen, judge, c.mining);

  std::ostringstream jsonl;
  mining::write_triplets(jsonl, result.triplets);
  io::write_file_atomic(c.triplets_path, jsonl.str());
  note_output(m, c.triplets_path);

  std::ostringstream stats;
  io::csv_row(stats, {"metric", "value"});
  auto row = [&stats](std::string_view k, uint64_t v) {
    io::csv_row(stats, {k, std::to_string(v)});
  };
  const auto& s = result.stats;
  row("docs_in", s.docs_in);
  row("tags_returned", s.tags_returned);
  row("tags_invalid", s.tags_invalid);
  row("tags_valid", s.tags_valid);
  row("neg_candidates_in", s.neg_candidates_in);
  row("neg_skipped_refusal", s.neg_skipped_refusal);
  row("neg_skipped_degenerate", s.neg_skipped_degenerate);
  row("neg_generated", s.neg_generated);
  row("neg_accepted", s.neg_accepted);
  row("neg_rejected", s.neg_rejected);
  row("pos_candidates_in", s.pos_candidates_in);
  row("pos_skipped_degenerate", s.pos_skipped_degenerate);
  row("pos_generated", s.pos_generated);
  row("pos_accepted", s.pos_accepted);
  row("pos_rejected", s.pos_rejected);
  row("positives_paraphrase", s.positives_paraphrase);
  row("positives_translation", s.positives_translation);
  row("triplets_emitted", s.triplets_emitted);
  auto stats_path = (std::filesystem::path(c.out_dir) / "mining_stats.csv").string();
  io::write_file_atomic(stats_path, stats.str());
  note_output(m, stats_path);
}

inline void run_train(const PipelineConfig& c, RunManifest& m) {
  auto input = require_input(c.triplets_path, "triplets input");
  note_input(m, input);
  auto triplets = mining::read_triplets(std::filesystem::path(input));

  auto params = encoder::init_encoder(c.enc, rng::derive(c.seed, "encoder"));
  encoder::save_checkpoint(c.checkpoint_before, params);
  note_output(m, c.checkpoint_before);

  auto state = trainer::init_optimizer(params);
  trainer::TrainMetrics merged;
  for (int epoch = 0; epoch < c.train.epochs; ++epoch) {
    auto metrics = trainer::train_one_epoch(triplets, params, state, c.train, epoch);
    merged.epoch_mean_cos_sp = metrics.epoch_mean_cos_sp;
    merged.epoch_mean_cos_sn = metrics.epoch_mean_cos_sn;
    for (auto& step : metrics.steps) {
      step.step = static_cast<int64_t>(merged.step_count) + step.step;
      merged.steps.push_back(step);
    }
    merged.step_count += metrics.step_count;
  }
  encoder::save_checkpoint(c.checkpoint_after, params);
  note_output(m, c.checkpoint_after);

  std::ostringstream csv;
  trainer::write_metrics_csv(csv, merged, c.train);
  auto metrics_path = (std::filesystem::path(c.out_dir) / "train_metrics.csv").string();
  io::write_file_atomic(metrics_path, csv.str());
  note_output(m, metrics_path);
}

inline void run_eval(const PipelineConfig& c, RunManifest& m) {
  if (c.suites.empty()) throw ConfigError("/eval/suites: at least one suite is required");
  auto before_path = require_input(c.checkpoint_before, "checkpoint (before)");
  auto after_path = require_input(c.checkpoint_after, "checkpoint (after)");
  note_input(m, before_path);
  note_input(m, after_path);
  auto before = encoder::load_checkpoint(before_path);
  auto after = encoder::load_checkpoint(after_path);

  nlohmann::json results;
  results["model"] = c.model_name;
  results["suites"] = nlohmann::json::object();
  std::ostringstream csv;
  io::csv_row(csv, {"suite", "n_pairs", "spearman_before", "pearson_before", "spearman_after",
                    "pearson_after"});
  for (const auto& suite : c.suites) {
    auto path = require_input(suite.path, "sts dataset " + suite.name);
    note_input(m, path);
    auto pairs = evalsts::load_sts(std::filesystem::path(path), suite.format);
    auto rb = evalsts::evaluate_sts(pairs, before, suite.name);
    auto ra = evalsts::evaluate_sts(pairs, after, suite.name);
    results["suites"][suite.name] = {
        {"n_pairs", rb.n_pairs},
        {"before", {{"spearman", rb.spearman}, {"pearson", rb.pearson}}},
        {"after", {{"spearman", ra.spearman}, {"pearson", ra.pearson}}},
    };
    io::csv_row(csv, {suite.name, std::to_string(rb.n_pairs), io::fmt_full(rb.spearman),
                      io::fmt_full(rb.pearson), io::fmt_full(ra.spearman),
                      io::fmt_full(ra.pearson)});
  }
  auto json_path = (std::filesystem::path(c.out_dir) / "eval_results.json").string();
  io::write_file_atomic(json_path, results.dump(2) + "\n");
  note_output(m, json_path);
  auto csv_path = (std::filesystem::path(c.out_dir) / "eval_results.csv").string();
  io::write_file_atomic(csv_path, csv.str());
  note_output(m, csv_path);
}

inline void run_tokaudit(const PipelineConfig& c, RunManifest& m) {
  if (c.vocabs.empty()) throw ConfigError("/tokaudit/vocabs: at least one vocab is required");
  tokaudit::AuditConfig audit{c.strip_prefixes, c.include_jamo};
  nlohmann::json results;
  results["vocabs"] = nlohmann::json::array();
  std::ostringstream csv;
  io::csv_row(csv, {"model", "vocab_size", "korean_token_count", "korean_token_pct"});
  for (const auto& spec : c.vocabs) {
    auto path = require_input(spec.path, "vocab " + spec.model);
    note_input(m, path);
    auto vocab = tokaudit::load_vocab(std::filesystem::path(path), spec.format);
    auto report = tokaudit::coverage_report(vocab, audit);
    results["vocabs"].push_back({{"model", spec.model},
                                 {"vocab_size", report.vocab_size},
                                 {"korean_token_count", report.korean_token_count},
                                 {"undecodable_count", report.undecodable_count},
                                 {"korean_token_pct", report.korean_token_pct}});
    io::csv_row(csv, {spec.model, std::to_string(report.vocab_size),
                      std::to_string(report.korean_token_count),
                      io::fmt_fixed(report.korean_token_pct, 2)});
  }
  auto json_path = (std::filesystem::path(c.out_dir) / "coverage.json").string();
  io::write_file_atomic(json_path, results.dump(2) + "\n");
  note_output(m, json_path);
  auto csv_path = (std::filesystem::path(c.out_dir) / "coverage.csv").string();
  io::write_file_atomic(csv_path, csv.str());
  note_output(m, csv_path);
}

inline void run_report(const PipelineConfig& c, RunManifest& m) {
  auto eval_path = (std::filesystem::path(c.out_dir) / "eval_results.json").string();
  require_input(eval_path, "eval results");
  note_input(m, eval_path);
  nlohmann::json eval_json = nlohmann::json::parse(io::read_file(eval_path));

  std::map<std::string, double> before, after;
  for (const auto& [suite, r] : eval_json["suites"].items()) {
    before[suite] = r["before"]["spearman"].get<double>();
    after[suite] = r["after"]["spearman"].get<double>();
  }
  std::string model = eval_json["model"].get<std::string>();

  // Spearman grid, one model per row, empty cells for absent suites.
  static const char* kSuiteOrder[] = {evalsts::kSuiteFinSts, evalsts::kSuiteKorFinSts,
                                      evalsts::kSuiteSts, evalsts::kSuiteKorSts};
  std::ostringstream sts;
  {
    std::vector<std::string> header = {"model"};
    for (auto* suite : kSuiteOrder) {
      header.push_back(std::string(suite) + "_before");
      header.push_back(std::string(suite) + "_after");
      header.push_back(std::string(suite) + "_after_is_highest");
    }
    io::csv_row(sts, header);
    std::vector<std::string> row = {model};
    for (auto* suite : kSuiteOrder) {
      if (before.count(suite)) {
        row.push_back(io::fmt_fixed(before[suite], 4));
        row.push_back(io::fmt_fixed(after[suite], 4));
        row.push_back(after[suite] >= before[suite] ? "true" : "false");
      } else {
        row.insert(row.end(), {"", "", ""});
      }
    }
    io::csv_row(sts, row);
  }
  auto sts_path = (std::filesystem::path(c.out_dir) / "report_sts.csv").string();
  io::write_file_atomic(sts_path, sts.str());
  note_output(m, sts_path);

  // Coverage is optional; its percentage joins the delta table when present.
  std::string korean_pct;
  auto coverage_path = (std::filesystem::path(c.out_dir) / "coverage.json").string();
  std::ostringstream coverage_csv;
  io::csv_row(coverage_csv, {"model", "vocab_size", "korean_token_count", "korean_token_pct"});
  if (std::filesystem::exists(coverage_path)) {
    note_input(m, coverage_path);
    nlohmann::json cov = nlohmann::json::parse(io::read_file(coverage_path));
    for (const auto& v : cov["vocabs"]) {
      auto pct = io::fmt_fixed(v["korean_token_pct"].get<double>(), 2);
      if (korean_pct.empty()) korean_pct = pct;
      io::csv_row(coverage_csv,
                  {v["model"].get<std::string>(), std::to_string(v["vocab_size"].get<int64_t>()),
                   std::to_string(v["korean_token_count"].get<int64_t>()), pct});
    }
  }
  auto coverage_csv_path = (std::filesystem::path(c.out_dir) / "report_coverage.csv").string();
  io::write_file_atomic(coverage_csv_path, coverage_csv.str());
  note_output(m, coverage_csv_path);

  std::ostringstream delta;
  io::csv_row(delta, {"model", "delta_finsts", "delta_korfinsts", "mean_delta",
                      "korean_token_pct"});
  bool have_financial = before.count(evalsts::kSuiteFinSts) && after.count(evalsts::kSuiteFinSts) &&
                        before.count(evalsts::kSuiteKorFinSts) &&
                        after.count(evalsts::kSuiteKorFinSts);
  if (have_financial) {
    auto report = evalsts::delta_report(before, after);
    io::csv_row(delta, {model, io::fmt_fixed(report.delta.at(evalsts::kSuiteFinSts), 4),
                        io::fmt_fixed(report.delta.at(evalsts::kSuiteKorFinSts), 4),
                        io::fmt_fixed(report.mean_delta, 4), korean_pct});
  } else {
    io::csv_row(delta, {model, "", "", "", korean_pct});
  }
  auto delta_path = (std::filesystem::path(c.out_dir) / "report_delta.csv").string();
  io::write_file_atomic(delta_path, delta.str());
  note_output(m, delta_path);
}

}  // namespace detail

// Runs one subcommand; 0 on success, otherwise the error class code
// (2 config, 3 data, 4 client, 5 numeric) with a machine-readable record at
// <out_dir>/error.json.
inline int dispatch(const std::string& subcommand, PipelineConfig config) {
  resolve_defaults(config);
  std::filesystem::create_directories(config.out_dir);
  try {
    detail::LockFile lock{std::filesystem::path(config.out_dir)};
    detail::RunManifest manifest;
    manifest.subcommand = subcommand;
    if (subcommand == "filter")
      detail::run_filter(config, manifest);
    else if (subcommand == "mine")
      detail::run_mine(config, manifest);
    else if (subcommand == "train")
      detail::run_train(config, manifest);
    else if (subcommand == "eval")
      detail::run_eval(config, manifest);
    else if (subcommand == "tokaudit")
      detail::run_tokaudit(config, manifest);
    else if (subcommand == "report")
      detail::run_report(config, manifest);
    else
      throw ConfigError("unknown subcommand \"" + subcommand + "\"");
    detail::write_manifest(config, manifest);
    return 0;
  } catch (const std::exception& e) {
    int code = exit_code_for(e);
    nlohmann::json record = {{"subcommand", subcommand},
                             {"error", error_kind(code)},
                             {"message", e.what()},
                             {"exit_code", code}};
    io::write_file_atomic(std::filesystem::path(config.out_dir) / "error.json",
                          record.dump(2) + "\n");
    std::cerr << "xling-adapt " << subcommand << ": " << e.what() << "\n";
    return code;
  }
}

}  // namespace xladapt::pipeline
