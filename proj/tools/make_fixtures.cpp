// Writes a self-contained demo workspace (corpus, STS suites, vocabularies,
// config) so the pipeline can be exercised end to end with the mock clients.
#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "xladapt/corpus.hpp"
#include "xladapt/fixtures.hpp"
#include "xladapt/io.hpp"
#include "xladapt/tokaudit.hpp"

namespace fs = std::filesystem;
using namespace xladapt;

namespace {

corpus::Document extra_doc(std::string id, corpus::Lang lang, corpus::SourceDomain domain,
                           std::string text) {
  corpus::Document d;
  d.id = std::move(id);
  d.lang = lang;
  d.source_domain = domain;
  d.token_count = corpus::whitespace_token_count(text);
  d.text = std::move(text);
  return d;
}

void write_corpus(const fs::path& path) {
  auto docs = fixtures::make_mining_corpus(4);
  docs.push_back(extra_doc("short-en-0", corpus::Lang::en, corpus::SourceDomain::news,
                           "far too short to keep"));
  docs.push_back(extra_doc(
      "markup-en-0", corpus::Lang::en, corpus::SourceDomain::news,
      fixtures::repeat_to_min_tokens("the <b>quarterly</b> brief repeats corporate text", 140)));
  std::ofstream os(path);
  corpus::write_jsonl(os, docs);
}

void write_sts_tsv(const fs::path& path, const std::vector<evalsts::StsPair>& pairs) {
  std::ofstream os(path);
  os << "sentence1\tsentence2\tscore\n";
  for (const auto& p : pairs)
    os << p.sentence1 << "\t" << p.sentence2 << "\t" << io::fmt_full(p.gold) << "\n";
}

void write_sts_jsonl(const fs::path& path, const std::vector<evalsts::StsPair>& pairs) {
  std::ofstream os(path);
  for (const auto& p : pairs) {
    nlohmann::json j = {{"sentence1", p.sentence1}, {"sentence2", p.sentence2}, {"score", p.gold}};
    os << j.dump() << "\n";
  }
}

void write_vocab_lines(const fs::path& path, const tokaudit::Vocab& v) {
  std::ofstream os(path);
  for (const auto& t : v.tokens) os << t << "\n";
}

void write_vocab_map(const fs::path& path, const tokaudit::Vocab& v) {
  nlohmann::json j = nlohmann::json::object();
  for (size_t i = 0; i < v.tokens.size(); ++i) j[v.tokens[i]] = i;
  io::write_file(path, j.dump(2) + "\n");
}

void write_config(const fs::path& dir) {
  auto at = [&dir](const char* name) { return (dir / name).string(); };
  nlohmann::json cfg = {
      {"seed", 7},
      {"out_dir", (dir / "out").string()},
      {"corpus", {{"input_path", at("corpus.jsonl")}, {"input_format", "jsonl"}}},
      {"mining", {{"client", {{"kind", "mock"}}}}},
      {"encoder", {{"d", 64}, {"num_buckets", 8192}, {"ngram", 3}}},
      {"trainer", {{"base_lr", 1e-3}, {"batch_size", 8}}},
      {"eval",
       {{"model_name", "reference-encoder"},
        {"suites",
         nlohmann::json::array(
             {{{"name", "FinSTS"}, {"path", at("sts_fin.tsv")}, {"format", "tsv"}},
              {{"name", "KorFinSTS"}, {"path", at("sts_korfin.jsonl")}, {"format", "jsonl"}}})}}},
      {"tokaudit",
       {{"vocabs",
         nlohmann::json::array(
             {{{"model", "demo-lines"}, {"path", at("vocab_lines.txt")}, {"format", "lines"}},
              {{"model", "demo-map"}, {"path", at("vocab_map.json")}, {"format", "json_map"}}})}}},
  };
  io::write_file(dir / "config.json", cfg.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"make-fixtures: write a demo workspace for the xling-adapt pipeline"};
  std::string target = "fixtures";
  app.add_option("dir", target, "Target directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  fs::path dir(target);
  fs::create_directories(dir);
  write_corpus(dir / "corpus.jsonl");
  write_sts_tsv(dir / "sts_fin.tsv", fixtures::make_alignment_sts(64, 3));
  write_sts_jsonl(dir / "sts_korfin.jsonl", fixtures::make_alignment_sts(64, 4));
  write_vocab_lines(dir / "vocab_lines.txt", fixtures::make_vocab(400, 40));
  write_vocab_map(dir / "vocab_map.json", fixtures::make_vocab(300, 30));
  write_config(dir);

  std::cout << "wrote " << dir.string() << "/{corpus.jsonl, sts_fin.tsv, sts_korfin.jsonl, "
            << "vocab_lines.txt, vocab_map.json, config.json}\n"
            << "next: xling-adapt filter --config " << (dir / "config.json").string() << "\n";
  return 0;
}
