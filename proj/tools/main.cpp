#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "xladapt/pipeline.hpp"

namespace {

struct SubcommandInfo {
  const char* name;
  const char* help;
};

constexpr SubcommandInfo kSubcommands[] = {
    {"filter", "Drop noisy documents and balance the corpus by source domain"},
    {"mine", "Mine judge-gated contrastive triplets from a filtered corpus"},
    {"train", "Train the hashed character n-gram encoder on mined triplets"},
    {"eval", "Score encoder checkpoints on STS suites before and after training"},
    {"tokaudit", "Audit tokenizer vocabularies for full-Korean-token coverage"},
    {"report", "Summarize evaluation and coverage artifacts into report tables"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xling-adapt: cross-lingual financial domain adaptation toolkit"};
  app.set_version_flag("--version", std::string("xling-adapt ") + xladapt::pipeline::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  for (const auto& info : kSubcommands) {
    CLI::App* sub = app.add_subcommand(info.name, info.help);
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "Override the output directory");
    sub->add_option("--seed", seed, "Override the global seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad usage is a config-class failure
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    auto config = xladapt::pipeline::parse_config(config_path);
    if (sub->count("--out")) config.out_dir = out_dir;
    if (sub->count("--seed")) config.seed = seed;
    return xladapt::pipeline::dispatch(sub->get_name(), std::move(config));
  } catch (const std::exception& e) {
    // Errors before dispatch (unreadable/invalid config) have no output
    // directory to record into; stderr is all we can offer.
    std::cerr << "xling-adapt: " << e.what() << "\n";
    return xladapt::pipeline::exit_code_for(e);
  }
}
