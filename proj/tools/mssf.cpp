#include "mssf/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Multi-state step-selection models: simulate, sample controls, fit, decode, study"};
  app.require_subcommand(1, 1);

  mssf::CommandOptions options;
  std::uint64_t seed = 0;
  int threads = 0;
  for (const char* name : {"simulate", "sample-controls", "fit", "decode", "study", "equivalence"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "root seed (overrides the config)");
    sub->add_option("--out", options.out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mssf::kExitConfig;
  }
  auto* sub = app.get_subcommands().front();
  options.command = sub->get_name();
  if (sub->count("--seed") > 0) options.seed = seed;
  if (sub->count("--threads") > 0) options.threads = threads;
  return mssf::run_command(options, std::cerr);
}
