// Command-line front end: fkpp_lab <subcommand> --config <file> --out <dir>
#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "fkpp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fractional Fisher-KPP laboratory on periodic perforated domains"};
  app.require_subcommand(1, 1);
  std::string config;
  std::string out = "out";
  fkpp::cli::RunOptions options;
  const std::map<std::string, std::string> about{
      {"eig", "principal eigenpairs, ordering checks and the nu sweep"},
      {"stationary", "positive periodic stationary state by monotone iteration"},
      {"evolve", "time integration with CSV snapshots"},
      {"heat-kernel", "kernel ratio bounds and tail exponent at t = 1"},
      {"front-speed", "front tracking, speed fit, decay and plateau"},
      {"verify", "full check battery on one configuration"},
  };
  for (const std::string& name : fkpp::cli::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
    sub->add_option("--config", config, "run configuration (INI)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "artifact directory")->capture_default_str();
    sub->add_option("--threads", options.threads, "worker threads")->capture_default_str();
    sub->add_option("--seed", options.seed, "seed for randomized restarts")->capture_default_str();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fkpp::cli::kInvalidConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  return fkpp::cli::run(sub, config, out, options, std::cerr);
}
