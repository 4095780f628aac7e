// Command-line front end.
//
// Exit codes: 0 on success, 1 for configuration/usage errors, 2 for
// numerical failures during a run.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cyclewarp/commands.hpp"
#include "cyclewarp/config.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::string out;
  std::string input;
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* sub, CliArgs& args) {
  sub->add_option("--config", args.config, "JSON configuration file");
  sub->add_option("--seed", args.seed, "Generator seed (overrides the config)");
  sub->add_option("--threads", args.threads,
                  "Worker threads (overrides config and CYCLEWARP_THREADS)");
  sub->add_option("--out", args.out, "Output directory (overrides the config)");
  sub->add_option("--input", args.input, "Input CSV (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cyclewarp: fit stochastically time-warped periodic signals and "
               "count their cycles"};
  app.require_subcommand(1);

  CliArgs args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Generate synthetic records from the growth model");
  CLI::App* fit = app.add_subcommand(
      "fit", "Preprocess, initialize and fit one record");
  CLI::App* boot = app.add_subcommand(
      "bootstrap", "Fit a record and bootstrap its uncertainty");
  CLI::App* agg = app.add_subcommand(
      "aggregate", "Fit labeled segments and chain them into a dated timeline");
  CLI::App* bench = app.add_subcommand(
      "bench", "Time simulate+fit rounds at a fixed record length");
  for (CLI::App* sub : {sim, fit, boot, agg, bench}) add_common(sub, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    cyclewarp::RunConfig cfg = args.config.empty()
                                   ? cyclewarp::default_config()
                                   : cyclewarp::load_config(args.config);
    const CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) cfg.seed = args.seed;
    if (sub->count("--threads") > 0) cfg.threads = args.threads;
    if (!args.out.empty()) cfg.out = args.out;
    if (!args.input.empty()) cfg.input = args.input;

    if (sub == sim) return cyclewarp::cmd_simulate(cfg);
    if (sub == fit) return cyclewarp::cmd_fit(cfg);
    if (sub == boot) return cyclewarp::cmd_bootstrap(cfg);
    if (sub == agg) return cyclewarp::cmd_aggregate(cfg);
    if (sub == bench) return cyclewarp::cmd_bench(cfg);
    std::cerr << "error: unknown subcommand" << std::endl;
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return 2;
  }
}
