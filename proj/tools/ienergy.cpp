#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace ienergy::cli;
  CLI::App app{"Interaction-energy minimisers: stability, optimisation, diagnostics and recovery", "ienergy"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 1;
  app.add_option("--config", config, "Run configuration (JSON)")->required();
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Base RNG seed (overrides the config)");
  auto* workers_opt =
      app.add_option("--workers", workers, "Worker threads; results do not depend on it")->check(CLI::Range(1, 1024));

  for (const char* name : {"classify", "minimize", "sweep", "recover", "analyze"}) app.add_subcommand(name);
  app.get_subcommand("classify")->description("Stability class plus optional numeric certificate");
  app.get_subcommand("minimize")->description("Multistart minimisation with diagnostics");
  app.get_subcommand("sweep")->description("Minimise over N_list and tabulate diameter and spreads");
  app.get_subcommand("recover")->description("Recovery configurations and their convergence table");
  app.get_subcommand("analyze")->description("Diagnostics for a saved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  Overrides ov;
  if (*out_opt) ov.out = out;
  if (*seed_opt) ov.seed = seed;
  if (*workers_opt) ov.workers = workers;
  if (const char* env = std::getenv(kWorkersEnv)) ov.env_workers = std::string(env);

  const std::string command = app.get_subcommands().front()->get_name();
  return run_command(command, config, ov, std::cerr);
}
