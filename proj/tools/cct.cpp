#include "cct/run.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Collective destination choice under congestion: solvers and simulation"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool override_horizon = false;

  for (const auto& name : cct::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "seed for every random draw");
    sub->add_flag("--override-horizon", override_horizon, "run even when T exceeds the escape time");
  }

  CLI11_PARSE(app, argc, argv);

  cct::RunOptions opts;
  opts.out_dir = out_dir;
  opts.seed = seed;
  opts.override_horizon = override_horizon;
  const std::string command = app.get_subcommands().front()->get_name();
  return cct::run_command(command, config, opts, std::cout, std::cerr);
}
