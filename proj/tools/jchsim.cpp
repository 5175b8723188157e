#include <string>

#include <CLI11.hpp>

#include "jch/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Excitation transport in Jaynes-Cummings-Hubbard chains"};
  app.set_version_flag("--version", std::string(jch::kToolVersion));
  app.require_subcommand(1);

  jch::CommandArgs args;
  auto* evolve = app.add_subcommand("evolve", "trajectory of sink/photon/exciton populations up to t_max");
  auto* bottleneck = app.add_subcommand("bottleneck", "rate_in x rate_out time-to-reach scan");
  auto* dat = app.add_subcommand("dat", "rate_out x g sink-at-time scan");
  auto* sweep = app.add_subcommand("sweep", "generic one- or two-axis parameter sweep");
  for (auto* cmd : {evolve, bottleneck, dat, sweep}) {
    cmd->add_option("--config", args.config_path, "key=value configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_prefix, "output prefix; writes <prefix>.csv and <prefix>.manifest")->required();
    cmd->add_option("--dt", args.dt, "time step (overrides config)");
    cmd->add_option("--t-max", args.t_max, "time cap or trajectory length (overrides config)");
    cmd->add_option("--target", args.target, "target sink population (overrides config)");
    cmd->add_option("--threads", args.threads, "worker threads for sweeps (0 = all cores)");
  }
  evolve->add_option("--sample-every", args.sample_every, "steps between recorded samples");

  CLI11_PARSE(app, argc, argv);

  if (*evolve) return jch::cmd_evolve(args);
  if (*bottleneck) return jch::cmd_bottleneck(args);
  if (*dat) return jch::cmd_dat(args);
  return jch::cmd_sweep(args);
}
