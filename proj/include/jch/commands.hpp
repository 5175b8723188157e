#pragma once

// The four CLI commands.  Each reads a config file, applies command-line
// overrides, runs, and writes <prefix>.csv plus <prefix>.manifest.  Config
// errors return exit status 2 with a diagnostic; runtime failures return 1.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "jch/config.hpp"
#include "jch/csv.hpp"
#include "jch/evolution.hpp"
#include "jch/experiments.hpp"

namespace jch {

struct CommandArgs {
  std::string config_path;
  std::string out_prefix;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<double> target;
  std::optional<std::size_t> sample_every;
  unsigned threads = 0;
};

namespace detail {

inline ParsedConfig load_config(const CommandArgs& args) {
  std::ifstream f(args.config_path);
  if (!f) throw ConfigError("--config", "cannot read " + args.config_path);
  std::stringstream ss;
  ss << f.rdbuf();
  ParsedConfig pc = parse_config(ss.str());
  auto& rc = pc.config;
  if (args.dt) {
    if (!(*args.dt > 0)) throw ConfigError("--dt", "must be > 0");
    rc.dt = *args.dt;
  }
  if (args.t_max) {
    if (!(*args.t_max > 0)) throw ConfigError("--t-max", "must be > 0");
    rc.t_max = *args.t_max;
  }
  if (args.target) {
    if (!(*args.target > 0 && *args.target < 1)) throw ConfigError("--target", "must lie in (0, 1)");
    rc.target = *args.target;
  }
  if (args.sample_every) {
    if (*args.sample_every < 1) throw ConfigError("--sample-every", "must be >= 1");
    rc.sample_every = *args.sample_every;
  }
  return pc;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
}

template <class Body>
int run_command(const char* name, const CommandArgs& args, std::ostream& err, Body&& body) {
  try {
    if (args.out_prefix.empty()) throw ConfigError("--out", "required");
    const auto start = std::chrono::steady_clock::now();
    ParsedConfig pc = load_config(args);
    for (const auto& w : pc.warnings) err << "warning: " << w << '\n';
    RunManifest manifest;
    manifest.command = name;
    manifest.warnings = pc.warnings;
    body(pc.config, manifest);
    if (manifest.positivity_violated)
      err << "warning: min eigenvalue " << manifest.min_eigenvalue << " below tolerance; try a smaller dt\n";
    manifest.config = pc.config;
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(args.out_prefix + ".manifest", manifest.to_text());
    return 0;
  } catch (const ConfigError& e) {
    err << name << ": config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << name << ": " << e.what() << '\n';
    return 1;
  }
}

inline void record_validation(RunManifest& m, const SweepResult& res, const StateTolerances& tol = {}) {
  m.max_trace_drift = res.max_trace_drift;
  m.min_eigenvalue = res.min_eigenvalue;
  m.positivity_violated = res.min_eigenvalue < tol.min_eigenvalue;
}

inline SweepSpec sweep_spec(const RunConfig& rc, Axis axis1, std::optional<Axis> axis2) {
  return SweepSpec{rc.chain, std::move(axis1), std::move(axis2), rc.make_objective(), rc.dt};
}

}  // namespace detail

/// Trajectory from the configured initial state up to t_max.
inline int cmd_evolve(const CommandArgs& args, std::ostream& err = std::cerr) {
  return detail::run_command("evolve", args, err, [&](RunConfig& rc, RunManifest& m) {
    const auto rec = evolve(rc.chain, rc.t_max, rc.dt, rc.sample_every);
    m.max_trace_drift = rec.max_trace_drift;
    m.min_eigenvalue = rec.min_eigenvalue;
    m.positivity_violated = rec.positivity_violated;
    write_csv(rec, args.out_prefix + ".csv");
  });
}

/// rate_in × rate_out grid of time to reach the target (default grids 0.1…4.0).
inline int cmd_bottleneck(const CommandArgs& args, std::ostream& err = std::cerr) {
  return detail::run_command("bottleneck", args, err, [&](RunConfig& rc, RunManifest& m) {
    if (rc.objective != ObjectiveKind::TimeToReach) throw ConfigError("objective", "bottleneck uses time_to_reach");
    if (!rc.axis1) rc.axis1 = Axis{SweepParam::RateIn, default_rate_grid()};
    if (!rc.axis2) rc.axis2 = Axis{SweepParam::RateOut, default_rate_grid()};
    if (rc.axis1->param != SweepParam::RateIn || rc.axis2->param != SweepParam::RateOut)
      throw ConfigError("axis1_param", "bottleneck needs axis1=rate_in and axis2=rate_out");
    const auto res = bottleneck_scan(detail::sweep_spec(rc, *rc.axis1, rc.axis2), SweepOptions(args.threads));
    detail::record_validation(m, res);
    write_csv(res, args.out_prefix + ".csv");
  });
}

/// rate_out × g grid of the sink population at objective_time (default grids
/// 0.1…4.0 and 0…2).
inline int cmd_dat(const CommandArgs& args, std::ostream& err = std::cerr) {
  return detail::run_command("dat", args, err, [&](RunConfig& rc, RunManifest& m) {
    if (!rc.objective_time) throw ConfigError("objective_time", "required for dat");
    rc.objective = ObjectiveKind::SinkAtTime;
    if (!rc.axis1) rc.axis1 = Axis{SweepParam::RateOut, default_rate_grid()};
    if (!rc.axis2) rc.axis2 = Axis{SweepParam::G, default_g_grid()};
    if (rc.axis1->param != SweepParam::RateOut || rc.axis2->param != SweepParam::G)
      throw ConfigError("axis1_param", "dat needs axis1=rate_out and axis2=g");
    if (rc.chain.dephasing == Dephasing::None) throw ConfigError("dephasing", "dat needs lindblad or unitary");
    const auto res = dat_scan(detail::sweep_spec(rc, *rc.axis1, rc.axis2), SweepOptions(args.threads));
    detail::record_validation(m, res);
    write_csv(res, args.out_prefix + ".csv");
  });
}

/// Generic one- or two-axis sweep.
inline int cmd_sweep(const CommandArgs& args, std::ostream& err = std::cerr) {
  return detail::run_command("sweep", args, err, [&](RunConfig& rc, RunManifest& m) {
    if (!rc.axis1) throw ConfigError("axis1_param", "required for sweep");
    const auto res = run_sweep(detail::sweep_spec(rc, *rc.axis1, rc.axis2), SweepOptions(args.threads));
    detail::record_validation(m, res);
    write_csv(res, args.out_prefix + ".csv");
  });
}

}  // namespace jch
