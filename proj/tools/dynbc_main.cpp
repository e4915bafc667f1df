// Command-line driver: one subcommand per experiment, a config file or a
// named preset as the problem source, artifacts written to --out.
//
// Exit codes: 0 experiment passed its thresholds, 1 it ran but failed them,
// 2 the config or command line is unusable, 3 the solver failed numerically.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "dynbc/config.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/experiments.hpp"

namespace {

struct Args {
  std::string config_path;
  std::string preset;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool quiet = false;
};

int run(const std::string& subcommand, const Args& args) {
  using namespace dynbc;
  if (!args.config_path.empty() && !args.preset.empty())
    throw ConfigError("give either --config or --preset, not both");
  RunConfig cfg;
  if (!args.config_path.empty())
    cfg = load_config(args.config_path);
  else if (!args.preset.empty())
    cfg = preset_config(args.preset);
  else
    throw ConfigError("an experiment needs --config FILE or --preset NAME");

  if (cfg.experiment.name.empty())
    cfg.experiment.name = subcommand;
  else if (cfg.experiment.name != subcommand)
    throw ConfigError("config selects experiment '" + cfg.experiment.name +
                      "' but the command line says '" + subcommand + "'");

  const RunReport rep = run_experiment(cfg, args.out_dir, args.seed);
  if (!args.quiet) {
    std::printf("%s: %s\n", rep.experiment.c_str(),
                rep.pass ? "PASS" : "FAIL");
    for (const auto& [key, value] : rep.values.items())
      std::printf("  %s = %s\n", key.c_str(), format_double(value).c_str());
    for (const auto& note : rep.notes) std::printf("  %s\n", note.c_str());
    std::printf("  artifacts: %s\n", args.out_dir.c_str());
  }
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver and verification harness for quasilinear parabolic "
               "problems with dynamic boundary conditions"};
  app.fallthrough();
  app.require_subcommand(1);

  Args args;
  app.add_option("--config", args.config_path,
                 "config file (line-oriented key = value with [sections])");
  app.add_option("--preset", args.preset,
                 "built-in problem: heat-dynbc, quasilinear-1+u2, "
                 "strip-tangential");
  app.add_option("--out", args.out_dir,
                 "directory for report.json and CSV tables");
  app.add_option("--seed", args.seed, "seed recorded in the report");
  app.add_flag("--quiet", args.quiet, "suppress the summary on stdout");

  for (const std::string& name : dynbc::experiment_names())
    app.add_subcommand(name, "run the " + name + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), args);
  } catch (const dynbc::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
