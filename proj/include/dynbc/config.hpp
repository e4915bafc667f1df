#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynbc/quasilinear.hpp"

namespace dynbc {

// [problem] section. Expressions are kept as the original text; build_problem
// parses them. The geometry keys of the unused kind are carried along so that
// serialization round-trips any config.
struct ProblemConfig {
  std::string geometry = "interval";  // "interval" | "strip"
  double x_lo = 0.0, x_hi = 1.0;      // interval extent
  std::size_t n_nodes = 33;           // interval node count
  double period = 1.0;                // strip period in x
  std::size_t n_x = 24, n_y = 13;     // strip node counts
  std::string a_xx = "1", a_xy = "0", a_yy = "0";
  std::string f = "0";
  std::string b_x = "0", b_y = "0";
  std::string h = "0";
  std::string u0 = "0";  // expression of x[, y], sampled on the grid at t = 0
  double T = 0.1;
  double beta = 0.5;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

// [solver] section. Exactly one of n_steps/dt drives the step size: giving
// the `dt` key zeroes n_steps and vice versa; a file naming both is rejected.
struct SolverConfig {
  std::string scheme = "implicit-euler";  // | "crank-nicolson"
  std::size_t n_steps = 16;  // steps of the initial window
  double dt = 0.0;           // explicit step size (0 = derive from n_steps)
  double window = 0.0;       // initial window length; 0 = whole horizon
  double radius = 0.0;       // iteration ball; 0 = automatic
  double tol_fp = 1e-10;
  std::size_t max_iterations = 30;
  double rho_max = 0.5;
  double shrink = 0.5;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

// [experiment] section: the experiment id plus its own key = value parameters
// (checked against a per-experiment allowlist at load, parsed on use). An
// empty name means "not selected yet"; the CLI fills it from the subcommand.
struct ExperimentConfig {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

struct RunConfig {
  ProblemConfig problem;
  SolverConfig solver;
  ExperimentConfig experiment;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// The experiment ids accepted by [experiment] name and as CLI subcommands:
// validate, solve, mms-converge, scaling, contraction, uniqueness,
// compat-necessity.
const std::vector<std::string>& experiment_names();

// Built-in start configurations, overridable key by key:
//   heat-dynbc        linear heat flow on [0,1] with boundary drift b_x = ν
//   quasilinear-1+u2  diffusion 1 + u^2 with a parabolic source
//   strip-tangential  periodic strip, mixed second-order term, boundary
//                     drift with a genuine tangential component
// Throws ConfigError for any other name.
RunConfig preset_config(const std::string& name);

// Parse the line-oriented `key = value` format with [section] headers.
// Values may be double-quoted (expressions must be when they contain spaces);
// full-line comments start with '#'. A `preset = name` key must be the first
// key of [problem] and seeds problem + solver before overrides. All errors
// are reported as ConfigError carrying origin:line. The problem and solver
// sections are materialized once at the end, so ill-formed expressions and
// inconsistent sections are rejected at load time.
RunConfig parse_config(std::string_view text, const std::string& origin);
RunConfig load_config(const std::string& path);

// Canonical text form; parse_config(serialize(c), ...) == c.
std::string serialize(const RunConfig& c);

// 64-bit FNV-1a hex digest of the canonical serialization.
std::string config_digest(const RunConfig& c);

// Materialize the [problem] section: build the grid, parse every expression,
// sample u0(x[,y]) on the nodes, and validate the spec.
ProblemSpec build_problem(const ProblemConfig& pc);

// Translate the [solver] section; `horizon` resolves dt into a step count
// over the initial window.
PicardConfig build_picard(const SolverConfig& sc, double horizon);

Scheme parse_scheme(const std::string& name);

// Typed access to experiment parameters; missing keys yield the fallback,
// malformed values throw ConfigError.
double param_double(const ExperimentConfig& e, const std::string& key,
                    double fallback);
std::size_t param_size(const ExperimentConfig& e, const std::string& key,
                       std::size_t fallback);
std::string param_string(const ExperimentConfig& e, const std::string& key,
                         const std::string& fallback);
std::vector<double> param_doubles(const ExperimentConfig& e,
                                  const std::string& key,
                                  std::vector<double> fallback);
std::vector<std::size_t> param_sizes(const ExperimentConfig& e,
                                     const std::string& key,
                                     std::vector<std::size_t> fallback);

}  // namespace dynbc
