#include <doctest.h>

#include <string>

#include "dynbc/config.hpp"
#include "dynbc/errors.hpp"
#include "dynbc/expr.hpp"

using namespace dynbc;

namespace {

// Message of the ConfigError thrown by fn; fails the test when nothing is
// thrown.
template <typename Fn>
std::string config_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  FAIL("expected a ConfigError");
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("minimal config fills every default") {
  const char* text =
      "[problem]\n"
      "a_xx = \"1\"\n"
      "b_x = \"2*x - 1\"\n"
      "[experiment]\n"
      "name = validate\n";
  RunConfig c = parse_config(text, "mem");
  CHECK(c.problem.geometry == "interval");
  CHECK(c.problem.x_lo == 0.0);
  CHECK(c.problem.x_hi == 1.0);
  CHECK(c.problem.n_nodes == 33);
  CHECK(c.problem.a_xx == "1");
  CHECK(c.problem.a_xy == "0");
  CHECK(c.problem.f == "0");
  CHECK(c.problem.b_x == "2*x - 1");
  CHECK(c.problem.h == "0");
  CHECK(c.problem.u0 == "0");
  CHECK(c.problem.T == 0.1);
  CHECK(c.problem.beta == 0.5);
  CHECK(c.solver.scheme == "implicit-euler");
  CHECK(c.solver.n_steps == 16);
  CHECK(c.solver.dt == 0.0);
  CHECK(c.solver.tol_fp == 1e-10);
  CHECK(c.solver.max_iterations == 30);
  CHECK(c.solver.rho_max == 0.5);
  CHECK(c.solver.shrink == 0.5);
  CHECK(c.experiment.name == "validate");
  CHECK(c.experiment.params.empty());
}

TEST_CASE("boundary drift referencing the gradient is rejected at load") {
  const char* text =
      "[problem]\n"
      "a_xx = \"1\"\n"
      "b_x = \"p1\"\n";
  const std::string msg = config_error([&] { parse_config(text, "mem"); });
  CHECK(contains(msg, "mem"));
  CHECK(contains(msg, "p1"));
}

TEST_CASE("serialize round-trips and is idempotent") {
  RunConfig c = preset_config("strip-tangential");
  c.problem.n_x = 16;
  c.problem.beta = 0.375;
  c.solver.scheme = "crank-nicolson";
  c.solver.dt = 0.0125;
  c.solver.n_steps = 0;
  c.solver.radius = 2.5;
  c.experiment.name = "contraction";
  c.experiment.params = {{"taus", "0.04,0.01"}, {"ratio_lo", "1.5"}};

  const std::string text = serialize(c);
  RunConfig back = parse_config(text, "roundtrip");
  CHECK(back == c);
  CHECK(serialize(back) == text);
  CHECK(config_digest(back) == config_digest(c));

  SUBCASE("digest tracks content") {
    RunConfig other = c;
    other.problem.beta = 0.5;
    CHECK(config_digest(other) != config_digest(c));
  }
}

TEST_CASE("interval aliases map onto the canonical keys") {
  const char* text =
      "[problem]\n"
      "a_2 = \"1 + u*u\"\n"
      "b_1 = \"2*x - 1\"\n"
      "f = \"4*x*(1 - x)\"\n";
  RunConfig c = parse_config(text, "mem");
  CHECK(c.problem.a_xx == "1 + u*u");
  CHECK(c.problem.b_x == "2*x - 1");

  const std::string dup =
      "[problem]\n"
      "a_xx = \"1\"\n"
      "a_2 = \"2\"\n"
      "b_x = \"2*x - 1\"\n";
  CHECK(contains(config_error([&] { parse_config(dup, "mem"); }),
                 "duplicate [problem] key 'a_xx'"));
}

TEST_CASE("parse errors carry origin and line") {
  struct Case {
    const char* text;
    const char* fragment;
  };
  const Case cases[] = {
      {"x_lo = 0\n", "outside any [section]"},
      {"[problem\n", "malformed section header"},
      {"[frobnicate]\n", "unknown section"},
      {"[problem]\nwibble = 3\n", "unknown [problem] key"},
      {"[problem]\nT 3\n", "expected 'key = value'"},
      {"[problem]\nT = \"0.1\n", "unterminated quoted value"},
      {"[problem]\nT = zebra\n", "expected a number"},
      {"[problem]\nn_nodes = -4\n", "non-negative integer"},
      {"[problem]\nT = 0.1\nT = 0.2\n", "duplicate [problem] key"},
      {"[solver]\nwarp = 9\n", "unknown [solver] key"},
      {"[solver]\nn_steps = 8\ndt = 0.1\n", "either dt or n_steps"},
      {"[solver]\ndt = 0.1\nn_steps = 8\n", "either dt or n_steps"},
      {"[solver]\nscheme = leapfrog\n", "scheme must be"},
      {"[problem]\ngeometry = torus\n", "geometry must be"},
      {"[problem]\nT = 0.1\npreset = heat-dynbc\n",
       "preset must come before"},
      {"[problem]\npreset = banana\n", "unknown preset"},
      {"[experiment]\nname = fly\n", "unknown experiment"},
      {"[experiment]\nname = solve\ntaus = \"1\"\n",
       "unknown key 'taus' for experiment 'solve'"},
      {"[experiment]\ntaus = \"1\"\n", "parameters require a 'name'"},
      {"[problem]\nf = \"2 +\"\n", "problem.f"},
  };
  for (const Case& tc : cases) {
    CAPTURE(tc.text);
    const std::string msg =
        config_error([&] { parse_config(tc.text, "origin.ini"); });
    CHECK(contains(msg, "origin.ini"));
    CHECK(contains(msg, tc.fragment));
  }
  // Line numbers point at the offending line.
  const std::string msg =
      config_error([&] { parse_config("[problem]\n\n# c\nT = cat\n", "o"); });
  CHECK(contains(msg, "o:4:"));
}

TEST_CASE("presets are complete and overridable") {
  RunConfig heat = preset_config("heat-dynbc");
  CHECK(heat.problem.a_xx == "1");
  CHECK(heat.problem.b_x == "2*x - 1");
  CHECK(heat.problem.T == 0.16);

  RunConfig quasi = preset_config("quasilinear-1+u2");
  CHECK(quasi.problem.a_xx == "1 + u*u");
  CHECK(quasi.problem.f == "3 + u");
  CHECK(quasi.problem.u0 == "x*(1 - x)");
  // The preset's data is exactly compatible at t = 0.
  CHECK(check_compatibility(build_problem(quasi.problem)).max_abs == 0.0);

  RunConfig strip = preset_config("strip-tangential");
  CHECK(strip.problem.geometry == "strip");
  CHECK(strip.problem.a_xy == "0.25");
  CHECK(strip.problem.b_x == "0.5");

  // Every preset materializes into a valid, elliptic, transversal problem.
  for (const char* name :
       {"heat-dynbc", "quasilinear-1+u2", "strip-tangential"}) {
    CAPTURE(name);
    RunConfig c = preset_config(name);
    ProblemSpec spec = build_problem(c.problem);
    NonlinearEllipticity nu = check_nonlinear_ellipticity(spec, SampleBox{});
    CHECK(nu.nu_interior > 0.0);
    CHECK(nu.nu_boundary > 0.0);
  }

  const char* text =
      "[problem]\n"
      "preset = quasilinear-1+u2\n"
      "T = 0.08\n"
      "[solver]\n"
      "n_steps = 8\n";
  RunConfig c = parse_config(text, "mem");
  CHECK(c.problem.a_xx == "1 + u*u");
  CHECK(c.problem.T == 0.08);
  CHECK(c.solver.n_steps == 8);
}

TEST_CASE("build_problem samples the initial expression on the grid") {
  ProblemConfig pc;
  pc.a_xx = "1";
  pc.b_x = "2*x - 1";
  pc.u0 = "x*(1 - x)";
  pc.n_nodes = 5;
  ProblemSpec spec = build_problem(pc);
  REQUIRE(spec.u0.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const double x = spec.grid.position(i)[0];
    CHECK(spec.u0[i] == x * (1.0 - x));
  }

  pc.u0 = "t";
  CHECK(contains(config_error([&] { build_problem(pc); }),
                 "u0 may only reference x"));
  pc.u0 = "y";
  CHECK(contains(config_error([&] { build_problem(pc); }),
                 "u0 may only reference x"));
}

TEST_CASE("build_picard resolves dt against the window span") {
  SolverConfig sc;
  sc.dt = 0.0025;
  sc.n_steps = 0;
  PicardConfig pc = build_picard(sc, 0.04);
  CHECK(pc.n_steps == 16);
  CHECK(pc.scheme == Scheme::ImplicitEuler);

  sc.window = 0.01;  // dt now resolves against the window, not the horizon
  CHECK(build_picard(sc, 0.04).n_steps == 4);

  sc.scheme = "crank-nicolson";
  CHECK(build_picard(sc, 0.04).scheme == Scheme::CrankNicolson);

  SolverConfig bad;
  bad.shrink = 1.0;
  CHECK(contains(config_error([&] { build_picard(bad, 0.1); }),
                 "shrink"));
}

TEST_CASE("experiment parameters parse through the typed getters") {
  ExperimentConfig e;
  e.name = "contraction";
  e.params = {{"taus", "0.04, 0.01"},
              {"ratio_lo", "1.5"},
              {"max_iterations_allowed", "8"},
              {"family", "time-sup"},
              {"empty", ""}};
  CHECK(param_double(e, "ratio_lo", 0.0) == 1.5);
  CHECK(param_double(e, "missing", 2.5) == 2.5);
  CHECK(param_size(e, "max_iterations_allowed", 0) == 8);
  CHECK(param_string(e, "family", "?") == "time-sup");
  CHECK(param_doubles(e, "taus", {}) == std::vector<double>{0.04, 0.01});
  CHECK(param_doubles(e, "empty", {1.0}).empty());
  CHECK(param_sizes(e, "missing", {1, 2}) == std::vector<std::size_t>{1, 2});
  CHECK_THROWS_AS((void)param_double(e, "family", 0.0), ConfigError);
  CHECK_THROWS_AS((void)param_sizes(e, "taus", {}), ConfigError);
}
