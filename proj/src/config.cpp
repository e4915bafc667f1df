#include "dynbc/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dynbc/errors.hpp"
#include "dynbc/expr.hpp"

namespace dynbc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Where an error happened; every message carries origin:line.
struct Where {
  const std::string& origin;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }
};

double to_double(const std::string& v, const Where& w) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    w.fail("expected a number, got '" + v + "'");
  return x;
}

std::size_t to_size(const std::string& v, const Where& w) {
  if (v.empty() || v[0] == '-' || v[0] == '+')
    w.fail("expected a non-negative integer, got '" + v + "'");
  const char* begin = v.c_str();
  char* end = nullptr;
  const unsigned long long x = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0')
    w.fail("expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  const std::string_view whole{v};
  if (trim(whole).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = whole.find(',', start);
    out.emplace_back(trim(whole.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Expression keys of [problem]; value of parse-check at load time.
void check_expression(const std::string& text, const std::string& key,
                      const Where& w) {
  try {
    expr::parse(text);
  } catch (const ParseError& e) {
    w.fail("problem." + key + ": " + e.what());
  }
}

const std::set<std::string>& problem_keys() {
  static const std::set<std::string> keys = {
      "geometry", "x_lo", "x_hi", "n_nodes", "period", "n_x", "n_y",
      "a_xx",     "a_xy", "a_yy", "f",       "b_x",    "b_y", "h",
      "u0",       "T",    "beta", "preset"};
  return keys;
}

const std::set<std::string>& solver_keys() {
  static const std::set<std::string> keys = {
      "scheme",  "n_steps",        "dt",      "window", "radius",
      "tol_fp",  "max_iterations", "rho_max", "shrink"};
  return keys;
}

const std::map<std::string, std::set<std::string>>& experiment_params() {
  static const std::map<std::string, std::set<std::string>> allow = {
      {"validate", {"u_lo", "u_hi", "p_lo", "p_hi", "samples"}},
      {"solve", {}},
      {"mms-converge",
       {"exact", "space_factors", "space_run_steps", "time_factors",
        "time_base_steps", "time_space_factor", "spatial_order_min",
        "temporal_order_lo", "temporal_order_hi", "nullity_tol"}},
      {"scaling", {"family", "thetas", "horizons", "slope_tol_lo",
                   "slope_tol_hi"}},
      {"contraction", {"taus", "ratio_lo", "ratio_hi",
                       "max_iterations_allowed"}},
      {"uniqueness", {"offset_scale", "spread_factor"}},
      {"compat-necessity", {"step_ladder", "growth_min", "stable_band"}}};
  return allow;
}

enum class Section { None, Problem, Solver, Experiment };

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "validate",    "solve",      "mms-converge",    "scaling",
      "contraction", "uniqueness", "compat-necessity"};
  return names;
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  if (name == "heat-dynbc") {
    c.problem.geometry = "interval";
    c.problem.n_nodes = 33;
    c.problem.a_xx = "1";
    c.problem.f = "0";
    c.problem.b_x = "2*x - 1";
    c.problem.h = "0";
    c.problem.u0 = "0";
    c.problem.T = 0.16;
  } else if (name == "quasilinear-1+u2") {
    // u0 = x(1-x) keeps the nonlinearity active at the initial state and is
    // exactly compatible: a(u0) u0'' + f + b u0' - h = -2 + 3 - 1 - 0 = 0 at
    // both endpoints (u0 vanishes there, so the u-term in f drops out).  The
    // linear u-coupling in f makes the measured contraction factor scale like
    // the square root of the window length, which is the regime the
    // contraction experiment is built to exhibit.
    c.problem.geometry = "interval";
    c.problem.n_nodes = 33;
    c.problem.a_xx = "1 + u*u";
    c.problem.f = "3 + u";
    c.problem.b_x = "2*x - 1";
    c.problem.h = "0";
    c.problem.u0 = "x*(1 - x)";
    c.problem.T = 0.04;
  } else if (name == "strip-tangential") {
    c.problem.geometry = "strip";
    c.problem.period = 1.0;
    c.problem.n_x = 24;
    c.problem.n_y = 13;
    c.problem.a_xx = "1";
    c.problem.a_xy = "0.25";
    c.problem.a_yy = "1";
    c.problem.f = "0";
    c.problem.b_x = "0.5";  // tangential along the periodic direction
    c.problem.b_y = "2*y - 1";
    c.problem.h = "0";
    c.problem.u0 = "0";
    c.problem.T = 0.1;
  } else {
    throw ConfigError("unknown preset '" + name +
                      "' (have heat-dynbc, quasilinear-1+u2, strip-tangential)");
  }
  return c;
}

RunConfig parse_config(std::string_view text, const std::string& origin) {
  RunConfig cfg;
  Section section = Section::None;
  bool body_touched = false;  // any problem/solver key seen (preset gate)
  bool steps_seen = false, dt_seen = false;
  std::set<std::string> seen_problem, seen_solver, seen_experiment;
  // Experiment params are checked against the allowlist once the name is
  // known; remember where each appeared.
  std::vector<std::size_t> param_lines;
  std::size_t experiment_section_line = 0;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    const Where w{origin, lineno};

    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') w.fail("malformed section header");
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name == "problem") section = Section::Problem;
      else if (name == "solver") section = Section::Solver;
      else if (name == "experiment") {
        section = Section::Experiment;
        experiment_section_line = lineno;
      } else
        w.fail("unknown section '[" + std::string(name) + "]'");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) w.fail("expected 'key = value'");
    const std::string key{trim(line.substr(0, eq))};
    std::string value{trim(line.substr(eq + 1))};
    if (key.empty()) w.fail("empty key");
    if (value.size() >= 1 && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        w.fail("unterminated quoted value");
      value = value.substr(1, value.size() - 2);
    }

    switch (section) {
      case Section::None:
        w.fail("key '" + key + "' outside any [section]");
        break;

      case Section::Problem: {
        // Interval-style aliases for the single second-order and boundary
        // drift coefficients.
        std::string canon = key;
        if (canon == "a_2") canon = "a_xx";
        if (canon == "b_1") canon = "b_x";
        if (!problem_keys().count(canon))
          w.fail("unknown [problem] key '" + key + "'");
        if (!seen_problem.insert(canon).second)
          w.fail("duplicate [problem] key '" + canon + "'");
        if (canon == "preset") {
          if (body_touched)
            w.fail("preset must come before any problem or solver overrides");
          RunConfig base;
          try {
            base = preset_config(value);
          } catch (const ConfigError& e) {
            w.fail(e.what());
          }
          cfg.problem = base.problem;
          cfg.solver = base.solver;
        } else if (canon == "geometry") {
          if (value != "interval" && value != "strip")
            w.fail("geometry must be 'interval' or 'strip'");
          cfg.problem.geometry = value;
        } else if (canon == "x_lo") cfg.problem.x_lo = to_double(value, w);
        else if (canon == "x_hi") cfg.problem.x_hi = to_double(value, w);
        else if (canon == "n_nodes") cfg.problem.n_nodes = to_size(value, w);
        else if (canon == "period") cfg.problem.period = to_double(value, w);
        else if (canon == "n_x") cfg.problem.n_x = to_size(value, w);
        else if (canon == "n_y") cfg.problem.n_y = to_size(value, w);
        else if (canon == "T") cfg.problem.T = to_double(value, w);
        else if (canon == "beta") cfg.problem.beta = to_double(value, w);
        else {
          check_expression(value, canon, w);
          if (canon == "a_xx") cfg.problem.a_xx = value;
          else if (canon == "a_xy") cfg.problem.a_xy = value;
          else if (canon == "a_yy") cfg.problem.a_yy = value;
          else if (canon == "f") cfg.problem.f = value;
          else if (canon == "b_x") cfg.problem.b_x = value;
          else if (canon == "b_y") cfg.problem.b_y = value;
          else if (canon == "h") cfg.problem.h = value;
          else cfg.problem.u0 = value;
        }
        body_touched = true;
        break;
      }

      case Section::Solver: {
        if (!solver_keys().count(key))
          w.fail("unknown [solver] key '" + key + "'");
        if (!seen_solver.insert(key).second)
          w.fail("duplicate [solver] key '" + key + "'");
        if (key == "scheme") {
          if (value != "implicit-euler" && value != "crank-nicolson")
            w.fail("scheme must be 'implicit-euler' or 'crank-nicolson'");
          cfg.solver.scheme = value;
        } else if (key == "n_steps") {
          steps_seen = true;
          if (dt_seen) w.fail("give either dt or n_steps, not both");
          cfg.solver.n_steps = to_size(value, w);
          cfg.solver.dt = 0.0;
        } else if (key == "dt") {
          dt_seen = true;
          if (steps_seen) w.fail("give either dt or n_steps, not both");
          cfg.solver.dt = to_double(value, w);
          cfg.solver.n_steps = 0;
        } else if (key == "window") cfg.solver.window = to_double(value, w);
        else if (key == "radius") cfg.solver.radius = to_double(value, w);
        else if (key == "tol_fp") cfg.solver.tol_fp = to_double(value, w);
        else if (key == "max_iterations")
          cfg.solver.max_iterations = to_size(value, w);
        else if (key == "rho_max") cfg.solver.rho_max = to_double(value, w);
        else cfg.solver.shrink = to_double(value, w);
        body_touched = true;
        break;
      }

      case Section::Experiment: {
        if (!seen_experiment.insert(key).second)
          w.fail("duplicate [experiment] key '" + key + "'");
        if (key == "name") {
          const auto& names = experiment_names();
          if (std::find(names.begin(), names.end(), value) == names.end())
            w.fail("unknown experiment '" + value + "'");
          cfg.experiment.name = value;
        } else {
          cfg.experiment.params.emplace_back(key, value);
          param_lines.push_back(lineno);
        }
        break;
      }
    }
  }

  // Allowlist check once the experiment id is known.
  if (!cfg.experiment.params.empty()) {
    if (cfg.experiment.name.empty()) {
      Where w{origin, experiment_section_line};
      w.fail("[experiment] parameters require a 'name' key");
    }
    const auto& allow = experiment_params().at(cfg.experiment.name);
    for (std::size_t i = 0; i < cfg.experiment.params.size(); ++i) {
      if (!allow.count(cfg.experiment.params[i].first)) {
        Where w{origin, param_lines[i]};
        w.fail("unknown key '" + cfg.experiment.params[i].first +
               "' for experiment '" + cfg.experiment.name + "'");
      }
    }
  }

  // Materialize once so semantic problems surface at load time.
  try {
    const ProblemSpec spec = build_problem(cfg.problem);
    (void)build_picard(cfg.solver, spec.horizon);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string serialize(const RunConfig& c) {
  std::ostringstream out;
  const auto num = [](double v) { return format_double(v); };
  out << "[problem]\n";
  out << "geometry = " << c.problem.geometry << "\n";
  out << "x_lo = " << num(c.problem.x_lo) << "\n";
  out << "x_hi = " << num(c.problem.x_hi) << "\n";
  out << "n_nodes = " << c.problem.n_nodes << "\n";
  out << "period = " << num(c.problem.period) << "\n";
  out << "n_x = " << c.problem.n_x << "\n";
  out << "n_y = " << c.problem.n_y << "\n";
  out << "a_xx = \"" << c.problem.a_xx << "\"\n";
  out << "a_xy = \"" << c.problem.a_xy << "\"\n";
  out << "a_yy = \"" << c.problem.a_yy << "\"\n";
  out << "f = \"" << c.problem.f << "\"\n";
  out << "b_x = \"" << c.problem.b_x << "\"\n";
  out << "b_y = \"" << c.problem.b_y << "\"\n";
  out << "h = \"" << c.problem.h << "\"\n";
  out << "u0 = \"" << c.problem.u0 << "\"\n";
  out << "T = " << num(c.problem.T) << "\n";
  out << "beta = " << num(c.problem.beta) << "\n";
  out << "\n[solver]\n";
  out << "scheme = " << c.solver.scheme << "\n";
  if (c.solver.dt > 0.0)
    out << "dt = " << num(c.solver.dt) << "\n";
  else
    out << "n_steps = " << c.solver.n_steps << "\n";
  out << "window = " << num(c.solver.window) << "\n";
  out << "radius = " << num(c.solver.radius) << "\n";
  out << "tol_fp = " << num(c.solver.tol_fp) << "\n";
  out << "max_iterations = " << c.solver.max_iterations << "\n";
  out << "rho_max = " << num(c.solver.rho_max) << "\n";
  out << "shrink = " << num(c.solver.shrink) << "\n";
  out << "\n[experiment]\n";
  if (!c.experiment.name.empty())
    out << "name = " << c.experiment.name << "\n";
  for (const auto& [key, value] : c.experiment.params)
    out << key << " = \"" << value << "\"\n";
  return out.str();
}

std::string config_digest(const RunConfig& c) {
  const std::string text = serialize(c);
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char byte : text) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

ProblemSpec build_problem(const ProblemConfig& pc) {
  Grid grid = pc.geometry == "strip"
                  ? Grid::strip(pc.period, pc.n_x, pc.n_y)
                  : Grid::interval(pc.x_lo, pc.x_hi, pc.n_nodes);

  const auto parse_field = [](const std::string& text, const char* key) {
    try {
      return expr::parse(text);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("problem.") + key + ": " + e.what());
    }
  };

  Ast u0_expr = parse_field(pc.u0, "u0");
  for (expr::Var v : {expr::Var::T, expr::Var::U, expr::Var::P1,
                      expr::Var::P2})
    if (u0_expr.uses(v))
      throw ConfigError(std::string("problem.u0 may only reference x") +
                        (pc.geometry == "strip" ? " and y" : ""));
  if (pc.geometry != "strip" && u0_expr.uses(expr::Var::Y))
    throw ConfigError("problem.u0 may only reference x");

  std::vector<double> u0(grid.num_nodes());
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    expr::EvalContext ctx;
    const auto p = grid.position(i);
    ctx.set(expr::Var::X, p[0]);
    if (pc.geometry == "strip") ctx.set(expr::Var::Y, p[1]);
    u0[i] = expr::eval(u0_expr, ctx);
  }

  ProblemSpec spec{std::move(grid),
                   pc.T,
                   pc.beta,
                   parse_field(pc.a_xx, "a_xx"),
                   parse_field(pc.a_xy, "a_xy"),
                   parse_field(pc.a_yy, "a_yy"),
                   parse_field(pc.f, "f"),
                   parse_field(pc.b_x, "b_x"),
                   parse_field(pc.b_y, "b_y"),
                   parse_field(pc.h, "h"),
                   std::move(u0)};
  validate_spec(spec);
  return spec;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "implicit-euler") return Scheme::ImplicitEuler;
  if (name == "crank-nicolson") return Scheme::CrankNicolson;
  throw ConfigError("unknown scheme '" + name + "'");
}

PicardConfig build_picard(const SolverConfig& sc, double horizon) {
  PicardConfig pc;
  pc.scheme = parse_scheme(sc.scheme);
  pc.window = sc.window;
  pc.radius = sc.radius;
  pc.tol_fp = sc.tol_fp;
  pc.max_iterations = sc.max_iterations;
  pc.rho_max = sc.rho_max;
  pc.shrink = sc.shrink;
  if (sc.window < 0.0) throw ConfigError("solver.window must be >= 0");
  if (sc.radius < 0.0) throw ConfigError("solver.radius must be >= 0");
  if (!(sc.tol_fp > 0.0)) throw ConfigError("solver.tol_fp must be positive");
  if (sc.max_iterations == 0)
    throw ConfigError("solver.max_iterations must be >= 1");
  if (!(sc.rho_max > 0.0)) throw ConfigError("solver.rho_max must be positive");
  if (!(sc.shrink > 0.0 && sc.shrink < 1.0))
    throw ConfigError("solver.shrink must lie in (0, 1)");
  if (sc.dt > 0.0) {
    const double span =
        sc.window > 0.0 ? std::min(sc.window, horizon) : horizon;
    pc.n_steps = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(span / sc.dt)));
  } else {
    if (sc.n_steps == 0)
      throw ConfigError("solver needs a positive n_steps or dt");
    pc.n_steps = sc.n_steps;
  }
  return pc;
}

namespace {

const std::string* find_param(const ExperimentConfig& e,
                              const std::string& key) {
  for (const auto& [k, v] : e.params)
    if (k == key) return &v;
  return nullptr;
}

Where param_where() {
  static const std::string origin = "experiment parameter";
  return Where{origin, 0};
}

}  // namespace

double param_double(const ExperimentConfig& e, const std::string& key,
                    double fallback) {
  const std::string* v = find_param(e, key);
  if (!v) return fallback;
  try {
    return to_double(*v, param_where());
  } catch (const ConfigError&) {
    throw ConfigError("experiment parameter '" + key + "': expected a number, got '" +
                      *v + "'");
  }
}

std::size_t param_size(const ExperimentConfig& e, const std::string& key,
                       std::size_t fallback) {
  const std::string* v = find_param(e, key);
  if (!v) return fallback;
  try {
    return to_size(*v, param_where());
  } catch (const ConfigError&) {
    throw ConfigError("experiment parameter '" + key +
                      "': expected a non-negative integer, got '" + *v + "'");
  }
}

std::string param_string(const ExperimentConfig& e, const std::string& key,
                         const std::string& fallback) {
  const std::string* v = find_param(e, key);
  return v ? *v : fallback;
}

std::vector<double> param_doubles(const ExperimentConfig& e,
                                  const std::string& key,
                                  std::vector<double> fallback) {
  const std::string* v = find_param(e, key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(*v)) {
    try {
      out.push_back(to_double(item, param_where()));
    } catch (const ConfigError&) {
      throw ConfigError("experiment parameter '" + key +
                        "': expected a number list, got '" + *v + "'");
    }
  }
  return out;
}

std::vector<std::size_t> param_sizes(const ExperimentConfig& e,
                                     const std::string& key,
                                     std::vector<std::size_t> fallback) {
  const std::string* v = find_param(e, key);
  if (!v) return fallback;
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(*v)) {
    try {
      out.push_back(to_size(item, param_where()));
    } catch (const ConfigError&) {
      throw ConfigError("experiment parameter '" + key +
                        "': expected an integer list, got '" + *v + "'");
    }
  }
  return out;
}

}  // namespace dynbc
