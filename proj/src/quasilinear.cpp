#include "dynbc/quasilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynbc/holder.hpp"

namespace dynbc {

namespace {

bool is_strip(const Grid& g) { return g.kind() == GridKind::Strip; }

void require_zero_ast(const expr::Ast& a, const char* name) {
  if (!(a.is_constant() && a.constant_value() == 0.0))
    throw InvalidArgument(std::string("ProblemSpec: ") + name +
                          " must be identically zero on an interval grid");
}

void forbid_var(const expr::Ast& a, expr::Var v, const char* name) {
  if (a.uses(v))
    throw InvalidArgument(std::string("ProblemSpec: ") + name +
                          " may not reference " + expr::var_name(v));
}

// t/x/y bindings of one node; the caller adds u and the gradient slots.
expr::EvalContext node_context(const Grid& g, double t, std::size_t node) {
  auto p = g.position(node);
  expr::EvalContext ctx;
  ctx.set(expr::Var::T, t).set(expr::Var::X, p[0]);
  if (is_strip(g)) ctx.set(expr::Var::Y, p[1]);
  return ctx;
}

struct CompatDetail {
  CompatibilityResidual res;
  double scale = 0.0;  // largest sum of |term| magnitudes over the boundary
};

// Residual of the interior and boundary evolution laws agreeing on the
// boundary at time t, with the nonlinearities evaluated along `u`.
CompatDetail compatibility_at(const ProblemSpec& spec,
                              std::span<const double> u, double t) {
  const Grid& g = spec.grid;
  const bool st = is_strip(g);
  std::vector<double> dx = derivative_field(g, u, Axis::X);
  std::vector<double> dxx = second_derivative_field(g, u, Deriv2::XX);
  std::vector<double> dy, dxy, dyy;
  if (st) {
    dy = derivative_field(g, u, Axis::Y);
    dxy = second_derivative_field(g, u, Deriv2::XY);
    dyy = second_derivative_field(g, u, Deriv2::YY);
  }
  CompatDetail out;
  out.res.residual.reserve(g.boundary().size());
  for (const auto& bn : g.boundary()) {
    const std::size_t i = bn.node;
    expr::EvalContext ctx = node_context(g, t, i);
    ctx.set(expr::Var::U, u[i]).set(expr::Var::P1, dx[i]);
    if (st) ctx.set(expr::Var::P2, dy[i]);
    double a_term = expr::eval(spec.axx, ctx) * dxx[i];
    if (st)
      a_term += 2.0 * expr::eval(spec.axy, ctx) * dxy[i] +
                expr::eval(spec.ayy, ctx) * dyy[i];
    const double f_term = expr::eval(spec.f, ctx);
    expr::EvalContext bctx = node_context(g, t, i);
    bctx.set(expr::Var::U, u[i]);
    double b_term = expr::eval(spec.bx, bctx) * dx[i];
    if (st) b_term += expr::eval(spec.by, bctx) * dy[i];
    const double h_term = expr::eval(spec.h, bctx);
    const double r = a_term + f_term + b_term - h_term;
    out.res.residual.push_back(r);
    out.res.max_abs = std::max(out.res.max_abs, std::abs(r));
    out.scale = std::max(out.scale, std::abs(a_term) + std::abs(f_term) +
                                        std::abs(b_term) + std::abs(h_term));
  }
  return out;
}

double max_spacing(const Grid& g) {
  double h = g.spacing(Axis::X);
  if (is_strip(g)) h = std::max(h, g.spacing(Axis::Y));
  return h;
}

double compatibility_tolerance(const Grid& g, double dt, double scale) {
  const double h = max_spacing(g);
  return 10.0 * (h * h + dt) * (1.0 + scale);
}

// Nemytskii substitution without the initial-condition check; shared by the
// public freeze and by the Lipschitz probe (whose fields are arbitrary).
LinearProblem freeze_impl(const ProblemSpec& spec, const SpaceTimeField& U) {
  const Grid& g = spec.grid;
  const TimeGrid& tg = U.time();
  const bool st = is_strip(g);
  const std::size_t n_nodes = g.num_nodes();

  std::vector<std::vector<double>> dx(tg.num_levels());
  std::vector<std::vector<double>> dy(tg.num_levels());
  for (std::size_t n = 0; n < tg.num_levels(); ++n) {
    dx[n] = derivative_field(g, U.level(n), Axis::X);
    if (st) dy[n] = derivative_field(g, U.level(n), Axis::Y);
  }

  // Constant expressions freeze to plain constants (this also keeps the
  // sparse pattern of vanishing entries lean); everything else becomes a
  // table on U's own ladder.
  auto frozen = [&](const expr::Ast& a, bool with_gradient) -> Coefficient {
    if (a.is_constant()) return Coefficient(a.constant_value());
    SpaceTimeField tab(tg, n_nodes);
    for (std::size_t n = 0; n < tg.num_levels(); ++n) {
      const double t = tg.t(n);
      auto uu = U.level(n);
      auto lev = tab.level(n);
      for (std::size_t i = 0; i < n_nodes; ++i) {
        expr::EvalContext ctx = node_context(g, t, i);
        ctx.set(expr::Var::U, uu[i]);
        if (with_gradient) {
          ctx.set(expr::Var::P1, dx[n][i]);
          if (st) ctx.set(expr::Var::P2, dy[n][i]);
        }
        lev[i] = expr::eval(a, ctx);
      }
    }
    return Coefficient(std::move(tab));
  };

  LinearCoefficients c;
  c.axx = frozen(spec.axx, true);
  if (st) {
    c.axy = frozen(spec.axy, true);
    c.ayy = frozen(spec.ayy, true);
    c.by = frozen(spec.by, false);
  }
  c.bx = frozen(spec.bx, false);
  Coefficient f = frozen(spec.f, true);
  Coefficient h = frozen(spec.h, false);
  return LinearProblem{g, tg, std::move(c), std::move(f), std::move(h),
                       spec.u0};
}

double effective_radius(const ProblemSpec& spec, const PicardConfig& cfg) {
  if (cfg.radius > 0.0) return cfg.radius;
  return 1.0 + 2.0 * space_norm(spec.u0, spec.grid, 1, spec.beta);
}

void validate_config(const PicardConfig& cfg) {
  if (cfg.radius < 0.0)
    throw InvalidArgument("PicardConfig: radius must be >= 0");
  if (cfg.window < 0.0)
    throw InvalidArgument("PicardConfig: window must be >= 0");
  if (cfg.n_steps < 1)
    throw InvalidArgument("PicardConfig: need at least one time step");
  if (!(cfg.tol_fp > 0.0))
    throw InvalidArgument("PicardConfig: tol_fp must be positive");
  if (cfg.max_iterations < 1)
    throw InvalidArgument("PicardConfig: need at least one iteration");
  if (!(cfg.rho_max > 0.0))
    throw InvalidArgument("PicardConfig: rho_max must be positive");
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0))
    throw InvalidArgument("PicardConfig: shrink factor must lie in (0,1)");
}

struct WindowOutcome {
  bool converged = false;
  std::optional<DiscreteSolution> sol;
  std::vector<IterationRecord> iters;
  std::size_t solves = 0;
};

// One fixed-window fixed-point run. Starts from the frozen-at-u0 iterate (or
// from `seed` when given), iterates solve(freeze(.)), and stops on
// convergence, on leaving the ball of radius R around the initial iterate,
// or -- when `shrink_on_ratio` holds -- on a contraction ratio reaching
// rho_max (the caller then shrinks the window). Exhausting max_iterations
// throws.
WindowOutcome run_window(const ProblemSpec& spec, const TimeGrid& window,
                         double R, const PicardConfig& cfg,
                         const SpaceTimeField* seed, bool shrink_on_ratio) {
  DiscreteSolution initial = build_initial_iterate(spec, window, cfg.scheme);
  WindowOutcome out;
  out.solves = 1;
  const SpaceTimeField anchor = initial.u;
  SpaceTimeField prev = seed ? *seed : initial.u;
  double d_prev = -1.0;
  for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
    DiscreteSolution next = solve_linear(freeze_impl(spec, prev), cfg.scheme);
    ++out.solves;
    const double d = picard_metric(next.u, prev, spec.grid, spec.beta);
    if (d <= cfg.tol_fp) {
      // Converged. No ratio is recorded for this step: with both increments
      // at the tolerance floor the quotient is noise.
      out.iters.push_back(IterationRecord{d, 0.0, false});
      out.converged = true;
      out.sol = std::move(next);
      return out;
    }
    IterationRecord rec{d, 0.0, false};
    if (d_prev > 0.0) {
      rec.has_ratio = true;
      rec.ratio = d / d_prev;
    }
    out.iters.push_back(rec);
    const double ball = picard_metric(next.u, anchor, spec.grid, spec.beta);
    if (ball > R) return out;  // left the ball: caller shrinks or fails
    if (shrink_on_ratio && rec.has_ratio && rec.ratio >= cfg.rho_max)
      return out;
    d_prev = d;
    prev = std::move(next.u);
  }
  throw SolverError(
      "fixed-point iteration did not converge within max_iterations");
}

struct SolvedWindow {
  DiscreteSolution sol;
  IterationTrace trace;
  double tau = 0.0;
  std::size_t n_steps = 0;
};

// Adaptive wrapper: run the window, and on a ball exit or a ratio breach
// shrink the step count by cfg.shrink (keeping dt) and retry.
SolvedWindow solve_window_adaptive(const ProblemSpec& spec, double t_start,
                                   double tau_init, std::size_t n_init,
                                   double R, const PicardConfig& cfg) {
  IterationTrace trace;
  double tau = tau_init;
  std::size_t n = n_init;
  for (;;) {
    TimeGrid window(t_start, tau, n);
    WindowOutcome o = run_window(spec, window, R, cfg, nullptr, true);
    trace.linear_solves += o.solves;
    trace.windows.push_back(
        WindowRecord{t_start, tau, o.iters.size(), o.converged});
    trace.iterations = std::move(o.iters);
    if (o.converged) {
      trace.converged = true;
      trace.tau_used = tau;
      return SolvedWindow{std::move(*o.sol), std::move(trace), tau, n};
    }
    auto n_new = static_cast<std::size_t>(std::floor(cfg.shrink *
                                                     static_cast<double>(n)));
    if (n_new >= n) n_new = n - 1;
    if (n_new < 1)
      throw SolverError(
          "window shrunk below one time step without contracting (t = " +
          format_double(t_start) + ")");
    tau = window.dt() * static_cast<double>(n_new);
    n = n_new;
  }
}

double initial_window(const ProblemSpec& spec, const PicardConfig& cfg) {
  return cfg.window > 0.0 ? std::min(cfg.window, spec.horizon) : spec.horizon;
}

}  // namespace

void validate_spec(const ProblemSpec& spec) {
  if (!(spec.beta > 0.0 && spec.beta < 1.0))
    throw InvalidArgument("ProblemSpec: beta must lie in (0,1)");
  if (!(spec.horizon > 0.0))
    throw InvalidArgument("ProblemSpec: horizon must be positive");
  if (spec.u0.size() != spec.grid.num_nodes())
    throw InvalidArgument("ProblemSpec: u0 does not live on the grid");
  const struct {
    const expr::Ast* a;
    const char* name;
  } boundary_exprs[] = {{&spec.bx, "bx"}, {&spec.by, "by"}, {&spec.h, "h"}};
  for (const auto& e : boundary_exprs) {
    forbid_var(*e.a, expr::Var::P1, e.name);
    forbid_var(*e.a, expr::Var::P2, e.name);
  }
  if (spec.grid.kind() == GridKind::Interval) {
    require_zero_ast(spec.axy, "axy");
    require_zero_ast(spec.ayy, "ayy");
    require_zero_ast(spec.by, "by");
    const struct {
      const expr::Ast* a;
      const char* name;
    } all[] = {{&spec.axx, "axx"}, {&spec.f, "f"},
               {&spec.bx, "bx"},   {&spec.h, "h"}};
    for (const auto& e : all) forbid_var(*e.a, expr::Var::Y, e.name);
    forbid_var(spec.axx, expr::Var::P2, "axx");
    forbid_var(spec.f, expr::Var::P2, "f");
  }
}

NonlinearEllipticity check_nonlinear_ellipticity(const ProblemSpec& spec,
                                                 const SampleBox& box) {
  validate_spec(spec);
  if (box.samples < 2)
    throw InvalidArgument("SampleBox: need at least two samples per axis");
  if (!(box.u_hi >= box.u_lo) || !(box.p_hi >= box.p_lo))
    throw InvalidArgument("SampleBox: empty sample range");
  const Grid& g = spec.grid;
  const bool st = is_strip(g);
  auto lattice = [&](double lo, double hi) {
    std::vector<double> v(box.samples);
    for (std::size_t k = 0; k < box.samples; ++k)
      v[k] = lo + (hi - lo) * static_cast<double>(k) /
                      static_cast<double>(box.samples - 1);
    return v;
  };
  const std::vector<double> ts = lattice(0.0, spec.horizon);
  const std::vector<double> us = lattice(box.u_lo, box.u_hi);
  const std::vector<double> ps = lattice(box.p_lo, box.p_hi);
  const std::vector<double> p2s = st ? ps : std::vector<double>{0.0};

  NonlinearEllipticity out{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  for (double t : ts) {
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      for (double uv : us) {
        for (double p1 : ps) {
          for (double p2 : p2s) {
            expr::EvalContext ctx = node_context(g, t, i);
            ctx.set(expr::Var::U, uv).set(expr::Var::P1, p1);
            if (st) ctx.set(expr::Var::P2, p2);
            const double axx = expr::eval(spec.axx, ctx);
            double eig = axx;
            if (st) {
              const double axy = expr::eval(spec.axy, ctx);
              const double ayy = expr::eval(spec.ayy, ctx);
              const double mean = 0.5 * (axx + ayy);
              const double off = 0.5 * (axx - ayy);
              eig = mean - std::sqrt(off * off + axy * axy);
            }
            out.nu_interior = std::min(out.nu_interior, eig);
          }
        }
      }
    }
    for (const auto& bn : g.boundary()) {
      for (double uv : us) {
        expr::EvalContext ctx = node_context(g, t, bn.node);
        ctx.set(expr::Var::U, uv);
        double drift = expr::eval(spec.bx, ctx) * bn.normal[0];
        if (st) drift += expr::eval(spec.by, ctx) * bn.normal[1];
        out.nu_boundary = std::min(out.nu_boundary, drift);
      }
    }
  }
  return out;
}

CompatibilityResidual check_compatibility(const ProblemSpec& spec) {
  validate_spec(spec);
  return compatibility_at(spec, spec.u0, 0.0).res;
}

double compatibility_tolerance(const ProblemSpec& spec, double dt) {
  validate_spec(spec);
  if (!(dt > 0.0)) throw InvalidArgument("compatibility_tolerance: dt must be positive");
  const CompatDetail cd = compatibility_at(spec, spec.u0, 0.0);
  return compatibility_tolerance(spec.grid, dt, cd.scale);
}

LinearProblem freeze_coefficients(const ProblemSpec& spec,
                                  const SpaceTimeField& U) {
  validate_spec(spec);
  if (U.n_nodes() != spec.grid.num_nodes())
    throw InvalidArgument("freeze_coefficients: field does not live on the grid");
  auto l0 = U.level(0);
  if (!std::equal(l0.begin(), l0.end(), spec.u0.begin(), spec.u0.end()))
    throw InvalidArgument(
        "freeze_coefficients: iterate does not match the initial datum");
  return freeze_impl(spec, U);
}

DiscreteSolution build_initial_iterate(const ProblemSpec& spec,
                                       const TimeGrid& window, Scheme scheme) {
  validate_spec(spec);
  const CompatDetail cd = compatibility_at(spec, spec.u0, window.t0);
  const double tol = compatibility_tolerance(spec.grid, window.dt(), cd.scale);
  if (cd.res.max_abs > tol)
    throw InvalidArgument(
        "initial data incompatible with the boundary law: residual " +
        format_double(cd.res.max_abs) + " exceeds tolerance " +
        format_double(tol));
  SpaceTimeField constant(window, spec.grid.num_nodes());
  for (std::size_t n = 0; n < window.num_levels(); ++n) {
    auto lev = constant.level(n);
    std::copy(spec.u0.begin(), spec.u0.end(), lev.begin());
  }
  return solve_linear(freeze_impl(spec, constant), scheme);
}

PicardResult picard_solve(const ProblemSpec& spec, const PicardConfig& cfg) {
  validate_spec(spec);
  validate_config(cfg);
  const double R = effective_radius(spec, cfg);
  SolvedWindow w = solve_window_adaptive(spec, 0.0, initial_window(spec, cfg),
                                         cfg.n_steps, R, cfg);
  return PicardResult{std::move(w.sol), std::move(w.trace)};
}

ContinuationResult continue_in_time(const ProblemSpec& spec,
                                    const PicardConfig& cfg) {
  validate_spec(spec);
  validate_config(cfg);
  const Grid& g = spec.grid;

  double t = 0.0;
  double tau_carry = initial_window(spec, cfg);
  std::size_t n_carry = cfg.n_steps;
  std::vector<double> u_now = spec.u0;

  std::vector<std::vector<double>> levels;
  levels.emplace_back(spec.u0);
  std::vector<std::vector<double>> boundary_dt;
  std::vector<double> seams;
  std::vector<IterationTrace> traces;

  while (spec.horizon - t > 1e-12 * spec.horizon) {
    const double remaining = spec.horizon - t;
    double tau_try = tau_carry;
    std::size_t n_try = n_carry;
    if (remaining < tau_carry * (1.0 - 1e-12)) {
      const double dt = tau_carry / static_cast<double>(n_carry);
      n_try = static_cast<std::size_t>(
          std::max<long long>(1, std::llround(remaining / dt)));
      tau_try = remaining;
    }
    ProblemSpec w = spec;
    w.u0 = u_now;
    const double R = effective_radius(w, cfg);
    SolvedWindow solved = [&] {
      try {
        return solve_window_adaptive(w, t, tau_try, n_try, R, cfg);
      } catch (const InvalidArgument& e) {
        if (t == 0.0) throw;
        // Seam data come from our own solver; an incompatibility here means
        // the discrete solution stopped satisfying its own boundary law.
        throw SolverError("seam restart failed at t = " + format_double(t) +
                          ": " + e.what());
      }
    }();
    if (t > 0.0) seams.push_back(t);
    for (std::size_t n = 1; n < solved.sol.u.time().num_levels(); ++n) {
      auto lev = solved.sol.u.level(n);
      levels.emplace_back(lev.begin(), lev.end());
    }
    for (auto& row : solved.sol.boundary_dt)
      boundary_dt.emplace_back(std::move(row));
    u_now = levels.back();
    t += solved.tau;
    tau_carry = solved.tau;
    n_carry = solved.n_steps;
    traces.emplace_back(std::move(solved.trace));
  }

  const std::size_t total_steps = levels.size() - 1;
  SpaceTimeField full(TimeGrid(0.0, t, total_steps), g.num_nodes());
  for (std::size_t n = 0; n < levels.size(); ++n) {
    auto lev = full.level(n);
    std::copy(levels[n].begin(), levels[n].end(), lev.begin());
  }
  DiscreteSolution sol{g, std::move(full), std::move(boundary_dt)};
  return ContinuationResult{std::move(sol), std::move(seams),
                            std::move(traces)};
}

double uniqueness_probe(const ProblemSpec& spec, const PicardConfig& cfg,
                        const std::vector<SpaceTimeField>& offsets) {
  validate_spec(spec);
  validate_config(cfg);
  const Grid& g = spec.grid;
  const double R = effective_radius(spec, cfg);
  const TimeGrid window(0.0, initial_window(spec, cfg), cfg.n_steps);
  const DiscreteSolution base = build_initial_iterate(spec, window, cfg.scheme);

  std::vector<SpaceTimeField> converged;
  auto run = [&](const SpaceTimeField* seed) {
    WindowOutcome o = run_window(spec, window, R, cfg, seed, false);
    if (!o.converged)
      throw SolverError(
          "uniqueness probe: a seeded iteration left the ball before "
          "converging");
    converged.emplace_back(std::move(o.sol->u));
  };

  run(nullptr);
  for (const auto& off : offsets) {
    if (!(off.time() == window) || off.n_nodes() != g.num_nodes())
      throw InvalidArgument(
          "uniqueness probe: offset does not live on the iteration ladder");
    auto l0 = off.level(0);
    if (std::any_of(l0.begin(), l0.end(), [](double v) { return v != 0.0; }))
      throw InvalidArgument(
          "uniqueness probe: offset must vanish at the initial time");
    SpaceTimeField seed = base.u;
    for (std::size_t n = 0; n < window.num_levels(); ++n) {
      auto s = seed.level(n);
      auto o = off.level(n);
      for (std::size_t i = 0; i < g.num_nodes(); ++i) s[i] += o[i];
    }
    if (picard_metric(seed, base.u, g, spec.beta) > R)
      throw InvalidArgument(
          "uniqueness probe: offset leaves the iteration ball");
    run(&seed);
  }

  double worst = 0.0;
  for (std::size_t a = 0; a < converged.size(); ++a)
    for (std::size_t b = a + 1; b < converged.size(); ++b)
      worst = std::max(worst,
                       picard_metric(converged[a], converged[b], g, spec.beta));
  return worst;
}

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Norm of a time-indexed family of boundary-node rows: max of the sup, the
// alpha time-Hoelder seminorm of the rows (sup values), and the per-level
// boundary C^{1+beta} norm.
double boundary_rows_norm(const std::vector<std::vector<double>>& rows,
                          const Grid& g, const TimeGrid& tg, double alpha,
                          double beta) {
  double sup = 0.0, semi = 0.0, space = 0.0;
  for (const auto& row : rows) {
    sup = std::max(sup, max_abs(row));
    space = std::max(space, boundary_space_norm(row, g, 1, beta));
  }
  for (std::size_t m = 0; m + 1 < rows.size(); ++m) {
    for (std::size_t n = m + 1; n < rows.size(); ++n) {
      double diff = 0.0;
      for (std::size_t k = 0; k < rows[m].size(); ++k)
        diff = std::max(diff, std::abs(rows[n][k] - rows[m][k]));
      semi = std::max(semi, diff / std::pow(tg.t(n) - tg.t(m), alpha));
    }
  }
  return std::max({sup, semi, space});
}

}  // namespace

LipschitzProbe nemytskii_lipschitz_probe(
    const ProblemSpec& spec,
    const std::vector<std::pair<SpaceTimeField, SpaceTimeField>>& pairs,
    double beta) {
  validate_spec(spec);
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument("nemytskii_lipschitz_probe: beta must lie in (0,1)");
  const Grid& g = spec.grid;
  const bool st = is_strip(g);
  LipschitzProbe out;

  for (const auto& [U, V] : pairs) {
    if (!(U.time() == V.time()) || U.n_nodes() != V.n_nodes() ||
        U.n_nodes() != g.num_nodes())
      throw InvalidArgument(
          "nemytskii_lipschitz_probe: pair fields do not share the ladder");
    const TimeGrid& tg = U.time();
    const double denom = picard_metric(U, V, g, beta);
    if (denom == 0.0) {
      ++out.skipped;
      continue;
    }

    const LinearProblem LU = freeze_impl(spec, U);
    const LinearProblem LV = freeze_impl(spec, V);

    auto interior_ratio = [&](const Coefficient& a, const Coefficient& b) {
      SpaceTimeField diff(tg, g.num_nodes());
      for (std::size_t n = 0; n < tg.num_levels(); ++n) {
        auto lev = diff.level(n);
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
          lev[i] = a.at(g, tg, n, i) - b.at(g, tg, n, i);
      }
      return parabolic_norm(diff, g, beta / 2.0, beta) / denom;
    };
    out.interior = std::max(out.interior,
                            interior_ratio(LU.coeffs.axx, LV.coeffs.axx));
    out.interior = std::max(out.interior, interior_ratio(LU.f, LV.f));
    if (st) {
      out.interior = std::max(out.interior,
                              interior_ratio(LU.coeffs.axy, LV.coeffs.axy));
      out.interior = std::max(out.interior,
                              interior_ratio(LU.coeffs.ayy, LV.coeffs.ayy));
    }

    // Boundary family: measured against the C^{beta/2,1+beta} norm of U-V,
    // the natural strength for first-order boundary data.
    SpaceTimeField W(tg, g.num_nodes());
    double space_part = 0.0;
    for (std::size_t n = 0; n < tg.num_levels(); ++n) {
      auto w = W.level(n);
      auto uu = U.level(n);
      auto vv = V.level(n);
      for (std::size_t i = 0; i < g.num_nodes(); ++i) w[i] = uu[i] - vv[i];
      space_part = std::max(space_part, space_norm(w, g, 1, beta));
    }
    const double denom_b = std::max(
        time_holder_norm(W, g, beta / 2.0, ValueNorm::SupDomain), space_part);

    auto boundary_ratio = [&](const Coefficient& a, const Coefficient& b) {
      std::vector<std::vector<double>> rows(tg.num_levels());
      for (std::size_t n = 0; n < tg.num_levels(); ++n) {
        rows[n].reserve(g.boundary().size());
        for (const auto& bn : g.boundary())
          rows[n].push_back(a.at(g, tg, n, bn.node) -
                            b.at(g, tg, n, bn.node));
      }
      return boundary_rows_norm(rows, g, tg, beta / 2.0, beta) / denom_b;
    };
    out.boundary = std::max(out.boundary,
                            boundary_ratio(LU.coeffs.bx, LV.coeffs.bx));
    out.boundary = std::max(out.boundary, boundary_ratio(LU.h, LV.h));
    if (st)
      out.boundary = std::max(out.boundary,
                              boundary_ratio(LU.coeffs.by, LV.coeffs.by));
  }
  return out;
}

}  // namespace dynbc
