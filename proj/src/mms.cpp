#include "dynbc/mms.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace dynbc {

namespace {

namespace ex = expr;

Ast add(const Ast& a, const Ast& b) {
  return Ast::binary(ex::BinaryOp::Add, a, b);
}
Ast sub(const Ast& a, const Ast& b) {
  return Ast::binary(ex::BinaryOp::Sub, a, b);
}
Ast mul(const Ast& a, const Ast& b) {
  return Ast::binary(ex::BinaryOp::Mul, a, b);
}

// a(t,x,y,u,p1,p2) composed with the exact solution: u -> u*, p -> grad u*.
Ast along_exact(const Ast& a, const ExactSolution& e) {
  Ast out = ex::substitute(a, ex::Var::U, e.u);
  out = ex::substitute(out, ex::Var::P1, e.dx);
  out = ex::substitute(out, ex::Var::P2, e.dy);
  return out;
}

ex::EvalContext space_time_context(const Grid& g, double t, std::size_t node) {
  auto p = g.position(node);
  ex::EvalContext ctx;
  ctx.set(ex::Var::T, t).set(ex::Var::X, p[0]);
  if (g.kind() == GridKind::Strip) ctx.set(ex::Var::Y, p[1]);
  return ctx;
}

Grid refine_grid(const Grid& base, std::size_t factor) {
  if (factor < 1) throw InvalidArgument("StudyConfig: factors must be >= 1");
  if (base.kind() == GridKind::Interval) {
    std::size_t n = (base.num_nodes() - 1) * factor + 1;
    return Grid::interval(base.x_lo(), base.x_hi(), n);
  }
  return Grid::strip(base.period(), base.n_x() * factor,
                     (base.n_y() - 1) * factor + 1);
}

std::vector<double> sample_initial(const ExactSolution& e, const Grid& g) {
  std::vector<double> u0(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    u0[i] = ex::eval(e.u, space_time_context(g, 0.0, i));
  return u0;
}

struct RunError {
  double err = 0.0;    // max-node |u - u*| at the final time
  double scale = 0.0;  // sup |u*| at the final time
};

RunError solve_and_compare(const ProblemSpec& spec, const ExactSolution& e,
                           const PicardConfig& cfg) {
  ContinuationResult run = continue_in_time(spec, cfg);
  const SpaceTimeField& u = run.solution.u;
  const std::size_t last = u.time().num_levels() - 1;
  const double t = u.time().t(last);
  RunError out;
  for (std::size_t i = 0; i < spec.grid.num_nodes(); ++i) {
    const double star = ex::eval(e.u, space_time_context(spec.grid, t, i));
    out.err = std::max(out.err, std::abs(u.at(last, i) - star));
    out.scale = std::max(out.scale, std::abs(star));
  }
  return out;
}

void fit_ladder(RefinementLadder& lad, double value_scale) {
  const double floor = 1e-12 * (1.0 + value_scale);
  lad.exact = !lad.errors.empty() &&
              *std::max_element(lad.errors.begin(), lad.errors.end()) <= floor;
  for (std::size_t k = 0; k + 1 < lad.errors.size(); ++k) {
    if (lad.errors[k + 1] > lad.errors[k]) lad.monotone = false;
  }
  if (lad.exact || lad.errors.size() < 2) {
    lad.order = 0.0;
    return;
  }
  // Least-squares slope of log(err) against log(scale); errors below the
  // floor are clamped so a partially converged ladder stays finite.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(lad.errors.size());
  for (std::size_t k = 0; k < lad.errors.size(); ++k) {
    const double lx = std::log(lad.scales[k]);
    const double ly = std::log(std::max(lad.errors[k], floor));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  lad.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ExactSolution ExactSolution::from(const Ast& u) {
  if (u.uses(ex::Var::U) || u.uses(ex::Var::P1) || u.uses(ex::Var::P2))
    throw InvalidArgument(
        "ExactSolution: the manufactured solution may reference t, x, y only");
  ExactSolution e;
  e.u = u;
  e.dt = ex::differentiate(u, ex::Var::T);
  e.dx = ex::differentiate(u, ex::Var::X);
  e.dy = ex::differentiate(u, ex::Var::Y);
  e.dxx = ex::differentiate(e.dx, ex::Var::X);
  e.dxy = ex::differentiate(e.dx, ex::Var::Y);
  e.dyy = ex::differentiate(e.dy, ex::Var::Y);
  return e;
}

Forcing derive_forcing(const ProblemSpec& spec, const ExactSolution& exact) {
  validate_spec(spec);
  const Ast two = Ast::constant(2.0);

  // Interior operator along u*: axx u*_xx + 2 axy u*_xy + ayy u*_yy. Constant
  // folding collapses the vanished terms on an interval.
  Ast a_part = mul(along_exact(spec.axx, exact), exact.dxx);
  a_part = add(a_part, mul(two, mul(along_exact(spec.axy, exact), exact.dxy)));
  a_part = add(a_part, mul(along_exact(spec.ayy, exact), exact.dyy));
  Ast g_f = sub(sub(exact.dt, a_part), along_exact(spec.f, exact));

  Ast b_part = mul(ex::substitute(spec.bx, ex::Var::U, exact.u), exact.dx);
  b_part = add(b_part,
               mul(ex::substitute(spec.by, ex::Var::U, exact.u), exact.dy));
  Ast g_h = sub(add(exact.dt, b_part),
                ex::substitute(spec.h, ex::Var::U, exact.u));
  return Forcing{std::move(g_f), std::move(g_h)};
}

ProblemSpec augment(const ProblemSpec& spec, const ExactSolution& exact) {
  Forcing g = derive_forcing(spec, exact);
  ProblemSpec out = spec;
  out.f = add(spec.f, g.g_f);
  out.h = add(spec.h, g.g_h);
  out.u0 = sample_initial(exact, spec.grid);
  return out;
}

double residual_nullity(const ProblemSpec& augmented,
                        const ExactSolution& exact, std::size_t time_samples) {
  validate_spec(augmented);
  if (time_samples < 2)
    throw InvalidArgument("residual_nullity: need at least two time samples");
  const Grid& g = augmented.grid;
  const bool st = g.kind() == GridKind::Strip;
  double worst = 0.0;
  for (std::size_t k = 0; k < time_samples; ++k) {
    const double t = augmented.horizon * static_cast<double>(k) /
                     static_cast<double>(time_samples - 1);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      ex::EvalContext ctx = space_time_context(g, t, i);
      const double u = ex::eval(exact.u, ctx);
      const double p1 = ex::eval(exact.dx, ctx);
      const double p2 = ex::eval(exact.dy, ctx);
      ex::EvalContext full = ctx;
      full.set(ex::Var::U, u).set(ex::Var::P1, p1).set(ex::Var::P2, p2);
      double a_part = ex::eval(augmented.axx, full) * ex::eval(exact.dxx, ctx);
      if (st)
        a_part += 2.0 * ex::eval(augmented.axy, full) *
                      ex::eval(exact.dxy, ctx) +
                  ex::eval(augmented.ayy, full) * ex::eval(exact.dyy, ctx);
      const double r_f =
          ex::eval(exact.dt, ctx) - a_part - ex::eval(augmented.f, full);
      worst = std::max(worst, std::abs(r_f));
      if (g.is_boundary(i)) {
        ex::EvalContext bctx = ctx;
        bctx.set(ex::Var::U, u);
        double b_part = ex::eval(augmented.bx, bctx) * p1;
        if (st) b_part += ex::eval(augmented.by, bctx) * p2;
        const double r_h =
            ex::eval(exact.dt, ctx) + b_part - ex::eval(augmented.h, bctx);
        worst = std::max(worst, std::abs(r_h));
      }
    }
  }
  return worst;
}

ConvergenceStudy convergence_study(const ProblemSpec& augmented,
                                   const ExactSolution& exact,
                                   const StudyConfig& cfg) {
  validate_spec(augmented);
  if (!cfg.space_factors.empty() && cfg.space_factors.size() < 3)
    throw InvalidArgument(
        "convergence_study: a spatial ladder needs at least three levels");
  if (!cfg.time_factors.empty() && cfg.time_factors.size() < 3)
    throw InvalidArgument(
        "convergence_study: a temporal ladder needs at least three levels");
  if (cfg.space_run_steps < 1 || cfg.time_base_steps < 1)
    throw InvalidArgument("convergence_study: step counts must be >= 1");

  ConvergenceStudy study;
  double value_scale = 0.0;

  for (std::size_t factor : cfg.space_factors) {
    ProblemSpec run = augmented;
    run.grid = refine_grid(augmented.grid, factor);
    run.u0 = sample_initial(exact, run.grid);
    PicardConfig pc = cfg.picard;
    pc.n_steps = cfg.space_run_steps;
    RunError r = solve_and_compare(run, exact, pc);
    double h = run.grid.spacing(Axis::X);
    if (run.grid.kind() == GridKind::Strip)
      h = std::max(h, run.grid.spacing(Axis::Y));
    study.space.scales.push_back(h);
    study.space.errors.push_back(r.err);
    value_scale = std::max(value_scale, r.scale);
  }
  fit_ladder(study.space, value_scale);

  value_scale = 0.0;
  for (std::size_t factor : cfg.time_factors) {
    ProblemSpec run = augmented;
    run.grid = refine_grid(augmented.grid, cfg.time_space_factor);
    run.u0 = sample_initial(exact, run.grid);
    PicardConfig pc = cfg.picard;
    if (factor < 1) throw InvalidArgument("StudyConfig: factors must be >= 1");
    pc.n_steps = cfg.time_base_steps * factor;
    RunError r = solve_and_compare(run, exact, pc);
    const double window =
        pc.window > 0.0 ? std::min(pc.window, run.horizon) : run.horizon;
    study.time.scales.push_back(window / static_cast<double>(pc.n_steps));
    study.time.errors.push_back(r.err);
    value_scale = std::max(value_scale, r.scale);
  }
  fit_ladder(study.time, value_scale);

  return study;
}

}  // namespace dynbc
