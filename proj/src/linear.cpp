#include "dynbc/linear.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynbc/errors.hpp"

namespace dynbc {

namespace {

expr::EvalContext point_context(const Grid& g, double t, std::size_t node) {
  expr::EvalContext ctx;
  ctx.set(expr::Var::T, t);
  const auto p = g.position(node);
  ctx.set(expr::Var::X, p[0]);
  if (g.kind() == GridKind::Strip) ctx.set(expr::Var::Y, p[1]);
  return ctx;
}

// On interval grids the y-direction coefficients must be identically zero.
void validate_for_grid(const LinearCoefficients& c, const Grid& g) {
  if (g.kind() == GridKind::Interval) {
    if (!c.axy.is_zero() || !c.ayy.is_zero() || !c.ay.is_zero() ||
        !c.by.is_zero())
      throw InvalidArgument(
          "linear coefficients: axy/ayy/ay/by must be zero on an interval "
          "grid");
  }
}

void validate_initial(const LinearProblem& p) {
  if (p.u0.size() != p.grid.num_nodes())
    throw InvalidArgument("linear problem: u0 length " +
                          std::to_string(p.u0.size()) +
                          " does not match the grid");
}

// Row of the spatial operator owning a node: A at interior nodes, B at
// boundary nodes. Zero constant coefficients are skipped, which keeps the
// sparsity pattern time-independent.
template <class Emit>
void operator_row(const LinearProblem& p, std::size_t level, std::size_t node,
                  bool boundary, Emit&& emit) {
  const Grid& g = p.grid;
  const TimeGrid& tg = p.time;
  const LinearCoefficients& c = p.coeffs;
  if (!boundary) {
    if (!c.axx.is_zero()) {
      const double v = c.axx.at(g, tg, level, node);
      for (const auto& e : second_derivative_stencil(g, node, Deriv2::XX))
        emit(e.node, v * e.weight);
    }
    if (g.kind() == GridKind::Strip) {
      if (!c.axy.is_zero()) {
        const double v = 2.0 * c.axy.at(g, tg, level, node);
        for (const auto& e : second_derivative_stencil(g, node, Deriv2::XY))
          emit(e.node, v * e.weight);
      }
      if (!c.ayy.is_zero()) {
        const double v = c.ayy.at(g, tg, level, node);
        for (const auto& e : second_derivative_stencil(g, node, Deriv2::YY))
          emit(e.node, v * e.weight);
      }
      if (!c.ay.is_zero()) {
        const double v = c.ay.at(g, tg, level, node);
        for (const auto& e : gradient_stencil(g, node, Axis::Y))
          emit(e.node, v * e.weight);
      }
    }
    if (!c.ax.is_zero()) {
      const double v = c.ax.at(g, tg, level, node);
      for (const auto& e : gradient_stencil(g, node, Axis::X))
        emit(e.node, v * e.weight);
    }
    if (!c.a0.is_zero()) emit(node, c.a0.at(g, tg, level, node));
  } else {
    if (!c.bx.is_zero()) {
      const double v = c.bx.at(g, tg, level, node);
      for (const auto& e : gradient_stencil(g, node, Axis::X))
        emit(e.node, v * e.weight);
    }
    if (g.kind() == GridKind::Strip && !c.by.is_zero()) {
      const double v = c.by.at(g, tg, level, node);
      for (const auto& e : gradient_stencil(g, node, Axis::Y))
        emit(e.node, v * e.weight);
    }
    if (!c.b0.is_zero()) emit(node, c.b0.at(g, tg, level, node));
  }
}

double sup_abs_field(const SpaceTimeField& u) {
  double m = 0.0;
  for (std::size_t n = 0; n < u.time().num_levels(); ++n)
    for (double v : u.level(n)) m = std::max(m, std::abs(v));
  return m;
}

double fit_loglog_slope(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

}  // namespace

double Coefficient::at(const Grid& g, const TimeGrid& tg, std::size_t level,
                       std::size_t node) const {
  if (const double* c = std::get_if<double>(&value_)) return *c;
  if (const Ast* e = std::get_if<Ast>(&value_)) {
    expr::EvalContext ctx = point_context(g, tg.t(level), node);
    return expr::eval(*e, ctx);
  }
  const SpaceTimeField& f = std::get<SpaceTimeField>(value_);
  if (f.n_nodes() != g.num_nodes() || !(f.time() == tg))
    throw InvalidArgument(
        "Coefficient: tabulated field does not match the problem's "
        "space-time grid");
  return f.at(level, node);
}

double check_ellipticity(const LinearCoefficients& c, const Grid& g,
                         const TimeGrid& tg) {
  validate_for_grid(c, g);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < tg.num_levels(); ++n) {
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      double lambda;
      if (g.kind() == GridKind::Interval) {
        lambda = c.axx.at(g, tg, n, i);
      } else {
        const double axx = c.axx.at(g, tg, n, i);
        const double axy = c.axy.at(g, tg, n, i);
        const double ayy = c.ayy.at(g, tg, n, i);
        const double mean = 0.5 * (axx + ayy);
        const double disc =
            std::sqrt(0.25 * (axx - ayy) * (axx - ayy) + axy * axy);
        lambda = mean - disc;
      }
      best = std::min(best, lambda);
    }
  }
  return best;
}

double check_transversality(const LinearCoefficients& c, const Grid& g,
                            const TimeGrid& tg) {
  validate_for_grid(c, g);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < tg.num_levels(); ++n) {
    for (const auto& bn : g.boundary()) {
      const double v = c.bx.at(g, tg, n, bn.node) * bn.normal[0] +
                       c.by.at(g, tg, n, bn.node) * bn.normal[1];
      best = std::min(best, v);
    }
  }
  return best;
}

CompatibilityResidual check_compatibility_linear(const LinearProblem& p) {
  validate_for_grid(p.coeffs, p.grid);
  validate_initial(p);
  const Grid& g = p.grid;
  const TimeGrid& tg = p.time;
  const LinearCoefficients& c = p.coeffs;

  const auto dx = derivative_field(g, p.u0, Axis::X);
  const auto dxx = second_derivative_field(g, p.u0, Deriv2::XX);
  std::vector<double> dy, dxy, dyy;
  if (g.kind() == GridKind::Strip) {
    dy = derivative_field(g, p.u0, Axis::Y);
    dxy = second_derivative_field(g, p.u0, Deriv2::XY);
    dyy = second_derivative_field(g, p.u0, Deriv2::YY);
  }

  CompatibilityResidual out;
  out.residual.reserve(g.boundary().size());
  for (const auto& bn : g.boundary()) {
    const std::size_t i = bn.node;
    double au = c.axx.at(g, tg, 0, i) * dxx[i] + c.ax.at(g, tg, 0, i) * dx[i] +
                c.a0.at(g, tg, 0, i) * p.u0[i];
    double bu = c.bx.at(g, tg, 0, i) * dx[i] + c.b0.at(g, tg, 0, i) * p.u0[i];
    if (g.kind() == GridKind::Strip) {
      au += 2.0 * c.axy.at(g, tg, 0, i) * dxy[i] +
            c.ayy.at(g, tg, 0, i) * dyy[i] + c.ay.at(g, tg, 0, i) * dy[i];
      bu += c.by.at(g, tg, 0, i) * dy[i];
    }
    const double r = au + p.f.at(g, tg, 0, i) + bu - p.h.at(g, tg, 0, i);
    out.residual.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
  }
  return out;
}

DiscreteSolution solve_linear(const LinearProblem& p, Scheme scheme) {
  validate_for_grid(p.coeffs, p.grid);
  validate_initial(p);
  const double nu_e = check_ellipticity(p.coeffs, p.grid, p.time);
  if (!(nu_e > 0.0))
    throw SolverError("solve_linear: ellipticity minimum " +
                      format_double(nu_e) + " is not positive");
  const double nu_t = check_transversality(p.coeffs, p.grid, p.time);
  if (!(nu_t > 0.0))
    throw SolverError("solve_linear: boundary transversality minimum " +
                      format_double(nu_t) + " is not positive");

  const Grid& g = p.grid;
  const std::size_t n_nodes = g.num_nodes();
  const double dt = p.time.dt();

  std::vector<char> is_bdry(n_nodes, 0);
  for (const auto& bn : g.boundary()) is_bdry[bn.node] = 1;

  DiscreteSolution sol{g, SpaceTimeField(p.time, n_nodes), {}};
  {
    auto lvl0 = sol.u.level(0);
    std::copy(p.u0.begin(), p.u0.end(), lvl0.begin());
  }
  sol.boundary_dt.reserve(p.time.n_steps);

  Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(n_nodes),
                                  static_cast<Eigen::Index>(n_nodes));
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n_nodes));
  bool analyzed = false;

  // Equation form at node i: D_t u = s * (Op u) + data, with s = +1 and
  // Op = A, data = f at interior nodes; s = -1, Op = B, data = h on the
  // boundary. Implicit Euler evaluates Op and data at the new level; the
  // trapezoidal scheme averages old and new levels.
  const double s_dt = scheme == Scheme::ImplicitEuler ? dt : 0.5 * dt;
  for (std::size_t step = 0; step < p.time.n_steps; ++step) {
    const std::size_t nl = step + 1;
    auto prev = sol.u.level(step);

    trips.clear();
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const int ii = static_cast<int>(i);
      trips.emplace_back(ii, ii, 1.0);
      const double sgn = is_bdry[i] ? 1.0 : -1.0;  // contributes -s_dt * s * w
      operator_row(p, nl, i, is_bdry[i], [&](std::size_t col, double w) {
        trips.emplace_back(ii, static_cast<int>(col), sgn * s_dt * w);
      });
    }

    for (std::size_t i = 0; i < n_nodes; ++i) {
      const Coefficient& data = is_bdry[i] ? p.h : p.f;
      double r = prev[i];
      if (scheme == Scheme::ImplicitEuler) {
        r += dt * data.at(g, p.time, nl, i);
      } else {
        double action = 0.0;
        operator_row(p, step, i, is_bdry[i],
                     [&](std::size_t col, double w) { action += w * prev[col]; });
        const double s = is_bdry[i] ? -1.0 : 1.0;
        r += s_dt * s * action +
             s_dt * (data.at(g, p.time, step, i) + data.at(g, p.time, nl, i));
      }
      rhs[static_cast<Eigen::Index>(i)] = r;
    }

    mat.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      lu.analyzePattern(mat);
      analyzed = true;
    }
    lu.factorize(mat);
    if (lu.info() != Eigen::Success)
      throw SolverError("solve_linear: singular step matrix at time level " +
                        std::to_string(nl));
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
      throw SolverError("solve_linear: back-substitution failed at time level " +
                        std::to_string(nl));

    auto lvl = sol.u.level(nl);
    for (std::size_t i = 0; i < n_nodes; ++i)
      lvl[i] = x[static_cast<Eigen::Index>(i)];

    std::vector<double> trace;
    trace.reserve(g.boundary().size());
    for (const auto& bn : g.boundary())
      trace.push_back((lvl[bn.node] - prev[bn.node]) / dt);
    sol.boundary_dt.push_back(std::move(trace));
  }
  return sol;
}

NormReport norm_report(const DiscreteSolution& sol, double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument("norm_report: beta must lie in (0,1), got " +
                          format_double(beta));
  const Grid& g = sol.grid;
  const TimeGrid& tg = sol.u.time();
  const std::size_t n_nodes = sol.u.n_nodes();
  const double dt = tg.dt();

  NormReport r;
  r.set("sup_norm", sup_abs_field(sol.u));

  // C^{1+beta/2}(I; C): sup |u|, sup |D_t u| and the beta/2 time seminorm of
  // the discrete D_t u ladder.
  double sup_dtu = 0.0;
  double semi_dtu = 0.0;
  {
    for (std::size_t n = 0; n + 1 < tg.num_levels(); ++n) {
      auto a = sol.u.level(n);
      auto b = sol.u.level(n + 1);
      for (std::size_t i = 0; i < n_nodes; ++i)
        sup_dtu = std::max(sup_dtu, std::abs((b[i] - a[i]) / dt));
    }
    if (tg.n_steps >= 2) {
      SpaceTimeField dtu(TimeGrid(tg.t0 + dt, tg.tau - dt, tg.n_steps - 1),
                         n_nodes);
      for (std::size_t n = 0; n + 1 < tg.num_levels(); ++n) {
        auto a = sol.u.level(n);
        auto b = sol.u.level(n + 1);
        auto d = dtu.level(n);
        for (std::size_t i = 0; i < n_nodes; ++i) d[i] = (b[i] - a[i]) / dt;
      }
      semi_dtu = time_holder_seminorm(dtu, beta / 2.0);
    }
  }
  double bounded_c2b = 0.0;
  for (std::size_t n = 0; n < tg.num_levels(); ++n)
    bounded_c2b = std::max(bounded_c2b, space_norm(sol.u.level(n), g, 2, beta));
  r.set("parabolic_norm_2plusbeta",
        std::max({r.get("sup_norm"), sup_dtu, semi_dtu, bounded_c2b}));

  r.set("time_holder_c2",
        time_holder_norm(sol.u, g, beta / 2.0, ValueNorm::C2));
  r.set("time_holder_c1",
        time_holder_norm(sol.u, g, (1.0 + beta) / 2.0, ValueNorm::C1));

  double trace_norm = 0.0;
  for (const auto& row : sol.boundary_dt)
    trace_norm = std::max(trace_norm, boundary_space_norm(row, g, 1, beta));
  r.set("boundary_dt_norm", trace_norm);
  return r;
}

ScalingResult measure_small_time_scaling(const LinearProblem& tmpl,
                                         Scheme scheme, ScalingFamily family,
                                         double theta,
                                         const std::vector<double>& horizons,
                                         double beta) {
  if (horizons.size() < 4)
    throw InvalidArgument(
        "measure_small_time_scaling: need at least 4 horizons");
  if (tmpl.time.t0 != 0.0)
    throw InvalidArgument(
        "measure_small_time_scaling: template must start at t = 0");
  for (double v : tmpl.u0)
    if (v != 0.0)
      throw InvalidArgument(
          "measure_small_time_scaling: template must have u0 = 0");
  if (family != ScalingFamily::TimeC1 && !(theta >= 0.0 && theta < 1.0))
    throw InvalidArgument(
        "measure_small_time_scaling: theta must lie in [0,1)");
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument(
        "measure_small_time_scaling: beta must lie in (0,1)");

  ScalingResult res;
  switch (family) {
    case ScalingFamily::TimeSup:
      res.predicted = 1.0 - theta;
      break;
    case ScalingFamily::BoundedSpace:
      res.predicted = (2.0 + beta - theta) / (2.0 + beta);
      break;
    case ScalingFamily::TimeC1:
      res.predicted = 0.5;
      break;
  }

  for (double horizon : horizons) {
    LinearProblem q = tmpl;
    q.time = TimeGrid(0.0, horizon, tmpl.time.n_steps);
    DiscreteSolution sol = solve_linear(q, scheme);
    double norm = 0.0;
    switch (family) {
      case ScalingFamily::TimeSup:
        norm = theta == 0.0
                   ? sup_abs_field(sol.u)
                   : time_holder_norm(sol.u, q.grid, theta,
                                      ValueNorm::SupDomain);
        break;
      case ScalingFamily::BoundedSpace:
        if (theta == 0.0) {
          norm = sup_abs_field(sol.u);
        } else {
          for (std::size_t n = 0; n < q.time.num_levels(); ++n)
            norm = std::max(norm, space_norm(sol.u.level(n), q.grid, 0, theta));
        }
        break;
      case ScalingFamily::TimeC1:
        norm = time_holder_norm(sol.u, q.grid, beta / 2.0, ValueNorm::C1);
        break;
    }
    res.horizons.push_back(horizon);
    res.norms.push_back(norm);
  }

  for (double v : res.norms)
    if (!(v > 0.0))
      throw InvalidArgument(
          "measure_small_time_scaling: norm vanishes on the horizon ladder "
          "(degenerate data)");
  res.slope = fit_loglog_slope(res.horizons, res.norms);
  return res;
}

}  // namespace dynbc
