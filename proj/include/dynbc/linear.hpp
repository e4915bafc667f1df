#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "dynbc/expr.hpp"
#include "dynbc/field.hpp"
#include "dynbc/geometry.hpp"
#include "dynbc/holder.hpp"

namespace dynbc {

using expr::Ast;

// A scalar coefficient or data function of (t, x[, y]): a constant, an
// expression over {t, x, y}, or a field tabulated on the problem's own
// space-time ladder. Tables are what coefficient freezing produces.
class Coefficient {
 public:
  Coefficient() : value_(0.0) {}
  Coefficient(double c) : value_(c) {}
  explicit Coefficient(Ast e) : value_(std::move(e)) {}
  explicit Coefficient(SpaceTimeField table) : value_(std::move(table)) {}

  double at(const Grid& g, const TimeGrid& tg, std::size_t level,
            std::size_t node) const;

  bool is_constant() const {
    return std::holds_alternative<double>(value_);
  }
  bool is_zero() const {
    return is_constant() && std::get<double>(value_) == 0.0;
  }

 private:
  std::variant<double, Ast, SpaceTimeField> value_;
};

// Coefficients of the interior operator
//   A u = axx u_xx + 2 axy u_xy + ayy u_yy + ax u_x + ay u_y + a0 u
// and of the boundary operator
//   B u = bx u_x + by u_y + b0 u.
// On an interval grid only axx (the single second-order coefficient), ax, a0,
// bx and b0 participate; axy/ayy/ay/by must stay zero. The top-order matrix
// is the symmetric [[axx, axy], [axy, ayy]]; the factor 2 on the mixed term
// makes that matrix exactly the quadratic form of the operator.
struct LinearCoefficients {
  Coefficient axx, axy, ayy, ax, ay, a0;
  Coefficient bx, by, b0;
};

// The linear evolution problem:
//   D_t u = A u + f          at interior nodes,
//   D_t u + B u = h          at boundary nodes,
//   u(t0) = u0.
struct LinearProblem {
  Grid grid;
  TimeGrid time;
  LinearCoefficients coeffs;
  Coefficient f;
  Coefficient h;
  std::vector<double> u0;
};

enum class Scheme { ImplicitEuler, CrankNicolson };

struct DiscreteSolution {
  Grid grid;
  SpaceTimeField u;
  // (u^{n+1} - u^n)/dt restricted to the boundary node list, one row per
  // time step, ordered as grid.boundary().
  std::vector<std::vector<double>> boundary_dt;
};

// Minimum over all time levels and nodes of the smallest eigenvalue of the
// top-order coefficient matrix (1-D: of the single coefficient). The value is
// returned even when it is <= 0; callers decide whether to reject.
double check_ellipticity(const LinearCoefficients& c, const Grid& g,
                         const TimeGrid& tg);

// Minimum over time levels and boundary nodes of the outward-normal
// component of the boundary drift, bx nu_x + by nu_y. Tangential parts do
// not enter.
double check_transversality(const LinearCoefficients& c, const Grid& g,
                            const TimeGrid& tg);

struct CompatibilityResidual {
  std::vector<double> residual;  // per boundary node, ordered as g.boundary()
  double max_abs = 0.0;
};

// Residual of the two evolution laws agreeing at t = t0 on the boundary:
//   r(x') = A(t0) u0 + f(t0) + B(t0) u0 - h(t0),
// with one-sided second-order stencils for the interior operator at boundary
// nodes.
CompatibilityResidual check_compatibility_linear(const LinearProblem& p);

// Implicit one-step march of the coupled interior/boundary evolution. Each
// step solves one sparse system over all nodes; boundary rows carry the
// dynamic boundary law, interior rows the PDE. Requires positive ellipticity
// and transversality minima.
DiscreteSolution solve_linear(const LinearProblem& p, Scheme scheme);

// Norm bundle of a discrete solution:
//   sup_norm                 sup |u|
//   parabolic_norm_2plusbeta max of the C^{1+beta/2}(I;C) norm (u, D_t u and
//                            the beta/2 time seminorm of D_t u) and
//                            sup-over-time of the space C^{2+beta} norm
//   time_holder_c2           C^{beta/2}(I; C^2) norm
//   time_holder_c1           C^{(1+beta)/2}(I; C^1) norm
//   boundary_dt_norm         sup-over-steps of the boundary C^{1+beta} norm
//                            of the D_t trace
NormReport norm_report(const DiscreteSolution& sol, double beta);

// Norm families whose small-time growth is measured on a horizon ladder.
enum class ScalingFamily {
  TimeSup,       // C^theta((0,T); C): expected slope 1 - theta
  BoundedSpace,  // B((0,T); C^theta): expected slope (2+beta-theta)/(2+beta)
  TimeC1         // C^{beta/2}((0,T); C^1): expected slope 1/2
};

struct ScalingResult {
  double slope = 0.0;      // fitted log-log slope of norm vs horizon
  double predicted = 0.0;  // model exponent for the requested family
  std::vector<double> horizons;
  std::vector<double> norms;
};

// Solves the template problem (which must have u0 = 0 and start at t = 0)
// over each horizon T in the ladder, keeping the template's step count, and
// fits log(norm) against log(T) by least squares.
ScalingResult measure_small_time_scaling(const LinearProblem& tmpl,
                                         Scheme scheme, ScalingFamily family,
                                         double theta,
                                         const std::vector<double>& horizons,
                                         double beta);

}  // namespace dynbc
