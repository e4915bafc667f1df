#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dynbc/linear.hpp"

namespace dynbc {

// Quasilinear evolution problem
//   D_t u = axx(t,x,u,Du) u_xx + 2 axy(...) u_xy + ayy(...) u_yy
//           + f(t,x,u,Du)                          at interior nodes,
//   D_t u + bx(t,x',u) u_x + by(t,x',u) u_y = h(t,x',u)   on the boundary,
//   u(0) = u0.
// Coefficient expressions may use {t,x,y,u,p1,p2} with (p1,p2) standing for
// the gradient; boundary expressions bx/by/h may not reference p1/p2. On an
// interval grid only axx and bx participate and nothing may reference y.
struct ProblemSpec {
  Grid grid;
  double horizon = 1.0;  // T
  double beta = 0.5;     // Hoelder exponent in (0,1)
  Ast axx, axy, ayy;
  Ast f;
  Ast bx, by;
  Ast h;
  std::vector<double> u0;
};

// Throws InvalidArgument when expressions use forbidden variables, u0 does
// not live on the grid, or beta/horizon are out of range.
void validate_spec(const ProblemSpec& spec);

// Bounds of the deterministic sample lattice for the nonlinear ellipticity /
// transversality scan.
struct SampleBox {
  double u_lo = -1.0, u_hi = 1.0;
  double p_lo = -1.0, p_hi = 1.0;  // applied to both gradient slots
  std::size_t samples = 5;         // lattice points per axis
};

struct NonlinearEllipticity {
  double nu_interior;  // min eigenvalue of the top-order matrix over the box
  double nu_boundary;  // min outward-normal boundary drift over the box
};

// Minimum ellipticity constant over grid x time lattice x (u,p) lattice and
// minimum boundary transversality over boundary x time x u lattice. Values
// are returned even when non-positive; callers decide.
NonlinearEllipticity check_nonlinear_ellipticity(const ProblemSpec& spec,
                                                 const SampleBox& box);

// Residual of the two evolution laws agreeing at t = 0 on the boundary,
// with the nonlinearities evaluated at (u0, grad u0):
//   r(x') = sum a(0,x',u0,Du0) D^2 u0 + f(0,x',u0,Du0)
//           + sum b(0,x',u0) D u0 - h(0,x',u0).
CompatibilityResidual check_compatibility(const ProblemSpec& spec);

// Discrete tolerance below which the residual above counts as compatible:
// 10 (h^2 + dt) (1 + data scale), with h the largest grid spacing and the
// data scale the largest boundary-node sum of the residual term magnitudes.
double compatibility_tolerance(const ProblemSpec& spec, double dt);

// Nemytskii substitution: evaluate every coefficient and data expression
// along the iterate U (gradients by one-sided-capable stencils), producing a
// linear problem with tabulated coefficients on U's own ladder. Requires
// U(t0,.) == u0 exactly.
LinearProblem freeze_coefficients(const ProblemSpec& spec,
                                  const SpaceTimeField& U);

struct PicardConfig {
  double radius = 0.0;   // iteration ball R; 0 selects 1 + 2||u0||_{C^{1+beta}}
  double window = 0.0;   // initial window tau; 0 selects the full horizon
  std::size_t n_steps = 16;  // time steps of the initial window
  double tol_fp = 1e-10;     // stop when d(u_{k+1}, u_k) <= tol_fp
  std::size_t max_iterations = 30;
  double rho_max = 0.5;   // shrink the window when a ratio reaches this
  double shrink = 0.5;    // window-shrink factor, applied to the step count
                          // so dt is preserved; must lie in (0,1)
  Scheme scheme = Scheme::ImplicitEuler;
};

struct IterationRecord {
  double d = 0.0;          // picard_metric(u_{k+1}, u_k)
  double ratio = 0.0;      // d_k / d_{k-1}, meaningful only when has_ratio
  bool has_ratio = false;  // predecessors at the tolerance floor have none
};

struct WindowRecord {
  double t_start = 0.0;
  double tau = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct IterationTrace {
  std::vector<IterationRecord> iterations;  // of the final window attempt
  std::vector<WindowRecord> windows;        // every attempt, shrunk ones too
  std::size_t linear_solves = 0;            // total, including the U0 build
  double tau_used = 0.0;
  bool converged = false;
};

// Linear solve with every nonlinearity frozen at the constant-in-time
// extension of u0; the starting iterate of the fixed-point loop. Requires
// the compatibility residual at the window start to stay below the discrete
// tolerance 10 (h^2 + dt) (1 + data scale).
DiscreteSolution build_initial_iterate(const ProblemSpec& spec,
                                       const TimeGrid& window, Scheme scheme);

struct PicardResult {
  DiscreteSolution solution;
  IterationTrace trace;
};

// Frozen-coefficient fixed-point iteration on one window starting at t = 0:
// iterate u_{k+1} = solve(freeze(spec, u_k)) from the initial iterate, track
// d_k and the contraction ratios, and halve the window (keeping dt) whenever
// an iterate leaves the ball around the initial iterate or a ratio reaches
// rho_max. Throws SolverError when iterations are exhausted or the window
// cannot shrink further.
PicardResult picard_solve(const ProblemSpec& spec, const PicardConfig& cfg);

struct ContinuationResult {
  DiscreteSolution solution;        // concatenated over all windows
  std::vector<double> seam_times;   // interior window boundaries
  std::vector<IterationTrace> window_traces;
};

// Cover (0, horizon] by consecutive Picard windows, each restarted from the
// previous window's final field. Every seam re-checks the compatibility
// residual with the time-shifted data and fails hard beyond the discrete
// tolerance 10 (h^2 + dt) (1 + data scale).
ContinuationResult continue_in_time(const ProblemSpec& spec,
                                    const PicardConfig& cfg);

// Run the fixed window seeded at (initial iterate + offset) for each offset
// and return the largest pairwise picard_metric between converged solutions.
// Offsets must vanish at the initial level and stay inside the ball.
double uniqueness_probe(const ProblemSpec& spec, const PicardConfig& cfg,
                        const std::vector<SpaceTimeField>& offsets);

struct LipschitzProbe {
  double interior = 0.0;   // max ratio over interior coefficient/data fields
  double boundary = 0.0;   // max ratio over boundary coefficient/data fields
  std::size_t skipped = 0;  // coincident pairs (zero denominator)
};

// Measured Lipschitz constants of the coefficient substitution: for each
// field pair (U,V), the parabolic norm of every frozen interior field
// difference against picard_metric(U,V), and the boundary parabolic norm of
// every frozen boundary field difference against the C^{beta/2,1+beta} norm
// of U-V.
LipschitzProbe nemytskii_lipschitz_probe(
    const ProblemSpec& spec,
    const std::vector<std::pair<SpaceTimeField, SpaceTimeField>>& pairs,
    double beta);

}  // namespace dynbc
