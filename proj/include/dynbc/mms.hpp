#pragma once

#include <cstddef>
#include <vector>

#include "dynbc/quasilinear.hpp"

namespace dynbc {

// A manufactured solution u*(t,x[,y]) together with its symbolic
// derivatives. All derivatives are exact expression trees; nothing is
// finite-differenced.
struct ExactSolution {
  Ast u, dt, dx, dy, dxx, dxy, dyy;

  // u may reference t, x and y only; throws InvalidArgument otherwise.
  static ExactSolution from(const Ast& u);
};

// Source corrections that make u* an exact solution:
//   g_f = D_t u* - sum a(.,u*,Du*) D^2 u* - f(.,u*,Du*)   (interior)
//   g_h = D_t u* + sum b(.,u*) D u* - h(.,u*)             (boundary)
// built by substituting u*, D_x u*, D_y u* into the coefficient expressions,
// so both are closed-form expressions in (t,x[,y]).
struct Forcing {
  Ast g_f, g_h;
};
Forcing derive_forcing(const ProblemSpec& spec, const ExactSolution& exact);

// The same problem with f := f + g_f, h := h + g_h and u0 := u*(0,.) sampled
// on the grid; u* solves the augmented problem exactly.
ProblemSpec augment(const ProblemSpec& spec, const ExactSolution& exact);

// Largest absolute residual of the augmented evolution laws along u*,
// evaluated numerically on the grid x a uniform time lattice with
// `time_samples` >= 2 points. Zero up to roundoff when `augmented` came from
// augment() with the same exact solution.
double residual_nullity(const ProblemSpec& augmented,
                        const ExactSolution& exact, std::size_t time_samples);

// One refinement ladder of a convergence study.
struct RefinementLadder {
  std::vector<double> scales;  // h (spatial) or dt (temporal) per level
  std::vector<double> errors;  // max-node |u - u*| at the final time per level
  double order = 0.0;          // least-squares slope of log err vs log scale
  bool exact = false;          // every error sits at the roundoff floor
  bool monotone = true;        // errors decrease as the scale shrinks
};

struct ConvergenceStudy {
  RefinementLadder space;
  RefinementLadder time;
};

struct StudyConfig {
  // Spatial ladder: each factor multiplies the grid resolution; empty skips
  // the ladder, otherwise at least three levels are required.
  std::vector<std::size_t> space_factors{1, 2, 4};
  std::size_t space_run_steps = 128;  // fixed time steps of spatial runs

  // Temporal ladder: each factor multiplies the base step count.
  std::vector<std::size_t> time_factors{1, 2, 4};
  std::size_t time_base_steps = 4;
  std::size_t time_space_factor = 1;  // fixed grid refinement of these runs

  // Solver settings for every run; n_steps is overridden per run. A nonzero
  // window splits each run into consecutive continuation windows.
  PicardConfig picard;
};

// Solve the augmented problem over refined grids / step counts and fit the
// observed orders. u0 is re-sampled from the exact solution on every refined
// grid; each level's error is the max-node deviation at the final time.
ConvergenceStudy convergence_study(const ProblemSpec& augmented,
                                   const ExactSolution& exact,
                                   const StudyConfig& cfg);

}  // namespace dynbc
