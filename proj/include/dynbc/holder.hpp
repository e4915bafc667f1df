#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynbc/field.hpp"
#include "dynbc/geometry.hpp"

namespace dynbc {

// Norm applied to a single time level when measuring time regularity.
//   SupDomain   -- sup of |f| over all nodes
//   C1          -- max of sup|f| and sup|first derivatives|
//   C2          -- C1 plus sup|second derivatives|
//   SupBoundary -- sup of |f| over boundary nodes only
enum class ValueNorm { SupDomain, C1, C2, SupBoundary };

// sup over node pairs of |f(i)-f(j)| / d(i,j)^beta, beta in (0,1).
// Exact all-pairs scan up to kSeminormExactPairNodes nodes; beyond that a
// deterministic stratified pair set (all pairs within an 8-cell index window
// plus a fixed-stride coarse subset that always contains the last node).
inline constexpr std::size_t kSeminormExactPairNodes = 4096;
double space_seminorm(std::span<const double> f, const Grid& g, double beta);

// max over derivative orders k <= m of sup |D^k f| (stencil derivatives,
// one-sided at non-periodic boundaries). m in {0,1,2}.
double space_cm_norm(std::span<const double> f, const Grid& g, int m);

// C^{m+beta} norm: max of the C^m norm and the beta-seminorms of every
// order-m derivative field.
double space_norm(std::span<const double> f, const Grid& g, int m, double beta);

// Norm of a field living on the boundary node list of a grid (values ordered
// as grid.boundary()). On an interval the boundary is two isolated points and
// every norm reduces to the sup. On a strip each boundary component is a
// circle; derivatives are tangential (periodic in x) and seminorm distances
// are geodesic within the circle.
double boundary_space_norm(std::span<const double> f, const Grid& g, int m,
                           double beta);

// sup over time-level pairs of ||u(t_m)-u(t_n)||_V / |t_m - t_n|^alpha,
// alpha >= 0. The grid-free overload always uses sup values over whatever
// node set the field carries (useful for boundary-trace fields).
double time_holder_seminorm(const SpaceTimeField& u, const Grid& g,
                            double alpha, ValueNorm v);
double time_holder_seminorm(const SpaceTimeField& u, double alpha);

// Natural C^alpha(I; X) norm: max of sup-over-levels ||u(t)||_V and the
// seminorm above.
double time_holder_norm(const SpaceTimeField& u, const Grid& g, double alpha,
                        ValueNorm v);
double time_holder_norm(const SpaceTimeField& u, double alpha);

// Mixed space-time norm: max of the time-Hoelder norm with sup space values
// and the sup over time levels of the space C^beta norm.
double parabolic_norm(const SpaceTimeField& u, const Grid& g, double alpha,
                      double beta);

// Distance used by the fixed-point iteration:
//   ||U-V|| in C^{beta/2}(I; C^1)  +  ||U-V|| in B(I; C^{1+beta}).
double picard_metric(const SpaceTimeField& U, const SpaceTimeField& V,
                     const Grid& g, double beta);

// Log-convexity probe for seminorms: returns [f]_beta, the interpolation
// bound [f]_beta0^(1-theta) * [f]_beta1^theta, and theta. Requires
// 0 <= beta0 < beta < beta1 < 1; lhs <= rhs holds pair-by-pair.
struct InterpolationCheck {
  double lhs;
  double rhs;
  double theta;
};
InterpolationCheck interpolation_check(std::span<const double> f,
                                       const Grid& g, double beta0,
                                       double beta, double beta1);

// Flat ordered key -> value record for norm bundles. Serializes to one CSV
// row or one JSON object with stable key order (insertion order).
class NormReport {
 public:
  void set(const std::string& key, double value);
  bool has(const std::string& key) const;
  double get(const std::string& key) const;  // throws InvalidArgument
  const std::vector<std::pair<std::string, double>>& items() const {
    return items_;
  }
  std::string csv_header() const;
  std::string csv_row() const;
  std::string to_json() const;

 private:
  std::vector<std::pair<std::string, double>> items_;
};

// Shortest-width exact decimal formatting used for all numeric artifacts
// (17 significant digits round-trips any double).
std::string format_double(double v);

}  // namespace dynbc
