#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dynbc/errors.hpp"

namespace dynbc {

enum class GridKind { Interval, Strip };

enum class Axis : int { X = 0, Y = 1 };

/// Second-derivative directions.  XY is the mixed derivative.
enum class Deriv2 : int { XX = 0, XY = 1, YY = 2 };

/// A node on the domain boundary together with its outward unit normal.
struct BoundaryNode {
  std::size_t node;
  std::array<double, 2> position;
  std::array<double, 2> normal;
};

/// Uniform grid over one of the two supported domains:
///  - Interval:  [x_lo, x_hi], boundary = the two endpoints.
///  - Strip:     periodic in x with period L, y in [0, 1]; boundary = the
///               rows y = 0 and y = 1.  Node order is x-fastest
///               (node = iy * n_x + ix); the x direction has n_x distinct
///               columns with spacing L / n_x.
class Grid {
 public:
  static Grid interval(double x_lo, double x_hi, std::size_t n_nodes);
  static Grid strip(double period, std::size_t n_x, std::size_t n_y);

  GridKind kind() const { return kind_; }
  int dim() const { return kind_ == GridKind::Interval ? 1 : 2; }
  std::size_t num_nodes() const;
  std::array<double, 2> position(std::size_t node) const;
  double spacing(Axis a) const;

  // Interval accessors.
  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }

  // Strip accessors.
  double period() const { return period_; }
  std::size_t n_x() const { return n_x_; }
  std::size_t n_y() const { return n_y_; }
  std::size_t node_at(std::size_t ix, std::size_t iy) const;

  bool is_boundary(std::size_t node) const;
  const std::vector<BoundaryNode>& boundary() const { return boundary_; }

  /// Metric used by Holder seminorms: |a-b| on the interval, and the
  /// geodesic distance (periodic in x) on the strip.
  double distance(std::size_t a, std::size_t b) const;

  /// Grids compare equal when they describe the same node set.
  friend bool operator==(const Grid& a, const Grid& b);

 private:
  Grid() = default;

  GridKind kind_ = GridKind::Interval;
  double x_lo_ = 0.0, x_hi_ = 1.0;
  double period_ = 0.0;
  std::size_t n_ = 0;           // interval node count
  std::size_t n_x_ = 0, n_y_ = 0;
  std::vector<BoundaryNode> boundary_;
};

struct StencilEntry {
  std::size_t node;
  double weight;
};

/// First-derivative row at `node`: second-order central differences in the
/// interior and in the periodic direction, one-sided 3-point (still second
/// order) at non-periodic boundaries.
std::vector<StencilEntry> gradient_stencil(const Grid& g, std::size_t node, Axis a);

/// Second-derivative row at an interior node: {1,-2,1}/h^2 along an axis,
/// 4-point cross for the mixed derivative.  Throws InvalidArgument when the
/// node lies on a non-periodic boundary for the requested direction.
std::vector<StencilEntry> second_derivative_stencil(const Grid& g, std::size_t node,
                                                    Deriv2 d);

/// Second-derivative row valid at every node: falls back to one-sided
/// 4-point (second-order) stencils at non-periodic boundaries.  Used by
/// compatibility residuals and by norms that need derivatives up to the
/// boundary.
std::vector<StencilEntry> second_derivative_stencil_any(const Grid& g,
                                                        std::size_t node, Deriv2 d);

/// Apply the gradient rows to a whole field.
std::vector<double> derivative_field(const Grid& g, std::span<const double> f, Axis a);

/// Apply second_derivative_stencil_any rows to a whole field.
std::vector<double> second_derivative_field(const Grid& g, std::span<const double> f,
                                            Deriv2 d);

}  // namespace dynbc
