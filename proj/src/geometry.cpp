#include "dynbc/geometry.hpp"

#include <cmath>
#include <functional>

namespace dynbc {

Grid Grid::interval(double x_lo, double x_hi, std::size_t n_nodes) {
  if (!(x_hi > x_lo)) throw InvalidArgument("Grid::interval: need x_hi > x_lo");
  if (n_nodes < 3) throw InvalidArgument("Grid::interval: need at least 3 nodes");
  Grid g;
  g.kind_ = GridKind::Interval;
  g.x_lo_ = x_lo;
  g.x_hi_ = x_hi;
  g.n_ = n_nodes;
  g.boundary_.push_back(BoundaryNode{0, {x_lo, 0.0}, {-1.0, 0.0}});
  g.boundary_.push_back(BoundaryNode{n_nodes - 1, {x_hi, 0.0}, {1.0, 0.0}});
  return g;
}

Grid Grid::strip(double period, std::size_t n_x, std::size_t n_y) {
  if (!(period > 0.0)) throw InvalidArgument("Grid::strip: need period > 0");
  if (n_x < 3 || n_y < 3)
    throw InvalidArgument("Grid::strip: need n_x >= 3 and n_y >= 3");
  Grid g;
  g.kind_ = GridKind::Strip;
  g.period_ = period;
  g.n_x_ = n_x;
  g.n_y_ = n_y;
  for (std::size_t ix = 0; ix < n_x; ++ix) {
    auto p = g.position(g.node_at(ix, 0));
    g.boundary_.push_back(BoundaryNode{g.node_at(ix, 0), p, {0.0, -1.0}});
  }
  for (std::size_t ix = 0; ix < n_x; ++ix) {
    auto p = g.position(g.node_at(ix, n_y - 1));
    g.boundary_.push_back(BoundaryNode{g.node_at(ix, n_y - 1), p, {0.0, 1.0}});
  }
  return g;
}

std::size_t Grid::num_nodes() const {
  return kind_ == GridKind::Interval ? n_ : n_x_ * n_y_;
}

std::array<double, 2> Grid::position(std::size_t node) const {
  if (node >= num_nodes()) throw InvalidArgument("Grid::position: node out of range");
  if (kind_ == GridKind::Interval) {
    double s = static_cast<double>(node) / static_cast<double>(n_ - 1);
    return {x_lo_ + (x_hi_ - x_lo_) * s, 0.0};
  }
  std::size_t ix = node % n_x_, iy = node / n_x_;
  return {period_ * static_cast<double>(ix) / static_cast<double>(n_x_),
          static_cast<double>(iy) / static_cast<double>(n_y_ - 1)};
}

double Grid::spacing(Axis a) const {
  if (kind_ == GridKind::Interval) {
    if (a != Axis::X) throw InvalidArgument("Grid::spacing: interval has no y axis");
    return (x_hi_ - x_lo_) / static_cast<double>(n_ - 1);
  }
  return a == Axis::X ? period_ / static_cast<double>(n_x_)
                      : 1.0 / static_cast<double>(n_y_ - 1);
}

std::size_t Grid::node_at(std::size_t ix, std::size_t iy) const {
  if (kind_ != GridKind::Strip) throw InvalidArgument("Grid::node_at: not a strip");
  if (ix >= n_x_ || iy >= n_y_) throw InvalidArgument("Grid::node_at: out of range");
  return iy * n_x_ + ix;
}

bool Grid::is_boundary(std::size_t node) const {
  if (node >= num_nodes()) throw InvalidArgument("Grid::is_boundary: out of range");
  if (kind_ == GridKind::Interval) return node == 0 || node == n_ - 1;
  std::size_t iy = node / n_x_;
  return iy == 0 || iy == n_y_ - 1;
}

double Grid::distance(std::size_t a, std::size_t b) const {
  auto pa = position(a), pb = position(b);
  double dx = std::abs(pa[0] - pb[0]);
  if (kind_ == GridKind::Interval) return dx;
  dx = std::min(dx, period_ - dx);  // geodesic in the periodic direction
  double dy = pa[1] - pb[1];
  return std::sqrt(dx * dx + dy * dy);
}

bool operator==(const Grid& a, const Grid& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ == GridKind::Interval)
    return a.x_lo_ == b.x_lo_ && a.x_hi_ == b.x_hi_ && a.n_ == b.n_;
  return a.period_ == b.period_ && a.n_x_ == b.n_x_ && a.n_y_ == b.n_y_;
}

namespace {

// One-dimensional helper rows over a line of `n` nodes indexed 0..n-1 with
// spacing h; `at` maps a line index to a grid node index.
template <typename Map>
std::vector<StencilEntry> line_gradient(std::size_t i, std::size_t n, double h,
                                        bool periodic, Map at) {
  std::vector<StencilEntry> out;
  double w = 1.0 / (2.0 * h);
  if (periodic) {
    out.push_back({at((i + n - 1) % n), -w});
    out.push_back({at((i + 1) % n), w});
  } else if (i == 0) {
    out.push_back({at(0), -3.0 * w});
    out.push_back({at(1), 4.0 * w});
    out.push_back({at(2), -w});
  } else if (i == n - 1) {
    out.push_back({at(n - 1), 3.0 * w});
    out.push_back({at(n - 2), -4.0 * w});
    out.push_back({at(n - 3), w});
  } else {
    out.push_back({at(i - 1), -w});
    out.push_back({at(i + 1), w});
  }
  return out;
}

template <typename Map>
std::vector<StencilEntry> line_second_interior(std::size_t i, std::size_t n, double h,
                                               bool periodic, Map at) {
  std::vector<StencilEntry> out;
  double w = 1.0 / (h * h);
  std::size_t im = periodic ? (i + n - 1) % n : i - 1;
  std::size_t ip = periodic ? (i + 1) % n : i + 1;
  out.push_back({at(im), w});
  out.push_back({at(i), -2.0 * w});
  out.push_back({at(ip), w});
  return out;
}

template <typename Map>
std::vector<StencilEntry> line_second_any(std::size_t i, std::size_t n, double h,
                                          bool periodic, Map at) {
  if (periodic || (i > 0 && i < n - 1))
    return line_second_interior(i, n, h, periodic, at);
  std::vector<StencilEntry> out;
  double w = 1.0 / (h * h);
  if (n == 3) {
    // Degenerate 3-node line: first-order one-sided fallback.
    out.push_back({at(0), w});
    out.push_back({at(1), -2.0 * w});
    out.push_back({at(2), w});
    return out;
  }
  if (i == 0) {
    out.push_back({at(0), 2.0 * w});
    out.push_back({at(1), -5.0 * w});
    out.push_back({at(2), 4.0 * w});
    out.push_back({at(3), -w});
  } else {
    out.push_back({at(n - 1), 2.0 * w});
    out.push_back({at(n - 2), -5.0 * w});
    out.push_back({at(n - 3), 4.0 * w});
    out.push_back({at(n - 4), -w});
  }
  return out;
}

}  // namespace

std::vector<StencilEntry> gradient_stencil(const Grid& g, std::size_t node, Axis a) {
  if (node >= g.num_nodes())
    throw InvalidArgument("gradient_stencil: node out of range");
  if (g.kind() == GridKind::Interval) {
    if (a != Axis::X) throw InvalidArgument("gradient_stencil: interval has no y axis");
    std::size_t n = g.num_nodes();
    return line_gradient(node, n, g.spacing(Axis::X), false,
                         [](std::size_t i) { return i; });
  }
  std::size_t ix = node % g.n_x(), iy = node / g.n_x();
  if (a == Axis::X)
    return line_gradient(ix, g.n_x(), g.spacing(Axis::X), true,
                         [&](std::size_t i) { return g.node_at(i, iy); });
  return line_gradient(iy, g.n_y(), g.spacing(Axis::Y), false,
                       [&](std::size_t i) { return g.node_at(ix, i); });
}

std::vector<StencilEntry> second_derivative_stencil(const Grid& g, std::size_t node,
                                                    Deriv2 d) {
  if (node >= g.num_nodes())
    throw InvalidArgument("second_derivative_stencil: node out of range");
  if (g.kind() == GridKind::Interval) {
    if (d != Deriv2::XX)
      throw InvalidArgument("second_derivative_stencil: interval has no y axis");
    if (g.is_boundary(node))
      throw InvalidArgument(
          "second_derivative_stencil: node lies on a non-periodic boundary");
    return line_second_interior(node, g.num_nodes(), g.spacing(Axis::X), false,
                                [](std::size_t i) { return i; });
  }
  std::size_t ix = node % g.n_x(), iy = node / g.n_x();
  if (d == Deriv2::XX)
    return line_second_interior(ix, g.n_x(), g.spacing(Axis::X), true,
                                [&](std::size_t i) { return g.node_at(i, iy); });
  if (g.is_boundary(node))
    throw InvalidArgument(
        "second_derivative_stencil: node lies on a non-periodic boundary");
  if (d == Deriv2::YY)
    return line_second_interior(iy, g.n_y(), g.spacing(Axis::Y), false,
                                [&](std::size_t i) { return g.node_at(ix, i); });
  // Mixed derivative: 4-point cross.
  double w = 1.0 / (4.0 * g.spacing(Axis::X) * g.spacing(Axis::Y));
  std::size_t ip = (ix + 1) % g.n_x(), im = (ix + g.n_x() - 1) % g.n_x();
  return {{g.node_at(ip, iy + 1), w},
          {g.node_at(ip, iy - 1), -w},
          {g.node_at(im, iy + 1), -w},
          {g.node_at(im, iy - 1), w}};
}

std::vector<StencilEntry> second_derivative_stencil_any(const Grid& g,
                                                        std::size_t node, Deriv2 d) {
  if (node >= g.num_nodes())
    throw InvalidArgument("second_derivative_stencil_any: node out of range");
  if (g.kind() == GridKind::Interval) {
    if (d != Deriv2::XX)
      throw InvalidArgument("second_derivative_stencil_any: interval has no y axis");
    return line_second_any(node, g.num_nodes(), g.spacing(Axis::X), false,
                           [](std::size_t i) { return i; });
  }
  std::size_t ix = node % g.n_x(), iy = node / g.n_x();
  if (d == Deriv2::XX)
    return line_second_interior(ix, g.n_x(), g.spacing(Axis::X), true,
                                [&](std::size_t i) { return g.node_at(i, iy); });
  if (d == Deriv2::YY)
    return line_second_any(iy, g.n_y(), g.spacing(Axis::Y), false,
                           [&](std::size_t i) { return g.node_at(ix, i); });
  // Mixed derivative as a composition: one-sided-capable d/dy, then the
  // periodic central d/dx.  Reduces to the 4-point cross in the interior.
  std::vector<StencilEntry> out;
  auto dy = line_gradient(iy, g.n_y(), g.spacing(Axis::Y), false,
                          [&](std::size_t i) { return g.node_at(ix, i); });
  double wx = 1.0 / (2.0 * g.spacing(Axis::X));
  std::size_t ip = (ix + 1) % g.n_x(), im = (ix + g.n_x() - 1) % g.n_x();
  for (const StencilEntry& e : dy) {
    std::size_t jy = e.node / g.n_x();
    out.push_back({g.node_at(ip, jy), e.weight * wx});
    out.push_back({g.node_at(im, jy), -e.weight * wx});
  }
  return out;
}

namespace {

std::vector<double> apply_rows(
    const Grid& g, std::span<const double> f,
    const std::function<std::vector<StencilEntry>(std::size_t)>& row) {
  if (f.size() != g.num_nodes())
    throw InvalidArgument("field length does not match grid");
  std::vector<double> out(g.num_nodes(), 0.0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    double s = 0.0;
    for (const StencilEntry& e : row(i)) s += e.weight * f[e.node];
    out[i] = s;
  }
  return out;
}

}  // namespace

std::vector<double> derivative_field(const Grid& g, std::span<const double> f, Axis a) {
  return apply_rows(g, f, [&](std::size_t i) { return gradient_stencil(g, i, a); });
}

std::vector<double> second_derivative_field(const Grid& g, std::span<const double> f,
                                            Deriv2 d) {
  return apply_rows(g, f,
                    [&](std::size_t i) { return second_derivative_stencil_any(g, i, d); });
}

}  // namespace dynbc
