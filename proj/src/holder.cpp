#include "dynbc/holder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dynbc/errors.hpp"

namespace dynbc {

namespace {

void check_field_size(std::span<const double> f, const Grid& g,
                      const char* what) {
  if (f.size() != g.num_nodes())
    throw InvalidArgument(std::string(what) + ": field length " +
                          std::to_string(f.size()) + " does not match grid (" +
                          std::to_string(g.num_nodes()) + " nodes)");
}

double sup_abs(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

// Visits the admissible node-pair set: every unordered pair when the grid is
// small enough, otherwise all pairs inside an 8-cell index window plus all
// pairs of a fixed-stride coarse subset (which always contains the last
// node). Repeated visits are harmless under a max-reduction.
template <class Fn>
void for_each_pair(const Grid& g, Fn&& fn) {
  const std::size_t n = g.num_nodes();
  if (n <= kSeminormExactPairNodes) {
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) fn(i, j);
    return;
  }
  constexpr std::size_t kWindow = 8;
  if (g.kind() == GridKind::Interval) {
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < std::min(n, i + kWindow + 1); ++j)
        fn(i, j);
  } else {
    const std::size_t nx = g.n_x(), ny = g.n_y();
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(
        std::min(kWindow, nx > 1 ? nx - 1 : std::size_t{1}));
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const std::size_t a = g.node_at(ix, iy);
        for (std::size_t dy = 0; dy <= kWindow && iy + dy < ny; ++dy) {
          const std::ptrdiff_t dx_lo = dy == 0 ? 1 : -w;
          for (std::ptrdiff_t dx = dx_lo; dx <= w; ++dx) {
            std::size_t jx = static_cast<std::size_t>(
                (static_cast<std::ptrdiff_t>(ix) + dx +
                 static_cast<std::ptrdiff_t>(nx)) %
                static_cast<std::ptrdiff_t>(nx));
            const std::size_t b = g.node_at(jx, iy + dy);
            if (a != b) fn(a, b);
          }
        }
      }
    }
  }
  const std::size_t stride = (n + 63) / 64;
  std::vector<std::size_t> coarse;
  for (std::size_t i = 0; i < n; i += stride) coarse.push_back(i);
  if (coarse.back() != n - 1) coarse.push_back(n - 1);
  for (std::size_t a = 0; a + 1 < coarse.size(); ++a)
    for (std::size_t b = a + 1; b < coarse.size(); ++b)
      fn(coarse[a], coarse[b]);
}

// Seminorm core without the (0,1) exponent restriction (interpolation probes
// legitimately use beta0 = 0, where the quotient degenerates to |f_i - f_j|).
double seminorm_unchecked(std::span<const double> f, const Grid& g,
                          double beta) {
  double best = 0.0;
  for_each_pair(g, [&](std::size_t i, std::size_t j) {
    const double q =
        std::abs(f[i] - f[j]) / std::pow(g.distance(i, j), beta);
    best = std::max(best, q);
  });
  return best;
}

// First-derivative fields of f, via the geometry stencils.
std::vector<std::vector<double>> first_derivative_fields(
    std::span<const double> f, const Grid& g) {
  std::vector<std::vector<double>> out;
  out.push_back(derivative_field(g, f, Axis::X));
  if (g.kind() == GridKind::Strip)
    out.push_back(derivative_field(g, f, Axis::Y));
  return out;
}

std::vector<std::vector<double>> second_derivative_fields(
    std::span<const double> f, const Grid& g) {
  std::vector<std::vector<double>> out;
  out.push_back(second_derivative_field(g, f, Deriv2::XX));
  if (g.kind() == GridKind::Strip) {
    out.push_back(second_derivative_field(g, f, Deriv2::XY));
    out.push_back(second_derivative_field(g, f, Deriv2::YY));
  }
  return out;
}

void check_order(int m, const char* what) {
  if (m < 0 || m > 2)
    throw InvalidArgument(std::string(what) +
                          ": derivative order must be 0, 1 or 2, got " +
                          std::to_string(m));
}

void check_beta(double beta, const char* what) {
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument(std::string(what) + ": beta must lie in (0,1), got " +
                          format_double(beta));
}

// The per-level component fields whose joint sup realizes a ValueNorm.
std::vector<std::vector<double>> value_components(std::span<const double> f,
                                                  const Grid& g, ValueNorm v) {
  std::vector<std::vector<double>> comps;
  switch (v) {
    case ValueNorm::SupDomain:
      comps.emplace_back(f.begin(), f.end());
      break;
    case ValueNorm::SupBoundary: {
      std::vector<double> b;
      b.reserve(g.boundary().size());
      for (const auto& bn : g.boundary()) b.push_back(f[bn.node]);
      comps.push_back(std::move(b));
      break;
    }
    case ValueNorm::C2:
    case ValueNorm::C1: {
      comps.emplace_back(f.begin(), f.end());
      for (auto& d : first_derivative_fields(f, g))
        comps.push_back(std::move(d));
      if (v == ValueNorm::C2)
        for (auto& d : second_derivative_fields(f, g))
          comps.push_back(std::move(d));
      break;
    }
  }
  return comps;
}

double components_sup(const std::vector<std::vector<double>>& comps) {
  double m = 0.0;
  for (const auto& c : comps) m = std::max(m, sup_abs(c));
  return m;
}

struct LevelComponents {
  std::vector<std::vector<std::vector<double>>> per_level;
  std::vector<double> times;
};

LevelComponents build_level_components(const SpaceTimeField& u, const Grid* g,
                                       ValueNorm v) {
  LevelComponents lc;
  const std::size_t levels = u.time().num_levels();
  lc.per_level.reserve(levels);
  lc.times.reserve(levels);
  for (std::size_t n = 0; n < levels; ++n) {
    if (g) {
      lc.per_level.push_back(value_components(u.level(n), *g, v));
    } else {
      std::vector<std::vector<double>> one;
      one.emplace_back(u.level(n).begin(), u.level(n).end());
      lc.per_level.push_back(std::move(one));
    }
    lc.times.push_back(u.time().t(n));
  }
  return lc;
}

double time_seminorm_from(const LevelComponents& lc, double alpha) {
  double best = 0.0;
  const std::size_t levels = lc.per_level.size();
  for (std::size_t m = 0; m + 1 < levels; ++m) {
    for (std::size_t n = m + 1; n < levels; ++n) {
      double diff = 0.0;
      const auto& cm = lc.per_level[m];
      const auto& cn = lc.per_level[n];
      for (std::size_t k = 0; k < cm.size(); ++k)
        for (std::size_t e = 0; e < cm[k].size(); ++e)
          diff = std::max(diff, std::abs(cm[k][e] - cn[k][e]));
      best = std::max(best, diff / std::pow(lc.times[n] - lc.times[m], alpha));
    }
  }
  return best;
}

double time_sup_from(const LevelComponents& lc) {
  double best = 0.0;
  for (const auto& comps : lc.per_level)
    best = std::max(best, components_sup(comps));
  return best;
}

void check_alpha(double alpha) {
  if (alpha < 0.0)
    throw InvalidArgument("time_holder_seminorm: alpha must be >= 0, got " +
                          format_double(alpha));
}

void check_grid_match(const SpaceTimeField& u, const Grid& g,
                      const char* what) {
  if (u.n_nodes() != g.num_nodes())
    throw InvalidArgument(std::string(what) +
                          ": space-time field does not live on this grid");
}

}  // namespace

double space_seminorm(std::span<const double> f, const Grid& g, double beta) {
  check_field_size(f, g, "space_seminorm");
  check_beta(beta, "space_seminorm");
  return seminorm_unchecked(f, g, beta);
}

double space_cm_norm(std::span<const double> f, const Grid& g, int m) {
  check_field_size(f, g, "space_cm_norm");
  check_order(m, "space_cm_norm");
  double norm = sup_abs(f);
  if (m >= 1)
    for (const auto& d : first_derivative_fields(f, g))
      norm = std::max(norm, sup_abs(d));
  if (m >= 2)
    for (const auto& d : second_derivative_fields(f, g))
      norm = std::max(norm, sup_abs(d));
  return norm;
}

double space_norm(std::span<const double> f, const Grid& g, int m,
                  double beta) {
  check_field_size(f, g, "space_norm");
  check_order(m, "space_norm");
  check_beta(beta, "space_norm");
  double norm = space_cm_norm(f, g, m);
  std::vector<std::vector<double>> top;
  if (m == 0) {
    top.emplace_back(f.begin(), f.end());
  } else if (m == 1) {
    top = first_derivative_fields(f, g);
  } else {
    top = second_derivative_fields(f, g);
  }
  for (const auto& d : top)
    norm = std::max(norm, seminorm_unchecked(d, g, beta));
  return norm;
}

double boundary_space_norm(std::span<const double> f, const Grid& g, int m,
                           double beta) {
  check_order(m, "boundary_space_norm");
  check_beta(beta, "boundary_space_norm");
  if (f.size() != g.boundary().size())
    throw InvalidArgument(
        "boundary_space_norm: field length does not match boundary node "
        "count");
  if (g.kind() == GridKind::Interval) {
    // Two isolated points: no tangential direction, every norm is the sup.
    return sup_abs(f);
  }
  // Strip: two circles of n_x nodes, listed bottom row then top row.
  const std::size_t nx = g.n_x();
  const double hx = g.spacing(Axis::X);
  const double period = g.period();
  double norm = 0.0;
  for (std::size_t row = 0; row < 2; ++row) {
    std::span<const double> ring = f.subspan(row * nx, nx);
    std::vector<std::vector<double>> per_order;
    per_order.emplace_back(ring.begin(), ring.end());
    for (int order = 1; order <= m; ++order) {
      const auto& prev = per_order.back();
      std::vector<double> d(nx);
      for (std::size_t i = 0; i < nx; ++i)
        d[i] = (prev[(i + 1) % nx] - prev[(i + nx - 1) % nx]) / (2.0 * hx);
      per_order.push_back(std::move(d));
    }
    for (const auto& comp : per_order) norm = std::max(norm, sup_abs(comp));
    const auto& top = per_order.back();
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      for (std::size_t j = i + 1; j < nx; ++j) {
        double dx = std::abs(static_cast<double>(j - i)) * hx;
        dx = std::min(dx, period - dx);
        norm = std::max(norm, std::abs(top[i] - top[j]) / std::pow(dx, beta));
      }
    }
  }
  return norm;
}

double time_holder_seminorm(const SpaceTimeField& u, const Grid& g,
                            double alpha, ValueNorm v) {
  check_alpha(alpha);
  check_grid_match(u, g, "time_holder_seminorm");
  return time_seminorm_from(build_level_components(u, &g, v), alpha);
}

double time_holder_seminorm(const SpaceTimeField& u, double alpha) {
  check_alpha(alpha);
  return time_seminorm_from(
      build_level_components(u, nullptr, ValueNorm::SupDomain), alpha);
}

double time_holder_norm(const SpaceTimeField& u, const Grid& g, double alpha,
                        ValueNorm v) {
  check_alpha(alpha);
  check_grid_match(u, g, "time_holder_norm");
  const auto lc = build_level_components(u, &g, v);
  return std::max(time_sup_from(lc), time_seminorm_from(lc, alpha));
}

double time_holder_norm(const SpaceTimeField& u, double alpha) {
  check_alpha(alpha);
  const auto lc = build_level_components(u, nullptr, ValueNorm::SupDomain);
  return std::max(time_sup_from(lc), time_seminorm_from(lc, alpha));
}

double parabolic_norm(const SpaceTimeField& u, const Grid& g, double alpha,
                      double beta) {
  check_grid_match(u, g, "parabolic_norm");
  check_beta(beta, "parabolic_norm");
  double norm = time_holder_norm(u, g, alpha, ValueNorm::SupDomain);
  for (std::size_t n = 0; n < u.time().num_levels(); ++n)
    norm = std::max(norm, space_norm(u.level(n), g, 0, beta));
  return norm;
}

double picard_metric(const SpaceTimeField& U, const SpaceTimeField& V,
                     const Grid& g, double beta) {
  check_grid_match(U, g, "picard_metric");
  check_beta(beta, "picard_metric");
  if (!(U.time() == V.time()) || U.n_nodes() != V.n_nodes())
    throw InvalidArgument(
        "picard_metric: fields live on different space-time grids");
  SpaceTimeField w(U.time(), U.n_nodes());
  for (std::size_t n = 0; n < U.time().num_levels(); ++n) {
    auto wl = w.level(n);
    auto ul = U.level(n);
    auto vl = V.level(n);
    for (std::size_t i = 0; i < wl.size(); ++i) wl[i] = ul[i] - vl[i];
  }
  const double time_part = time_holder_norm(w, g, beta / 2.0, ValueNorm::C1);
  double bounded_part = 0.0;
  for (std::size_t n = 0; n < w.time().num_levels(); ++n)
    bounded_part = std::max(bounded_part, space_norm(w.level(n), g, 1, beta));
  return time_part + bounded_part;
}

InterpolationCheck interpolation_check(std::span<const double> f,
                                       const Grid& g, double beta0,
                                       double beta, double beta1) {
  check_field_size(f, g, "interpolation_check");
  if (!(0.0 <= beta0 && beta0 < beta && beta < beta1 && beta1 < 1.0))
    throw InvalidArgument(
        "interpolation_check: need 0 <= beta0 < beta < beta1 < 1");
  const double theta = (beta - beta0) / (beta1 - beta0);
  const double s0 = seminorm_unchecked(f, g, beta0);
  const double s1 = seminorm_unchecked(f, g, beta1);
  InterpolationCheck out;
  out.theta = theta;
  out.lhs = seminorm_unchecked(f, g, beta);
  out.rhs = std::pow(s0, 1.0 - theta) * std::pow(s1, theta);
  return out;
}

void NormReport::set(const std::string& key, double value) {
  for (auto& kv : items_) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  items_.emplace_back(key, value);
}

bool NormReport::has(const std::string& key) const {
  for (const auto& kv : items_)
    if (kv.first == key) return true;
  return false;
}

double NormReport::get(const std::string& key) const {
  for (const auto& kv : items_)
    if (kv.first == key) return kv.second;
  throw InvalidArgument("NormReport: no entry named '" + key + "'");
}

std::string NormReport::csv_header() const {
  std::string out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i) out += ',';
    out += items_[i].first;
  }
  return out;
}

std::string NormReport::csv_row() const {
  std::string out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i) out += ',';
    out += format_double(items_[i].second);
  }
  return out;
}

std::string NormReport::to_json() const {
  std::string out = "{";
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i) out += ", ";
    out += '"';
    out += items_[i].first;
    out += "\": ";
    out += format_double(items_[i].second);
  }
  out += "}";
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace dynbc
