#include "dynbc/holder.hpp"

#include <cmath>
#include <cstdlib>
#include <random>

#include "doctest.h"
#include "dynbc/errors.hpp"
#include "dynbc/field.hpp"
#include "dynbc/geometry.hpp"

using namespace dynbc;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent all-pairs oracle for the space seminorm.
double oracle_seminorm(const std::vector<double>& f, const Grid& g,
                       double beta) {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < g.num_nodes(); ++i)
    for (std::size_t j = i + 1; j < g.num_nodes(); ++j)
      best = std::max(best,
                      std::abs(f[i] - f[j]) / std::pow(g.distance(i, j), beta));
  return best;
}

double oracle_sup(const std::vector<double>& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> random_smooth_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  const double a = c(rng), ph = c(rng), q2 = c(rng), q1 = c(rng);
  const int k = 1 + static_cast<int>(rng() % 3);
  std::vector<double> f(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    auto p = g.position(i);
    if (g.kind() == GridKind::Interval) {
      f[i] = a * std::sin(k * kPi * p[0] + ph) + q2 * p[0] * p[0] + q1 * p[0];
    } else {
      f[i] = a * std::cos(2.0 * kPi * k * p[0] / g.period() + ph) *
                 (1.0 + q1 * p[1]) +
             q2 * p[1] * p[1];
    }
  }
  return f;
}

}  // namespace

TEST_CASE("holder: space seminorm basics and oracle equality") {
  Grid g = Grid::interval(0.0, 1.0, 41);

  std::vector<double> constant(g.num_nodes(), 2.75);
  for (double beta : {0.25, 0.5, 0.75})
    CHECK(space_seminorm(constant, g, beta) == 0.0);

  // f(x) = x: quotient d/d^beta = d^{1-beta} is maximized at d = 1.
  std::vector<double> linear(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    linear[i] = g.position(i)[0];
  CHECK(space_seminorm(linear, g, 0.5) == 1.0);

  std::mt19937_64 rng(0x701dbeefu);
  for (int round = 0; round < 20; ++round) {
    auto f = random_smooth_field(g, rng);
    for (double beta : {0.25, 0.5, 0.75})
      CHECK(space_seminorm(f, g, beta) == oracle_seminorm(f, g, beta));
  }

  Grid s = Grid::strip(1.5, 12, 7);
  for (int round = 0; round < 10; ++round) {
    auto f = random_smooth_field(s, rng);
    CHECK(space_seminorm(f, s, 0.5) == oracle_seminorm(f, s, 0.5));
  }

  CHECK_THROWS_AS(space_seminorm(linear, g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(space_seminorm(linear, g, 1.0), InvalidArgument);
  std::vector<double> bad(5, 0.0);
  CHECK_THROWS_AS(space_seminorm(bad, g, 0.5), InvalidArgument);
}

TEST_CASE("holder: seminorm scaling and refinement monotonicity") {
  std::mt19937_64 rng(0x5ca1eu);
  Grid g = Grid::interval(0.0, 1.0, 33);
  auto f = random_smooth_field(g, rng);
  std::vector<double> scaled(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) scaled[i] = -4.0 * f[i];
  // Power-of-two factor keeps the scaling identity exact in floating point.
  CHECK(space_seminorm(scaled, g, 0.5) == 4.0 * space_seminorm(f, g, 0.5));

  // Nested grids: the coarse pair set is a subset of the fine one.
  auto fn = [](double x) { return std::sin(3.0 * kPi * x) + 0.3 * x * x; };
  Grid coarse = Grid::interval(0.0, 1.0, 33);
  Grid fine = Grid::interval(0.0, 1.0, 65);
  std::vector<double> fc(coarse.num_nodes()), ff(fine.num_nodes());
  for (std::size_t i = 0; i < fc.size(); ++i) fc[i] = fn(coarse.position(i)[0]);
  for (std::size_t i = 0; i < ff.size(); ++i) ff[i] = fn(fine.position(i)[0]);
  for (double beta : {0.25, 0.5, 0.75})
    CHECK(space_seminorm(ff, fine, beta) >= space_seminorm(fc, coarse, beta));

  Grid sc = Grid::strip(1.0, 8, 5);
  Grid sf = Grid::strip(1.0, 16, 9);
  auto fn2 = [](double x, double y) {
    return std::cos(2.0 * kPi * x) * (1.0 + y) + y * y;
  };
  std::vector<double> gc(sc.num_nodes()), gf(sf.num_nodes());
  for (std::size_t i = 0; i < gc.size(); ++i)
    gc[i] = fn2(sc.position(i)[0], sc.position(i)[1]);
  for (std::size_t i = 0; i < gf.size(); ++i)
    gf[i] = fn2(sf.position(i)[0], sf.position(i)[1]);
  CHECK(space_seminorm(gf, sf, 0.5) >= space_seminorm(gc, sc, 0.5));
}

TEST_CASE("holder: seminorm log-convexity with unit constant") {
  Grid g = Grid::interval(0.0, 1.0, 101);
  std::mt19937_64 rng(0x1e6cu);
  const double b0 = 0.25, b = 0.5, b1 = 0.75;
  for (int round = 0; round < 100; ++round) {
    auto f = random_smooth_field(g, rng);
    const double s0 = space_seminorm(f, g, b0);
    const double s = space_seminorm(f, g, b);
    const double s1 = space_seminorm(f, g, b1);
    const double theta = (b - b0) / (b1 - b0);
    const double rhs = std::pow(s0, 1.0 - theta) * std::pow(s1, theta);
    CHECK(s <= rhs * (1.0 + 1e-12));

    auto chk = interpolation_check(f, g, b0, b, b1);
    CHECK(chk.theta == theta);
    CHECK(chk.lhs == s);
    CHECK(chk.rhs == rhs);
    CHECK(chk.lhs <= chk.rhs * (1.0 + 1e-12));
  }
  std::vector<double> constant(g.num_nodes(), 1.0);
  auto chk = interpolation_check(constant, g, 0.25, 0.5, 0.75);
  CHECK(chk.lhs == 0.0);
  CHECK(chk.rhs == 0.0);
  CHECK(chk.theta == 0.5);

  // Degenerate beta0 = 0 is allowed here (plain oscillation in the bound).
  std::vector<double> linear(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    linear[i] = g.position(i)[0];
  auto chk0 = interpolation_check(linear, g, 0.0, 0.5, 0.75);
  CHECK(chk0.lhs <= chk0.rhs * (1.0 + 1e-12));

  CHECK_THROWS_AS(interpolation_check(linear, g, 0.5, 0.25, 0.75),
                  InvalidArgument);
}

TEST_CASE("holder: space norms compose sup and seminorm parts") {
  Grid g = Grid::interval(0.0, 1.0, 65);
  std::vector<double> constant(g.num_nodes(), -3.5);
  CHECK(space_cm_norm(constant, g, 0) == 3.5);
  CHECK(space_norm(constant, g, 0, 0.5) == 3.5);

  std::vector<double> linear(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    linear[i] = g.position(i)[0];
  CHECK(space_norm(linear, g, 0, 0.5) == 1.0);  // max(sup = 1, seminorm = 1)

  // Independent recomposition for m = 2 on sin(pi x).
  std::vector<double> f(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    f[i] = std::sin(kPi * g.position(i)[0]);
  auto dx = derivative_field(g, f, Axis::X);
  auto dxx = second_derivative_field(g, f, Deriv2::XX);
  const double want_cm =
      std::max({oracle_sup(f), oracle_sup(dx), oracle_sup(dxx)});
  CHECK(space_cm_norm(f, g, 2) == want_cm);
  const double want =
      std::max(want_cm, oracle_seminorm(dxx, g, 0.5));
  CHECK(space_norm(f, g, 2, 0.5) == want);

  // Same recomposition on a strip, all five derivative fields involved.
  Grid s = Grid::strip(1.0, 10, 6);
  std::mt19937_64 rng(0xfeedu);
  auto fs = random_smooth_field(s, rng);
  auto sdx = derivative_field(s, fs, Axis::X);
  auto sdy = derivative_field(s, fs, Axis::Y);
  auto sdxx = second_derivative_field(s, fs, Deriv2::XX);
  auto sdxy = second_derivative_field(s, fs, Deriv2::XY);
  auto sdyy = second_derivative_field(s, fs, Deriv2::YY);
  const double cm2 = std::max({oracle_sup(fs), oracle_sup(sdx),
                               oracle_sup(sdy), oracle_sup(sdxx),
                               oracle_sup(sdxy), oracle_sup(sdyy)});
  CHECK(space_cm_norm(fs, s, 2) == cm2);
  const double sem2 =
      std::max({oracle_seminorm(sdxx, s, 0.5), oracle_seminorm(sdxy, s, 0.5),
                oracle_seminorm(sdyy, s, 0.5)});
  CHECK(space_norm(fs, s, 2, 0.5) == std::max(cm2, sem2));

  CHECK_THROWS_AS(space_cm_norm(f, g, 3), InvalidArgument);
  CHECK_THROWS_AS(space_norm(f, g, -1, 0.5), InvalidArgument);
}

TEST_CASE("holder: time Hoelder seminorm and norm") {
  Grid g = Grid::interval(0.0, 1.0, 17);
  TimeGrid tg(0.0, 1.0, 10);

  SpaceTimeField steady = SpaceTimeField::from_function(
      g, tg, [](double, double x, double) { return std::sin(x); });
  CHECK(time_holder_seminorm(steady, g, 0.5, ValueNorm::SupDomain) == 0.0);

  SpaceTimeField ramp = SpaceTimeField::from_function(
      g, tg, [](double t, double, double) { return t; });
  CHECK(time_holder_seminorm(ramp, g, 1.0, ValueNorm::SupDomain) == 1.0);

  // u = t * x against an independent all-pairs oracle with sup values.
  SpaceTimeField tx = SpaceTimeField::from_function(
      g, tg, [](double t, double x, double) { return t * x; });
  double want = 0.0;
  for (std::size_t m = 0; m + 1 < tg.num_levels(); ++m) {
    for (std::size_t n = m + 1; n < tg.num_levels(); ++n) {
      double diff = 0.0;
      for (std::size_t i = 0; i < g.num_nodes(); ++i)
        diff = std::max(diff, std::abs(tx.at(m, i) - tx.at(n, i)));
      want = std::max(want, diff / std::pow(tg.t(n) - tg.t(m), 0.5));
    }
  }
  CHECK(time_holder_seminorm(tx, g, 0.5, ValueNorm::SupDomain) == want);
  // The grid-free overload agrees when the value norm is the domain sup.
  CHECK(time_holder_seminorm(tx, 0.5) == want);

  // Norm adds the sup-over-levels part: sup |t * x| = 1 at (t,x) = (1,1).
  CHECK(time_holder_norm(tx, g, 0.5, ValueNorm::SupDomain) ==
        std::max(want, 1.0));

  CHECK_THROWS_AS(time_holder_seminorm(tx, g, -0.25, ValueNorm::SupDomain),
                  InvalidArgument);
}

TEST_CASE("holder: value-norm selectors match manual compositions") {
  Grid g = Grid::strip(1.0, 8, 5);
  TimeGrid tg(0.0, 0.5, 6);
  std::mt19937_64 rng(0xabcdu);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const double a1 = c(rng), a2 = c(rng), a3 = c(rng);
  SpaceTimeField u = SpaceTimeField::from_function(
      g, tg, [&](double t, double x, double y) {
        return a1 * std::sin(2.0 * kPi * x) * (1.0 + t) + a2 * y * y * t +
               a3 * std::cos(t + y);
      });

  for (ValueNorm v : {ValueNorm::C1, ValueNorm::C2, ValueNorm::SupBoundary}) {
    const double alpha = 0.25;
    double want = 0.0;
    for (std::size_t m = 0; m + 1 < tg.num_levels(); ++m) {
      for (std::size_t n = m + 1; n < tg.num_levels(); ++n) {
        std::vector<double> diff(g.num_nodes());
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
          diff[i] = u.at(m, i) - u.at(n, i);
        double vn = 0.0;
        if (v == ValueNorm::SupBoundary) {
          for (const auto& bn : g.boundary())
            vn = std::max(vn, std::abs(diff[bn.node]));
        } else {
          vn = oracle_sup(diff);
          vn = std::max(vn, oracle_sup(derivative_field(g, diff, Axis::X)));
          vn = std::max(vn, oracle_sup(derivative_field(g, diff, Axis::Y)));
          if (v == ValueNorm::C2) {
            vn = std::max(
                vn, oracle_sup(second_derivative_field(g, diff, Deriv2::XX)));
            vn = std::max(
                vn, oracle_sup(second_derivative_field(g, diff, Deriv2::XY)));
            vn = std::max(
                vn, oracle_sup(second_derivative_field(g, diff, Deriv2::YY)));
          }
        }
        want = std::max(want, vn / std::pow(tg.t(n) - tg.t(m), alpha));
      }
    }
    const double got = time_holder_seminorm(u, g, 0.25, v);
    // Derivative-of-difference vs difference-of-derivatives: equal up to
    // stencil rounding.
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("holder: parabolic norm") {
  Grid g = Grid::interval(0.0, 1.0, 21);
  TimeGrid tg(0.0, 1.0, 8);

  SpaceTimeField zero(tg, g.num_nodes());
  CHECK(parabolic_norm(zero, g, 0.5, 0.5) == 0.0);

  SpaceTimeField constant = SpaceTimeField::from_function(
      g, tg, [](double, double, double) { return -2.25; });
  CHECK(parabolic_norm(constant, g, 0.5, 0.5) == 2.25);

  SpaceTimeField u = SpaceTimeField::from_function(
      g, tg, [](double t, double x, double) { return t + x; });
  double time_part = std::max(
      time_holder_seminorm(u, g, 0.5, ValueNorm::SupDomain),
      [&] {
        double s = 0.0;
        for (std::size_t n = 0; n < tg.num_levels(); ++n)
          for (std::size_t i = 0; i < g.num_nodes(); ++i)
            s = std::max(s, std::abs(u.at(n, i)));
        return s;
      }());
  double space_part = 0.0;
  for (std::size_t n = 0; n < tg.num_levels(); ++n) {
    std::vector<double> lvl(u.level(n).begin(), u.level(n).end());
    space_part = std::max(space_part, space_norm(lvl, g, 0, 0.5));
  }
  CHECK(parabolic_norm(u, g, 0.5, 0.5) == std::max(time_part, space_part));
}

TEST_CASE("holder: picard metric") {
  Grid g = Grid::interval(0.0, 1.0, 33);
  TimeGrid tg(0.0, 0.25, 5);
  std::mt19937_64 rng(0x90cau);

  auto random_stf = [&]() {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    double a = c(rng), b = c(rng), d = c(rng);
    return SpaceTimeField::from_function(
        g, tg, [=](double t, double x, double) {
          return a * std::sin(2.0 * x + t) + b * t * x + d * x * x;
        });
  };

  SpaceTimeField U = random_stf(), V = random_stf(), W = random_stf();

  CHECK(picard_metric(U, U, g, 0.5) == 0.0);
  CHECK(picard_metric(U, V, g, 0.5) == picard_metric(V, U, g, 0.5));
  CHECK(picard_metric(U, V, g, 0.5) > 0.0);

  // Triangle inequality on random triples.
  for (int round = 0; round < 10; ++round) {
    SpaceTimeField A = random_stf(), B = random_stf(), C = random_stf();
    const double ab = picard_metric(A, B, g, 0.5);
    const double bc = picard_metric(B, C, g, 0.5);
    const double ac = picard_metric(A, C, g, 0.5);
    CHECK(ac <= (ab + bc) * (1.0 + 1e-12));
  }

  // Compositional oracle: the metric is exactly the documented sum of the
  // two norms of the difference field.
  SpaceTimeField diff(tg, g.num_nodes());
  for (std::size_t n = 0; n < tg.num_levels(); ++n)
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      diff.at(n, i) = U.at(n, i) - V.at(n, i);
  const double term1 = time_holder_norm(diff, g, 0.25, ValueNorm::C1);
  double term2 = 0.0;
  for (std::size_t n = 0; n < tg.num_levels(); ++n) {
    std::vector<double> lvl(diff.level(n).begin(), diff.level(n).end());
    term2 = std::max(term2, space_norm(lvl, g, 1, 0.5));
  }
  CHECK(picard_metric(U, V, g, 0.5) == term1 + term2);

  // Mismatched ladders or grids are rejected.
  TimeGrid other(0.0, 0.25, 6);
  SpaceTimeField X(other, g.num_nodes());
  CHECK_THROWS_AS(picard_metric(U, X, g, 0.5), InvalidArgument);
  Grid g2 = Grid::interval(0.0, 1.0, 17);
  CHECK_THROWS_AS(picard_metric(U, V, g2, 0.5), InvalidArgument);
}

TEST_CASE("holder: boundary norms") {
  Grid g = Grid::interval(0.0, 1.0, 9);
  std::vector<double> two_pts = {3.0, -5.0};
  for (int m : {0, 1, 2})
    CHECK(boundary_space_norm(two_pts, g, m, 0.5) == 5.0);
  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(boundary_space_norm(wrong, g, 0, 0.5), InvalidArgument);

  // Strip(2, 4, 3): bottom ring holds {0, 1, 0, -1} (a discrete sine), top
  // ring is zero. m = 0: sup is 1 and the opposite pair |1-(-1)| at geodesic
  // distance 1 gives seminorm 2. Tangential derivative at spacing 0.5 is
  // {2, 0, -2, 0}; its opposite pair gives 4, beating 2/sqrt(0.5).
  Grid s = Grid::strip(2.0, 4, 3);
  std::vector<double> ring(8, 0.0);
  ring[1] = 1.0;
  ring[3] = -1.0;
  CHECK(boundary_space_norm(ring, s, 0, 0.5) == 2.0);
  CHECK(boundary_space_norm(ring, s, 1, 0.5) == 4.0);

  // Constant boundary field: all derivative/seminorm parts vanish.
  std::vector<double> cb(8, 1.5);
  CHECK(boundary_space_norm(cb, s, 1, 0.5) == 1.5);
}

TEST_CASE("holder: norm report serialization") {
  NormReport r;
  r.set("sup_norm", 1.5);
  r.set("time_seminorm", 0.0625);
  r.set("sup_norm", 2.5);  // overwrite keeps position
  CHECK(r.items().size() == 2);
  CHECK(r.get("sup_norm") == 2.5);
  CHECK(r.has("time_seminorm"));
  CHECK(!r.has("absent"));
  CHECK_THROWS_AS(r.get("absent"), InvalidArgument);

  CHECK(r.csv_header() == "sup_norm,time_seminorm");
  CHECK(r.csv_row() == "2.5,0.0625");
  CHECK(r.to_json() == "{\"sup_norm\": 2.5, \"time_seminorm\": 0.0625}");

  // 17 significant digits round-trip exactly.
  NormReport t;
  t.set("v", 0.1 + 0.2);
  const std::string row = t.csv_row();
  CHECK(std::strtod(row.c_str(), nullptr) == 0.1 + 0.2);
}
