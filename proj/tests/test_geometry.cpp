#include "dynbc/geometry.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "dynbc/field.hpp"

using namespace dynbc;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> sample(const Grid& g, double (*fn)(double, double)) {
  std::vector<double> f(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    auto p = g.position(i);
    f[i] = fn(p[0], p[1]);
  }
  return f;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("geometry: interval construction") {
  Grid g = Grid::interval(0.0, 1.0, 3);
  CHECK(g.num_nodes() == 3);
  CHECK(g.position(0)[0] == 0.0);
  CHECK(g.position(1)[0] == 0.5);
  CHECK(g.position(2)[0] == 1.0);
  CHECK(g.spacing(Axis::X) == 0.5);
  REQUIRE(g.boundary().size() == 2);
  CHECK(g.boundary()[0].node == 0);
  CHECK(g.boundary()[0].normal[0] == -1.0);
  CHECK(g.boundary()[1].node == 2);
  CHECK(g.boundary()[1].normal[0] == 1.0);
  CHECK(g.is_boundary(0));
  CHECK(!g.is_boundary(1));

  Grid wide = Grid::interval(-2.0, 2.0, 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(wide.position(i)[0] == -2.0 + static_cast<double>(i));

  Grid fine = Grid::interval(0.0, 1.0, 101);
  CHECK(fine.position(50)[0] == 0.5);  // exact: 50/100
  CHECK(fine.position(100)[0] == 1.0);
  CHECK(fine.spacing(Axis::X) == doctest::Approx(0.01).epsilon(1e-15));

  CHECK_THROWS_AS(Grid::interval(1.0, 0.0, 5), InvalidArgument);
  CHECK_THROWS_AS(Grid::interval(0.0, 1.0, 2), InvalidArgument);
}

TEST_CASE("geometry: strip construction") {
  Grid g = Grid::strip(2.0, 8, 5);
  CHECK(g.num_nodes() == 40);
  CHECK(g.spacing(Axis::X) == 0.25);
  CHECK(g.spacing(Axis::Y) == 0.25);
  CHECK(g.node_at(3, 2) == 2 * 8 + 3);
  auto p = g.position(g.node_at(3, 2));
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  REQUIRE(g.boundary().size() == 16);
  CHECK(g.boundary()[0].node == g.node_at(0, 0));
  CHECK(g.boundary()[0].normal[1] == -1.0);
  CHECK(g.boundary()[15].node == g.node_at(7, 4));
  CHECK(g.boundary()[15].normal[1] == 1.0);
  CHECK(g.is_boundary(g.node_at(5, 0)));
  CHECK(g.is_boundary(g.node_at(5, 4)));
  CHECK(!g.is_boundary(g.node_at(5, 2)));

  CHECK_THROWS_AS(Grid::strip(0.0, 8, 5), InvalidArgument);
  CHECK_THROWS_AS(Grid::strip(1.0, 2, 5), InvalidArgument);
  CHECK_THROWS_AS(Grid::strip(1.0, 8, 2), InvalidArgument);
}

TEST_CASE("geometry: strip distance is geodesic in x") {
  Grid g = Grid::strip(2.0, 8, 5);
  // Nodes one column apart across the periodic seam.
  CHECK(g.distance(g.node_at(0, 2), g.node_at(7, 2)) ==
        doctest::Approx(0.25).epsilon(1e-14));
  // Half the period is the farthest x separation.
  CHECK(g.distance(g.node_at(0, 2), g.node_at(4, 2)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  double d = g.distance(g.node_at(0, 0), g.node_at(7, 1));
  CHECK(d == doctest::Approx(std::sqrt(0.25 * 0.25 + 0.25 * 0.25)).epsilon(1e-14));
}

TEST_CASE("geometry: gradient exact on quadratics (interval)") {
  Grid g = Grid::interval(-1.0, 2.0, 13);
  std::mt19937_64 rng(0x9e0u);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int round = 0; round < 20; ++round) {
    double a = coef(rng), b = coef(rng), c = coef(rng);
    std::vector<double> f(g.num_nodes()), want(g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      double x = g.position(i)[0];
      f[i] = a + b * x + c * x * x;
      want[i] = b + 2.0 * c * x;
    }
    // One-sided rows at the endpoints are also exact on quadratics.
    CHECK(max_abs_diff(derivative_field(g, f, Axis::X), want) < 1e-12);
  }
}

TEST_CASE("geometry: second derivatives exact on cubics (interval)") {
  Grid g = Grid::interval(0.0, 1.0, 9);
  std::vector<double> f(g.num_nodes()), want(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    double x = g.position(i)[0];
    f[i] = x * x * x - 2.0 * x * x + 0.5 * x - 1.0;
    want[i] = 6.0 * x - 4.0;
  }
  CHECK(max_abs_diff(second_derivative_field(g, f, Deriv2::XX), want) < 1e-11);

  // Interior row is the classical {1,-2,1}/h^2.
  auto row = second_derivative_stencil(g, 4, Deriv2::XX);
  REQUIRE(row.size() == 3);
  double h = g.spacing(Axis::X);
  CHECK(row[0].node == 3);
  CHECK(row[0].weight == doctest::Approx(1.0 / (h * h)));
  CHECK(row[1].node == 4);
  CHECK(row[1].weight == doctest::Approx(-2.0 / (h * h)));
  CHECK(row[2].node == 5);
  CHECK(row[2].weight == doctest::Approx(1.0 / (h * h)));

  CHECK_THROWS_AS(second_derivative_stencil(g, 0, Deriv2::XX), InvalidArgument);
  CHECK_THROWS_AS(second_derivative_stencil(g, 8, Deriv2::XX), InvalidArgument);
  CHECK_THROWS_AS(second_derivative_stencil(g, 4, Deriv2::YY), InvalidArgument);
}

TEST_CASE("geometry: strip stencils exact on separable polynomials") {
  Grid g = Grid::strip(1.0, 8, 7);

  // yy on y^2 - y: constant 2, exact including one-sided boundary rows.
  auto f = sample(g, [](double, double y) { return y * y - y; });
  auto dyy = second_derivative_field(g, f, Deriv2::YY);
  for (double v : dyy) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
  // xx of a y-only field vanishes identically.
  auto dxx = second_derivative_field(g, f, Deriv2::XX);
  for (double v : dxx) CHECK(std::abs(v) < 1e-12);
  // gradient in y exact on quadratics at every row.
  auto dy = derivative_field(g, f, Axis::Y);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    double y = g.position(i)[1];
    CHECK(dy[i] == doctest::Approx(2.0 * y - 1.0).epsilon(1e-12));
  }

  // Mixed derivative: interior cross stencil and boundary composition are
  // exact on fields linear in y.
  auto fxy = sample(g, [](double x, double y) {
    return (y + 0.5) * std::sin(2.0 * kPi * x);
  });
  auto dxy = second_derivative_field(g, fxy, Deriv2::XY);
  double hx = g.spacing(Axis::X);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    double x = g.position(i)[0];
    // d/dx is the discrete periodic central derivative of sin(2 pi x);
    // compare against its exact discrete symbol sin(2 pi h)/h applied form.
    double want = std::cos(2.0 * kPi * x) * std::sin(2.0 * kPi * hx) / hx;
    CHECK(dxy[i] == doctest::Approx(want).epsilon(1e-10));
  }

  CHECK_THROWS_AS(second_derivative_stencil(g, g.node_at(2, 0), Deriv2::YY),
                  InvalidArgument);
  CHECK_THROWS_AS(second_derivative_stencil(g, g.node_at(2, 6), Deriv2::XY),
                  InvalidArgument);
  // xx keeps working on boundary rows: x stays periodic there.
  CHECK(second_derivative_stencil(g, g.node_at(2, 0), Deriv2::XX).size() == 3);
}

TEST_CASE("geometry: derivative stencils annihilate constants") {
  std::mt19937_64 rng(0xc0de5u);
  for (const Grid& g : {Grid::interval(0.0, 2.0, 11), Grid::strip(1.5, 6, 5)}) {
    std::vector<double> ones(g.num_nodes(), 3.25);
    for (Axis a : {Axis::X, Axis::Y}) {
      if (g.kind() == GridKind::Interval && a == Axis::Y) continue;
      auto d = derivative_field(g, ones, a);
      for (double v : d) CHECK(std::abs(v) < 1e-13);
    }
    for (Deriv2 d2 : {Deriv2::XX, Deriv2::XY, Deriv2::YY}) {
      if (g.kind() == GridKind::Interval && d2 != Deriv2::XX) continue;
      auto d = second_derivative_field(g, ones, d2);
      for (double v : d) CHECK(std::abs(v) < 1e-12);
    }
    // Spot-check weight sums on random nodes.
    for (int k = 0; k < 10; ++k) {
      std::size_t node = rng() % g.num_nodes();
      double s = 0.0;
      for (auto& e : gradient_stencil(g, node, Axis::X)) s += e.weight;
      CHECK(std::abs(s) < 1e-12 / g.spacing(Axis::X));
    }
  }
}

TEST_CASE("geometry: gradient converges at second order on smooth fields") {
  // Periodic direction of the strip, where the function is not polynomial.
  double err[2];
  std::size_t sizes[2] = {16, 32};
  for (int lvl = 0; lvl < 2; ++lvl) {
    Grid g = Grid::strip(1.0, sizes[lvl], 5);
    auto f = sample(g, [](double x, double) { return std::sin(2.0 * kPi * x); });
    auto d = derivative_field(g, f, Axis::X);
    double e = 0.0;
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      double x = g.position(i)[0];
      e = std::max(e, std::abs(d[i] - 2.0 * kPi * std::cos(2.0 * kPi * x)));
    }
    err[lvl] = e;
  }
  double order = std::log2(err[0] / err[1]);
  CHECK(order > 1.9);
  CHECK(order < 2.1);

  // One-sided interval rows: same study on exp(x).
  std::size_t nn[2] = {17, 33};
  for (int lvl = 0; lvl < 2; ++lvl) {
    Grid g = Grid::interval(0.0, 1.0, nn[lvl]);
    std::vector<double> f(g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      f[i] = std::exp(g.position(i)[0]);
    auto d = derivative_field(g, f, Axis::X);
    double e = 0.0;
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      e = std::max(e, std::abs(d[i] - f[i]));
    err[lvl] = e;
  }
  order = std::log2(err[0] / err[1]);
  CHECK(order > 1.9);
  CHECK(order < 2.2);
}

TEST_CASE("geometry: field length mismatches are rejected") {
  Grid g = Grid::interval(0.0, 1.0, 9);
  std::vector<double> bad(7, 0.0);
  CHECK_THROWS_AS(derivative_field(g, bad, Axis::X), InvalidArgument);
  CHECK_THROWS_AS(second_derivative_field(g, bad, Deriv2::XX), InvalidArgument);
}

TEST_CASE("field: time grid ladder") {
  TimeGrid tg(0.25, 0.5, 8);
  CHECK(tg.dt() == doctest::Approx(0.0625).epsilon(1e-16));
  CHECK(tg.num_levels() == 9);
  CHECK(tg.t(0) == 0.25);
  CHECK(tg.t(8) == 0.75);  // hits t0 + tau exactly
  CHECK(tg.t(4) == doctest::Approx(0.5).epsilon(1e-16));
  CHECK_THROWS_AS(TimeGrid(0.0, 0.0, 4), InvalidArgument);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), InvalidArgument);
}

TEST_CASE("field: space-time storage and sampling") {
  Grid g = Grid::interval(0.0, 1.0, 5);
  TimeGrid tg(0.0, 1.0, 4);
  SpaceTimeField f = SpaceTimeField::from_function(
      g, tg, [](double t, double x, double) { return t + 2.0 * x; });
  CHECK(f.n_nodes() == 5);
  CHECK(f.at(0, 0) == 0.0);
  CHECK(f.at(2, 4) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(f.level(4)[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(f.at(5, 0), InvalidArgument);

  SpaceTimeField gcopy = f;
  CHECK(gcopy == f);
  gcopy.at(1, 1) += 1e-12;
  CHECK(!(gcopy == f));
}
