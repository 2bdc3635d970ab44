#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "parlab/grid.hpp"

using namespace parlab;

namespace {
const double kPi = 3.14159265358979323846;

// independent strict-interior test for the shifted L-shape used below:
// interior of (0,2)x(0,1) u (0,1)x(1,2) is the union of the two maximal open
// rectangles (0,2)x(0,1) and (0,1)x(0,2); shift by (-0.5, -0.5)
bool lshape_strictly_inside(double x, double y) {
  double u = x + 0.5, v = y + 0.5;
  return (u > 0 && u < 2 && v > 0 && v < 1) || (u > 0 && u < 1 && v > 0 && v < 2);
}
}  // namespace

TEST_CASE("parabolic distance matches the definition") {
  CHECK(parabolic_distance({{0, 0}, 0}, {{0, 0}, 4}) == Catch::Approx(2.0));
  CHECK(parabolic_distance({{1, 2}, 3}, {{1, 2}, 3}) == 0.0);
  CHECK(parabolic_distance({{3, 0}, 0}, {{0, 0}, 4}) == Catch::Approx(3.0));
}

TEST_CASE("parabolic distance is symmetric and zero iff equal") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 200; ++k) {
    SpacetimePoint a{{u(rng), u(rng)}, u(rng)};
    SpacetimePoint b{{u(rng), u(rng)}, u(rng)};
    CHECK(parabolic_distance(a, b) == Catch::Approx(parabolic_distance(b, a)));
    if (a.y != b.y || a.t != b.t) CHECK(parabolic_distance(a, b) > 0.0);
  }
}

TEST_CASE("interval grids use the origin-anchored lattice") {
  auto dom = SpatialDomain::interval(-kPi / 2, kPi / 2, true);

  // coarsest spacing admitting exactly one interior node
  SECTION("one node at the origin") {
    // h = pi/4 on (-pi/2, pi/2) gives the three lattice points -pi/4, 0, pi/4
    auto g = build_grid(dom, kPi / 4);
    REQUIRE(g->size() == 3);
    CHECK(g->node(g->reference_node())[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(g->reference_is_origin());
  }

  SECTION("seven nodes at h = pi/8") {
    auto g = build_grid(dom, kPi / 8);
    REQUIRE(g->size() == 7);
    CHECK(g->node(0)[0] == Catch::Approx(-3 * kPi / 8));
    CHECK(g->node(6)[0] == Catch::Approx(3 * kPi / 8));
  }

  SECTION("nodes are strictly interior") {
    auto g = build_grid(dom, kPi / 8);
    for (const auto& y : g->nodes()) CHECK(dom.contains_strict(y));
  }
}

TEST_CASE("grid on (0, pi) avoids spurious boundary nodes") {
  auto dom = SpatialDomain::interval(0.0, kPi);
  auto g = build_grid(dom, kPi / 100);
  REQUIRE(g->size() == 99);
  // reference falls back to the interior node nearest the center
  CHECK_FALSE(g->reference_is_origin());
  CHECK(g->node(g->reference_node())[0] == Catch::Approx(kPi / 2));
  CHECK(g->cell_midpoints().size() == 100);
}

TEST_CASE("refinement at least doubles interior nodes per axis") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> lo_d(-3.0, -0.5), hi_d(0.5, 3.0);
  for (int k = 0; k < 30; ++k) {
    auto dom = SpatialDomain::interval(lo_d(rng), hi_d(rng), true);
    double h = (dom.hi - dom.lo) / std::uniform_int_distribution<int>(3, 20)(rng);
    auto coarse = build_grid(dom, h);
    auto fine = build_grid(dom, h / 2);
    CHECK(fine->size() >= 2 * coarse->size());
  }
}

TEST_CASE("L-shape interior count equals brute-force lattice enumeration") {
  std::vector<Point> verts{{-0.5, -0.5}, {1.5, -0.5}, {1.5, 0.5},
                           {0.5, 0.5},   {0.5, 1.5},  {-0.5, 1.5}};
  auto dom = SpatialDomain::axis_polygon(verts, true);
  double h = 0.25;
  auto g = build_grid(dom, h);

  int expected = 0;
  for (int i = -10; i <= 10; ++i)
    for (int j = -10; j <= 10; ++j)
      if (lshape_strictly_inside(i * h, j * h)) ++expected;
  CHECK(g->size() == expected);
  CHECK(expected > 0);
  CHECK(g->reference_is_origin());
  CHECK(g->node(g->reference_node())[0] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("grid error paths") {
  CHECK_THROWS_AS(SpatialDomain::interval(1.0, 2.0, true), Error);  // origin outside
  auto dom = SpatialDomain::interval(0.0, 1.0);
  CHECK_THROWS_AS(build_grid(dom, 0.6), Error);  // spacing above half the feature width
  CHECK_THROWS_AS(build_grid(dom, -0.1), Error);
}

TEST_CASE("cylinder window validates integral step counts") {
  CylinderWindow w(0.0, 5.0, 1e-3);
  CHECK(w.steps() == 5000);
  CHECK_THROWS_AS(CylinderWindow(0.0, 1.0, 0.0), Error);
  CHECK_THROWS_AS(CylinderWindow(1.0, 0.0, 0.1), Error);
  CHECK_THROWS_AS(CylinderWindow(0.0, 1.0, 0.3), Error);
}
