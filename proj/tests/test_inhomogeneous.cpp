#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "parlab/inhomogeneous.hpp"

using namespace parlab;

namespace {
const double kPi = 3.14159265358979323846;

GridPtr heat_grid(int m) { return build_grid(SpatialDomain::interval(0.0, kPi), kPi / m); }

Eigen::VectorXd sine_mode(const Grid& g, int k) {
  Eigen::VectorXd v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = std::sin(k * g.node(i)[0]);
  return v;
}

double mode_rate(const Grid& g, int k) {
  double h = g.spacing()[0];
  return 4.0 / (h * h) * std::pow(std::sin(k * h / 2), 2);
}
}  // namespace

TEST_CASE("exhaustion solve") {
  auto g = heat_grid(60);
  auto spec = CoefficientSpec::heat(1);
  double dt = 1e-2;

  SECTION("zero source gives the zero solution for every N") {
    for (double N : {2.0, 4.0}) {
      auto tr = exhaustion_solve(spec, SourceSpec::zero(), g, N, dt);
      for (const auto& s : tr.slices) CHECK(s.lpNorm<Eigen::Infinity>() == 0.0);
    }
  }

  SECTION("stationary source relaxes to the discrete stationary state") {
    auto f = SourceSpec::of(Expr::parse("sin(y1)"));
    auto tr = exhaustion_solve(spec, f, g, 10.0, dt);
    // oracle: A u = f has u = sin / mu on the sine mode, and the transient
    // from the -N start decays at rate ~ mu
    double mu = mode_rate(*g, 1);
    const auto& mid = tr.at_time(0.0);
    for (int i = 0; i < g->size(); ++i)
      CHECK(mid[i] == Catch::Approx(std::sin(g->node(i)[0]) / mu).margin(2.0 * std::exp(-8.0)));
  }

  SECTION("causality: f supported in t > -1 leaves earlier slices zero") {
    // f = sin(y1) * max(t, 0) has no closed-form gate in the grammar; use a
    // smooth-off gate exp(-(t+2)^2 * 40) shifted so mass sits near t = 0...
    // simpler: evolve with f = 0 until t = -1 is structural, so synthesize by
    // comparing against a run started at t = -1
    auto f = SourceSpec::of(Expr::parse("sin(y1)*exp(0-(t)*(t)*4)"));
    auto tr = exhaustion_solve(spec, f, g, 4.0, dt);
    // at t = -3 the source has been negligible (e^{-36}); the field is tiny
    CHECK(tr.at_time(-3.0).lpNorm<Eigen::Infinity>() < 1e-8);
  }

  SECTION("N below 2 is rejected") {
    CHECK_THROWS_AS(exhaustion_solve(spec, SourceSpec::zero(), g, 1.0, dt), Error);
  }
}

TEST_CASE("exhaustion limit on the stationary sine source") {
  auto g = heat_grid(100);
  auto spec = CoefficientSpec::heat(1);
  auto f = SourceSpec::of(Expr::parse("sin(y1)"));
  double dt = 1e-3;
  auto res = exhaustion_limit(spec, f, g, {4.0, 8.0, 16.0}, 2.0, dt);

  SECTION("uniform bound: sup norms vary below 5 percent") {
    CHECK(res.bound_variation_all < 0.05);
    CHECK(res.bound_variation_top < 0.05);
    // C0 empirical approx 1/sqrt(pi) for this f
    CHECK(res.C0_empirical == Catch::Approx(1.0 / std::sqrt(kPi)).epsilon(5e-3));
  }

  SECTION("window differences decay geometrically at the e^{-4} scale") {
    REQUIRE(res.d_N.size() == 2);
    CHECK(res.d_N[1] < res.d_N[0]);
    CHECK(res.cauchy_ratio < 0.2);
    // transient oracle: d_N ~ e^{-mu (N - W)} scale per doubling
    double mu = mode_rate(*g, 1);
    double expect0 = std::exp(-mu * 2.0) * (1.0 - std::exp(-mu * 4.0)) / mu;
    CHECK(res.d_N[0] == Catch::Approx(expect0).epsilon(0.02));
    CHECK(res.cauchy_ratio == Catch::Approx(std::exp(-4.0 * mu)).epsilon(0.05));
  }

  SECTION("u0 matches the stationary solution on the window") {
    double sup_err = 0.0;
    for (long long k = 0; k <= CylinderWindow(-2, 2, dt).steps(); ++k) {
      double t = -2.0 + k * dt;
      const auto& s = res.u0.at_time(t);
      for (int i = 0; i < g->size(); ++i)
        sup_err = std::max(sup_err, std::abs(s[i] - std::sin(g->node(i)[0])));
    }
    CHECK(sup_err < 1e-3);
  }

  SECTION("linearity: scaling f scales u0 exactly") {
    auto f3 = SourceSpec::of(Expr::parse("3*sin(y1)"));
    auto res3 = exhaustion_limit(spec, f3, g, {4.0, 8.0}, 2.0, dt);
    auto res1 = exhaustion_limit(spec, f, g, {4.0, 8.0}, 2.0, dt);
    for (std::size_t k = 0; k < res3.u0.slices.size(); ++k)
      CHECK((res3.u0.slices[k] - 3.0 * res1.u0.slices[k]).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(res3.C0_empirical == Catch::Approx(res1.C0_empirical).epsilon(1e-9));
  }
}

TEST_CASE("exhaustion limit trivial and error paths") {
  auto g = heat_grid(40);
  auto spec = CoefficientSpec::heat(1);

  SECTION("zero source is fully trivial") {
    auto res = exhaustion_limit(spec, SourceSpec::zero(), g, {4.0, 8.0}, 2.0, 1e-2);
    for (double s : res.sup_norms) CHECK(s == 0.0);
    for (double d : res.d_N) CHECK(d == 0.0);
    CHECK(res.cauchy_ratio == 0.0);
    for (const auto& s : res.u0.slices) CHECK(s.lpNorm<Eigen::Infinity>() == 0.0);
  }

  SECTION("invalid N lists are rejected") {
    CHECK_THROWS_AS(exhaustion_limit(spec, SourceSpec::zero(), g, {8.0, 4.0}, 2.0, 1e-2), Error);
    CHECK_THROWS_AS(exhaustion_limit(spec, SourceSpec::zero(), g, {2.0, 8.0}, 2.0, 1e-2), Error);
    CHECK_THROWS_AS(exhaustion_limit(spec, SourceSpec::zero(), g, {8.0}, 2.0, 1e-2), Error);
  }

  SECTION("source growing into the past breaks the Cauchy property") {
    // f ~ e^{-2t} outruns the e^{-t}-rate transient damping, so the window
    // differences grow with N and the construction must refuse
    auto f = SourceSpec::of(Expr::parse("sin(y1)*exp(0 - 2*t)"));
    try {
      exhaustion_limit(spec, f, g, {4.0, 6.0, 8.0}, 2.0, 1e-2);
      FAIL("expected NoCauchyDecay");
    } catch (const Error& e) {
      CHECK(e.code() == errc::no_cauchy_decay);
    }
  }

  SECTION("uniqueness surrogate: different N lists with the same top agree") {
    auto f = SourceSpec::of(Expr::parse("sin(y1)"));
    auto a = exhaustion_limit(spec, f, g, {4.0, 8.0}, 2.0, 1e-2);
    auto b = exhaustion_limit(spec, f, g, {4.0, 6.0, 8.0}, 2.0, 1e-2);
    for (std::size_t k = 0; k < a.u0.slices.size(); ++k)
      CHECK((a.u0.slices[k] - b.u0.slices[k]).lpNorm<Eigen::Infinity>() == 0.0);
    // and different tops agree within the top Cauchy gap
    auto c = exhaustion_limit(spec, f, g, {4.0, 16.0}, 2.0, 1e-2);
    double diff = 0.0;
    for (std::size_t k = 0; k < a.u0.slices.size(); ++k)
      diff = std::max(diff, (a.u0.slices[k] - c.u0.slices[k]).lpNorm<Eigen::Infinity>());
    CHECK(diff <= c.d_N.back() * (1.0 + 1e-9));
  }
}

TEST_CASE("decomposition round trips") {
  auto g = heat_grid(100);
  auto spec = CoefficientSpec::heat(1);
  auto f = SourceSpec::of(Expr::parse("sin(y1)"));
  double dt = 1e-3;
  auto res = exhaustion_limit(spec, f, g, {4.0, 8.0}, 2.0, dt);
  auto w = eternal_from_eigenpair(principal_eigenpair(spec, g, 1e-11), g);
  CylinderWindow window(-2.0, 2.0, dt);
  auto wt = w.trace_on(window, Scheme::implicit_euler);

  auto synthesize = [&](double a) {
    EvolutionTrace u = res.u0;
    for (std::size_t k = 0; k < u.slices.size(); ++k) u.slices[k] += a * wt.slices[k];
    return u;
  };

  SECTION("a = 2 exactly recovered") {
    auto rep = decompose(synthesize(2.0), res.u0, w);
    CHECK(rep.a == Catch::Approx(2.0).margin(1e-10));
    CHECK(rep.residual < 1e-12);
    CHECK(rep.a_field_spread < 1e-10);
  }

  SECTION("a = 0 boundary case") {
    auto rep = decompose(res.u0, res.u0, w);
    CHECK(rep.a == Catch::Approx(0.0).margin(1e-10));
    CHECK(rep.residual < 1e-12);
  }

  SECTION("randomized round trip over a in (0, 10)") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ua(0.0, 10.0);
    for (int k = 0; k < 25; ++k) {
      double a = ua(rng);
      auto rep = decompose(synthesize(a), res.u0, w);
      CHECK(std::abs(rep.a - a) < 1e-6);
      CHECK(rep.residual < 1e-8);
    }
  }

  SECTION("negative coefficient raises NegativeCoefficient") {
    try {
      decompose(synthesize(-0.5), res.u0, w);
      FAIL("expected NegativeCoefficient");
    } catch (const Error& e) {
      CHECK(e.code() == errc::negative_coefficient);
    }
  }
}
