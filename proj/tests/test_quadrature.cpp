#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hhm/errors.hpp"
#include "hhm/geometry.hpp"
#include "hhm/quadrature.hpp"
#include "oracles.hpp"

using namespace hhm;

namespace {

// E[xi_1^(2k)] over the uniform sphere S^(n-1): (2k-1)!! / (n (n+2) ... (n+2k-2)).
double sphere_moment(int n, int k) {
  double num = 1, den = 1;
  for (int i = 0; i < k; ++i) {
    num *= 2 * i + 1;
    den *= n + 2 * i;
  }
  return num / den;
}

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("planar rule layout") {
    const SphereRule r = sphere_rule(2, 3);
    REQUIRE(r.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) {
      const double t = 2 * std::numbers::pi * k / 8;
      CHECK(r.node(k)[0] == doctest::Approx(std::cos(t)).epsilon(1e-15));
      CHECK(r.node(k)[1] == doctest::Approx(std::sin(t)).epsilon(1e-15));
      CHECK(r.weights[k] == 0.125);
    }
  }

  TEST_CASE("weights normalised and nodes on the sphere") {
    for (auto [n, level] : {std::pair{2, 5}, {3, 4}, {4, 3}, {5, 2}}) {
      const SphereRule r = sphere_rule(n, level, 7);
      CHECK(integrate_sphere(r, [](std::span<const double>) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
      for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::fabs(norm(r.node(i)) - 1) <= 1e-14);
    }
  }

  TEST_CASE("polynomial moments of deterministic rules") {
    const SphereRule r2 = sphere_rule(2, 4);
    CHECK(integrate_sphere(r2, [](std::span<const double> x) { return x[0] * x[0]; }) ==
          doctest::Approx(0.5).epsilon(1e-14));
    const SphereRule r3 = sphere_rule(3, 4);
    for (int k = 1; k <= 4; ++k) {
      const double v = integrate_sphere(r3, [k](std::span<const double> x) { return std::pow(x[0], 2 * k); });
      CHECK(v == doctest::Approx(sphere_moment(3, k)).epsilon(1e-12));
      const double z = integrate_sphere(r3, [k](std::span<const double> x) { return std::pow(x[2], 2 * k); });
      CHECK(z == doctest::Approx(sphere_moment(3, k)).epsilon(1e-12));
    }
    CHECK(integrate_sphere(sphere_rule(3, 3), [](std::span<const double> x) { return x[0] * x[0]; }) ==
          doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  TEST_CASE("trapezoid aliasing witness") {
    const SphereRule r = sphere_rule(2, 4);
    const int big = static_cast<int>(r.size());
    CHECK(integrate_sphere(r, [big](std::span<const double> x) { return std::cos(big * std::atan2(x[1], x[0])); }) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("randomised rule has an honest error bar") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const SphereRule r = sphere_rule(4, 8, seed);
      const auto e = integrate_sphere_with_error(r, [](std::span<const double> x) { return x[0] * x[0] * x[1] * x[1]; });
      // E[x1^2 x2^2] on S^3 = 1/(n(n+2)) = 1/24.
      CHECK(e.error > 0);
      CHECK(std::fabs(e.value - 1.0 / 24) <= 4 * e.error);
    }
  }

  TEST_CASE("gauss-legendre") {
    std::vector<double> t, w;
    gauss_legendre(8, t, w);
    for (int p = 0; p <= 15; ++p) {
      double s = 0;
      for (std::size_t i = 0; i < t.size(); ++i) s += w[i] * std::pow(t[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(std::fabs(s - exact) <= 1e-14);
    }
  }

  TEST_CASE("ball volume normalisation") {
    const BallRule rule = ball_rule(2, 8, 5);
    const double v = integrate_ball(rule, EuclideanBall{Vec{0.0, 0.0}, 0.5}, [](std::span<const double>) { return 1.0; },
                                    Measure::Volume);
    CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    const BallRule rule3 = ball_rule(3, 8, 3);
    const double v3 = integrate_ball(rule3, EuclideanBall{Vec{0.1, 0.2, 0.0}, 0.3},
                                     [](std::span<const double>) { return 1.0; }, Measure::Volume);
    CHECK(v3 == doctest::Approx(0.027).epsilon(1e-12));
    // Mean distance to the centre of a disc of radius R is 2R/3.
    const double m = integrate_ball(rule, EuclideanBall{Vec{0.2, 0.1}, 0.3},
                                    [](std::span<const double> y) { return std::hypot(y[0] - 0.2, y[1] - 0.1); },
                                    Measure::Volume) /
                     0.09;
    CHECK(m == doctest::Approx(0.2).epsilon(1e-12));
  }

  TEST_CASE("invariant measure of a pseudo-hyperbolic ball") {
    std::mt19937_64 g(8);
    for (int n : {2, 3}) {
      const double exact = oracle::simpson(
          [n](double t) { return n * std::pow(t, n - 1) * std::pow(1 - t * t, -n); }, 0.0, 1.0 / 9);
      CHECK(exact <= std::pow(9.0 / 80.0, n));
      const BallRule rule = ball_rule(n, 12, n == 2 ? 6 : 4);
      for (int i = 0; i < 5; ++i) {
        const auto w = oracle::random_point(g, n, 0.9);
        const double tau = integrate_ball(rule, pseudo_ball(w, 1.0 / 9), [](std::span<const double>) { return 1.0; },
                                          Measure::Invariant);
        CHECK(tau == doctest::Approx(exact).epsilon(1e-8));
      }
    }
    CHECK_THROWS_AS(integrate_ball(ball_rule(2, 4, 3), EuclideanBall{Vec{0.5, 0.0}, 0.5},
                                   [](std::span<const double>) { return 1.0; }, Measure::Invariant),
                    GuardError);
  }

  TEST_CASE("rule serialisation round trip") {
    const SphereRule r = sphere_rule(4, 3, 11);
    const SphereRule back = parse_rule(serialize_rule(r));
    CHECK(back.dim == r.dim);
    CHECK(back.level == r.level);
    CHECK(back.seed == r.seed);
    CHECK(back.nodes == r.nodes);
    CHECK(back.weights == r.weights);
    CHECK_THROWS_AS(parse_rule("garbage"), InvalidArgument);
  }

  TEST_CASE("guard radius grows with the level") {
    double last = 0;
    for (int level = 6; level <= 12; ++level) {
      const double g = sphere_rule(2, level).guard_radius();
      CHECK(g > last);
      last = g;
    }
    CHECK(sphere_rule(2, 9).level_for_radius(0.99) > 9);
  }

  TEST_CASE("invalid rule requests") {
    CHECK_THROWS_AS(sphere_rule(1, 3), InvalidArgument);
    CHECK_THROWS_AS(sphere_rule(2, 0), InvalidArgument);
  }
}
