#include <cmath>
#include <random>

#include "doctest.h"
#include "hhm/errors.hpp"
#include "hhm/geometry.hpp"
#include "oracles.hpp"

using namespace hhm;

TEST_SUITE("geometry") {
  TEST_CASE("bracket values and symmetry") {
    CHECK(bracket(Vec{0.5, 0.0}, Vec{0.5, 0.0}) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(bracket(Vec{0.0, 0.0}, Vec{0.3, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
    std::mt19937_64 g(1);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const auto x = oracle::random_point(g, 3, 0.99), w = oracle::random_point(g, 3, 0.99);
      worst = std::max(worst, std::fabs(bracket(x, w) - bracket(w, x)));
      // Direct definition | |x| w - x/|x| |.
      const double nx = oracle::norm(x);
      std::vector<double> d(3);
      for (int k = 0; k < 3; ++k) d[k] = nx * w[k] - x[k] / nx;
      CHECK(bracket(x, w) == doctest::Approx(oracle::norm(d)).epsilon(1e-13));
    }
    CHECK(worst <= 1e-14);
  }

  TEST_CASE("moebius map fixed values") {
    const Vec w{0.5, 0.0};
    CHECK(norm(moebius_phi(w, w)) <= 1e-15);
    CHECK(distance(moebius_phi(w, Vec{0.0, 0.0}), w) <= 1e-15);
    const Vec y = moebius_phi(w, Vec{-0.5, 0.0});
    CHECK(y[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(std::fabs(y[1]) <= 1e-16);
  }

  TEST_CASE("moebius ratio identity and involution") {
    std::mt19937_64 g(2);
    for (int n : {2, 3, 4}) {
      for (int i = 0; i < 200; ++i) {
        const auto x = oracle::random_point(g, n, 0.95), w = oracle::random_point(g, n, 0.95);
        std::vector<double> d(n);
        for (int k = 0; k < n; ++k) d[k] = x[k] - w[k];
        const double q = oracle::norm(d) / bracket(x, w);
        CHECK(std::fabs(norm(moebius_phi(w, x)) - q) <= 1e-13);
        CHECK(std::fabs(norm(moebius_phi(x, w)) - q) <= 1e-13);
        CHECK(distance(moebius_phi(w, moebius_phi(w, x)), x) <= 1e-12);
      }
    }
  }

  TEST_CASE("moebius jacobian against central differences") {
    std::mt19937_64 g(3);
    for (int i = 0; i < 20; ++i) {
      const auto w = oracle::random_point(g, 3, 0.8), x = oracle::random_point(g, 3, 0.8);
      const Matrix j = moebius_phi_jacobian(w, x);
      for (int c = 0; c < 3; ++c) {
        Vec xp(x.begin(), x.end()), xm(x.begin(), x.end());
        const double h = 1e-6;
        xp[c] += h;
        xm[c] -= h;
        const Vec fp = moebius_phi(w, xp), fm = moebius_phi(w, xm);
        for (int r = 0; r < 3; ++r) CHECK(j(r, c) == doctest::Approx((fp[r] - fm[r]) / (2 * h)).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("hyperbolic distance") {
    CHECK(hyperbolic_distance(Vec{0.0, 0.0}, Vec{0.5, 0.0}) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    CHECK(hyperbolic_distance(Vec{0.3, 0.2}, Vec{0.3, 0.2}) == 0.0);
    std::mt19937_64 g(4);
    for (int i = 0; i < 50; ++i) {
      const auto x = oracle::random_point(g, 3, 0.9), y = oracle::random_point(g, 3, 0.9);
      const Matrix a = random_orthogonal(3, 100 + i);
      CHECK(std::fabs(hyperbolic_distance(x, y) - hyperbolic_distance(a.apply(x), a.apply(y))) <= 1e-12);
      const MoebiusMap m = MoebiusMap::random(3, 0.9, 200 + i);
      CHECK(std::fabs(hyperbolic_distance(x, y) - hyperbolic_distance(m(x), m(y))) <= 1e-10);
    }
    CHECK_THROWS_AS(hyperbolic_distance(Vec{1.0 - 1e-16, 0.0}, Vec{0.0, 0.0}), GuardError);
  }

  TEST_CASE("pseudo-hyperbolic ball") {
    const EuclideanBall e = pseudo_ball(Vec{0.5, 0.0}, 0.5);
    CHECK(e.center[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(e.radius == doctest::Approx(0.4).epsilon(1e-15));
    const EuclideanBall e0 = pseudo_ball(Vec{0.0, 0.0, 0.0}, 0.3);
    CHECK(norm(e0.center) == 0.0);
    CHECK(e0.radius == doctest::Approx(0.3));
    std::mt19937_64 g(5);
    int disagreements = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto w = oracle::random_point(g, 3, 0.9), z = oracle::random_point(g, 3, 0.999);
      const double r = 0.05 + 0.9 * std::uniform_real_distribution<double>()(g);
      const EuclideanBall b = pseudo_ball(w, r);
      const double a = norm(moebius_phi(w, z)) - r;
      const double c = distance(z, b.center) - b.radius;
      if ((a < 0) != (c < 0) && std::min(std::fabs(a), std::fabs(c)) > 1e-12) ++disagreements;
    }
    CHECK(disagreements == 0);
  }

  TEST_CASE("relative distance") {
    CHECK(relative_distance(Vec{0.2, 0.1}, Vec{0.2, 0.1}) == 0.0);
    CHECK(relative_distance(Vec{0.0, 0.0}, Vec{0.25, 0.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(relative_distance(Vec{0.1, 0.5}, Vec{-0.3, 0.2}) == relative_distance(Vec{-0.3, 0.2}, Vec{0.1, 0.5}));
  }

  TEST_CASE("quasihyperbolic distance") {
    const auto e = quasihyperbolic_distance(Vec{0.0, 0.0}, Vec{0.5, 0.0});
    CHECK(e.upper == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(e.upper >= std::log(2.0) * (1 - 1e-13));
    CHECK(quasihyperbolic_distance(Vec{0.3, 0.1}, Vec{0.3, 0.1}).upper == 0.0);
    std::mt19937_64 g(6);
    for (int i = 0; i < 20; ++i) {
      const auto x = oracle::random_point(g, 2, 0.9), y = oracle::random_point(g, 2, 0.9);
      const auto q = quasihyperbolic_distance(x, y, {64, 400, 1e-13});
      const double rho = hyperbolic_distance(x, y);
      CHECK(q.upper >= rho / 2 - 1e-12);
      CHECK(q.upper <= rho * 1.02);
      for (std::size_t k = 1; k < q.level_values.size(); ++k) CHECK(q.level_values[k] <= q.level_values[k - 1] * (1 + 1e-13));
    }
  }

  TEST_CASE("unit ball volume") {
    for (int n = 1; n <= 10; ++n) CHECK(unit_ball_volume(n) == doctest::Approx(oracle::ball_volume(n)).epsilon(1e-14));
  }

  TEST_CASE("interior and boundary validation") {
    CHECK_THROWS_AS(require_interior(Vec{0.6, 0.8}, "t"), InvalidArgument);
    CHECK_NOTHROW(require_boundary(Vec{0.6, 0.8}, "t"));
    CHECK_THROWS_AS(require_boundary(Vec{0.6, 0.7}, "t"), InvalidArgument);
  }
}
