#include <cmath>
#include <random>

#include "doctest.h"
#include "hhm/analysis.hpp"
#include "hhm/boundary.hpp"
#include "hhm/errors.hpp"
#include "hhm/field.hpp"
#include "oracles.hpp"

using namespace hhm;

namespace {

Field field(const std::string& spec, int n, int level) {
  return Field(BoundaryMap::parse(spec, n), sphere_rule(n, level));
}

GridSpec grid2() {
  GridSpec g;
  g.sphere_level = 6;
  return g;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("operator norm against power iteration") {
    Matrix d(2, 2);
    d(0, 0) = 3;
    d(1, 1) = 4;
    CHECK(operator_norm(d) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(operator_norm(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-15));
    std::mt19937_64 g(31);
    std::normal_distribution<double> z;
    for (auto [m, n] : {std::pair{2, 2}, {3, 3}, {1, 4}, {4, 2}, {2, 5}, {6, 6}}) {
      for (int t = 0; t < 10; ++t) {
        Matrix a(m, n);
        std::vector<double> flat;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) {
            a(i, j) = z(g);
            flat.push_back(a(i, j));
          }
        CHECK(operator_norm(a) == doctest::Approx(oracle::spectral_norm(flat, m, n)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("operator norm dominates row norms") {
    std::mt19937_64 g(32);
    std::normal_distribution<double> z;
    for (int t = 0; t < 50; ++t) {
      Matrix a(3, 3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = z(g);
      for (int i = 0; i < 3; ++i) CHECK(operator_norm(a) >= norm(a.row(i)) * (1 - 1e-14));
    }
  }

  TEST_CASE("fd step") {
    CHECK(fd_step(Vec{0.0, 0.0}) == 1e-4);
    CHECK(fd_step(Vec{0.999, 0.0}) == doctest::Approx(1e-5));
  }

  TEST_CASE("hyperbolic gradient") {
    const Field u = field("perturb:eps=0.1", 2, 9);
    const Vec x{0.3, 0.5};
    const Vec gh = hyperbolic_gradient(u, 1, x);
    const Matrix j = jacobian(u, x);
    CHECK(norm(gh) == doctest::Approx((1 - 0.34) * norm(j.row(1))).epsilon(1e-14));
    const Vec g0 = hyperbolic_gradient(u, 0, Vec{0.0, 0.0});
    const Matrix j0 = jacobian(u, Vec{0.0, 0.0});
    CHECK(g0[0] == doctest::Approx(j0(0, 0)));
  }

  TEST_CASE("integral means") {
    const SphereRule rule = sphere_rule(2, 8);
    const Field id = field("identity", 2, 9);
    const Field re = field("coord:j=1", 2, 9);
    const Field c = field("const:c=3,4", 2, 9);
    for (double r : {0.1, 0.5, 0.9}) {
      for (double p : {1.0, 2.0, 3.5, kInfinity}) {
        CHECK(integral_mean(id, r, p, rule) == doctest::Approx(r).epsilon(1e-12));
        CHECK(integral_mean(c, r, p, rule) == doctest::Approx(5.0).epsilon(1e-9));
      }
      CHECK(integral_mean(re, r, 2.0, rule) == doctest::Approx(r / std::sqrt(2.0)).epsilon(1e-12));
      CHECK(derivative_mean(id, r, 2.0, rule) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("radii schedule") {
    const auto r = radii_schedule(8, 0.95);
    CHECK(r.front() == 0.0);
    CHECK(r[4] == doctest::Approx(0.5));
    CHECK(r.back() == 0.95);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
  }

  TEST_CASE("hardy norm") {
    const Field id = field("identity", 2, 9);
    const GridSpec g = grid2();
    const auto e = hardy_norm(id, 2.0, radii_schedule(28, id.guard_radius()), grid_sphere(2, g));
    CHECK(e.value <= 1.0);
    CHECK(e.value == doctest::Approx(id.guard_radius()).epsilon(1e-9));
    const Field b = field("bump:width=0.8:gamma=1:height=2", 2, 9);
    const auto eb = hardy_norm(b, kInfinity, radii_schedule(28, b.guard_radius()), grid_sphere(2, g));
    CHECK(eb.value <= 2.0 + 1e-8);
  }

  TEST_CASE("bloch seminorm") {
    const Field id = field("identity", 2, 9);
    const auto e = bloch_seminorm(id, grid2());
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.origin_part <= 1e-15);
    const Field c = field("const:c=1,2", 2, 9);
    const auto ec = bloch_seminorm(c, grid2());
    CHECK(ec.value <= 1e-7);
    CHECK(ec.origin_part == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
    for (std::size_t i = 1; i < e.history.size(); ++i) CHECK(e.history[i] >= e.history[i - 1]);
  }

  TEST_CASE("majorants") {
    CHECK(Majorant::parse("id")(0.3) == 0.3);
    CHECK(Majorant::parse("power:gamma=0.5")(0.25) == doctest::Approx(0.5));
    CHECK_THROWS_AS(Majorant::parse("power:gamma=1.5"), InvalidArgument);
    CHECK_THROWS_AS(Majorant::parse("nope"), InvalidArgument);
    for (const char* spec : {"id", "power:gamma=0.3", "log"}) {
      const Majorant w = Majorant::parse(spec);
      CHECK(w(0.0) == 0.0);
      double prev_w = 0, prev_ratio = kInfinity;
      for (double t = 1e-6; t < 100; t *= 1.3) {
        CHECK(w(t) > prev_w);
        CHECK(w(t) / t <= prev_ratio * (1 + 1e-14));
        prev_w = w(t);
        prev_ratio = w(t) / t;
      }
    }
  }

  TEST_CASE("phi weight") {
    BlochParams p;
    p.alpha = 1;
    p.beta = 0;
    CHECK(phi_weight(p, 0.3) == doctest::Approx(0.7));
    p.beta = 1;
    p.a = std::exp(1.0);
    CHECK(phi_weight(p, 0.0) == doctest::Approx(1.0));
    for (auto [alpha, beta, a] : {std::tuple{1.0, 1.0, std::exp(1.0)}, {0.5, -1.0, 2.0}, {2.0, 0.5, 2.0}}) {
      BlochParams q;
      q.alpha = alpha;
      q.beta = beta;
      q.a = a;
      double prev = kInfinity;
      for (double r = 0; r < 0.9999; r += 1e-3) {
        CHECK(phi_weight(q, r) <= prev * (1 + 1e-14));
        prev = phi_weight(q, r);
      }
    }
    BlochParams bad;
    bad.beta = 1;
    bad.a = 2;  // needs a >= e^(beta/alpha)
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }

  TEST_CASE("generalized bloch norm") {
    const Field id = field("identity", 2, 9);
    BlochParams p;
    const auto e = generalized_bloch_norm(id, p, grid2());
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-9));
    const Field c = field("const:c=0,2", 2, 9);
    CHECK(generalized_bloch_norm(c, p, grid2()).value == doctest::Approx(2.0).epsilon(1e-7));
    // (1 - r) and (1 - r^2) weights differ by at most a factor 2.
    for (const char* spec : {"perturb:eps=0.2", "bump:width=1:gamma=0.5", "trig:k=3:component=both"}) {
      const Field u = field(spec, 2, 9);
      const double semi = generalized_bloch_norm(u, p, grid2()).seminorm_part;
      const double bloch = bloch_seminorm(u, grid2()).value;
      CHECK_MESSAGE(semi >= bloch / 2 * (1 - 1e-6), spec);
      CHECK_MESSAGE(semi <= bloch * (1 + 1e-6), spec);
    }
  }
}
