#include <cmath>

#include "doctest.h"
#include "hhm/boundary.hpp"
#include "hhm/closed_form.hpp"
#include "hhm/errors.hpp"
#include "hhm/field.hpp"
#include "hhm/parallel.hpp"
#include "hhm/verify.hpp"
#include "oracles.hpp"

using namespace hhm;

namespace {

Field field(const std::string& spec, int n, int level) {
  return Field(BoundaryMap::parse(spec, n), sphere_rule(n, level));
}

const CheckPart& part(const CheckReport& r, const std::string& name) {
  for (const auto& p : r.parts)
    if (p.name == name) return p;
  FAIL("missing part " << name);
  return r.parts.front();
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("check part margins") {
    CheckPart a;
    a.record(1.0, 3.0);
    CHECK(a.margin == 2.0);
    CheckPart r;
    r.kind = MarginKind::Relative;
    r.record(1.0, 4.0);
    CHECK(r.margin == doctest::Approx(0.75));
    r.record(std::nan(""), 1.0);
    CHECK(r.margin == -kInfinity);
    CHECK(!r.pass());
    CheckReport rep;
    rep.parts = {a};
    CHECK(rep.pass());
    CHECK(rep.verdict() == "pass");
  }

  TEST_CASE("inverse phi integral") {
    BlochParams p;
    for (double r : {0.1, 0.5, 0.9, 0.999}) {
      CHECK(inverse_phi_integral(p, r) == doctest::Approx(-std::log1p(-r)).epsilon(1e-12));
    }
    for (auto [alpha, beta, a] : {std::tuple{1.5, 0.5, 2.0}, {0.5, -1.0, 2.0}, {1.0, 1.0, 3.0}}) {
      BlochParams q;
      q.alpha = alpha;
      q.beta = beta;
      q.a = a;
      for (double r : {0.3, 0.8, 0.95}) {
        const double exact = oracle::simpson(
            [&](double s) { return 1.0 / (std::pow(1 - s, alpha) * std::pow(std::log(a / (1 - s)), beta)); }, 0.0, r,
            1e-14);
        CHECK(inverse_phi_integral(q, r) == doctest::Approx(exact).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("log slope fit") {
    std::vector<double> r, v;
    for (int i = 0; i < 10; ++i) {
      r.push_back(1 - std::pow(0.5, i + 1));
      v.push_back(3.0 * std::pow(1 - r.back(), -2.5));
    }
    const SlopeFit f = fit_log_slope(r, v);
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f.residual <= 1e-12);
    CHECK_THROWS_AS(fit_log_slope({0.1, 0.2}, {1, 2}), InvalidArgument);
  }

  TEST_CASE("oscillation on the identity") {
    const Field u = field("identity", 2, 9);
    OscillationOptions o;
    o.samples = 40;
    o.grid.sphere_level = 6;
    const CheckReport r = check_oscillation(u, o);
    CHECK(r.pass());
    // Mean of |y - x| over a disc of radius r is 2r/3, so lhs/r <= 2/3.
    const auto& d = part(r, "alpha=1,omega=id").details;
    CHECK(d["worst_lhs"].get<double>() / d["worst_r"].get<double>() == doctest::Approx(2.0 / 3).epsilon(1e-9));
  }

  TEST_CASE("lipschitz bound on registry fields") {
    for (const char* spec : {"identity", "perturb:eps=0.2", "bump:width=1:gamma=0.5"}) {
      BlochLipschitzOptions o;
      o.pairs = 2000;
      o.origin_points = 200;
      o.grid.sphere_level = 6;
      const CheckReport r = check_bloch_lipschitz(field(spec, 2, 9), o);
      CHECK_MESSAGE(r.pass(), spec);
    }
  }

  TEST_CASE("integral mean closed-form witness") {
    IntegralMeanOptions o;
    BlochParams p;
    o.params = {p};
    o.ps = {2.0};
    o.grid.sphere_level = 6;
    const CheckReport r = check_integral_mean(field("identity", 2, 9), o);
    CHECK(r.pass());
    for (const auto& row : r.parts.front().details["rows"]) {
      const double rad = row[0].get<double>();
      CHECK(row[1].get<double>() == doctest::Approx(rad).epsilon(1e-10));
      CHECK(row[2].get<double>() == doctest::Approx(-std::log1p(-rad)).epsilon(1e-8));
    }
  }

  TEST_CASE("derivative growth") {
    DerivativeGrowthOptions o;
    o.points = 12;
    o.sphere_level = 12;
    const CheckReport lac = check_derivative_growth(*make_closed_form("lacunary:alpha=1", 2), o);
    CHECK(lac.pass());
    const double slope = part(lac, "q=2").details["slope"].get<double>();
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
    const CheckReport bounded = check_derivative_growth(field("identity", 2, 9), o);
    CHECK(bounded.skipped());
  }

  TEST_CASE("quasihyperbolic ratio for linear fields") {
    for (const char* spec : {"identity", "identity:scale=0.5"}) {
      WubOptions o;
      o.pairs = 6;
      o.wub_pairs = 200;
      o.mu07_points = 16;
      o.lipschitz_points = 200;
      o.expect_ratio = 1.0;
      const CheckReport r = check_wub_quasihyperbolic(field(spec, 2, 9), o);
      CHECK_MESSAGE(r.pass(), spec);
      CHECK(std::fabs(part(r, "mu3_refinement").details["mu3"].get<double>() - 1) <= 0.02);
    }
    WubOptions o;
    o.lipschitz_points = 100;
    const CheckReport folded = check_wub_quasihyperbolic(field("trig:k=3:component=both", 2, 9), o);
    CHECK(folded.skipped());
  }

  TEST_CASE("sub-mean-value constants") {
    SubmeanOptions o;
    o.points = 12;
    const CheckReport r = check_submeanvalue(field("perturb:eps=0.1", 2, 9), o);
    CHECK(r.pass());
    CHECK(std::isfinite(part(r, "mu07").details["base"].get<double>()));
    const CheckReport c = check_submeanvalue(field("const:c=1", 2, 9), o);
    CHECK(c.pass());
  }

  TEST_CASE("invariances and geometry identities") {
    InvarianceOptions o;
    o.samples = 20;
    o.geometry_samples = 1000;
    o.bloch_maps = 1;
    o.grid.sphere_level = 6;
    const auto u = solve_dirichlet(BoundaryMap::parse("perturb:eps=0.2", 2), sphere_rule(2, 9));
    CHECK(check_invariances(u, o).pass());
    for (const auto& p : geometry_identity_parts(3, 2000, 4)) CHECK_MESSAGE(p.pass(), p.name);
  }

  TEST_CASE("runner") {
    CHECK_THROWS_AS(run_check("nope", Json::object()), InvalidArgument);
    CHECK_THROWS_AS(run_check("invariances", Json{{"options", {{"bogus", 1}}}}), InvalidArgument);
    CHECK_THROWS_AS(run_check("invariances", Json{{"dim", 1}}), InvalidArgument);
    CHECK_THROWS_AS(run_check("invariances", Json{{"field", "nosuch"}}), InvalidArgument);
    const Json req = {{"dim", 2},
                      {"field", "perturb:eps=0.1"},
                      {"seed", 3},
                      {"options", {{"samples", 10}, {"geometry_samples", 200}, {"bloch_maps", 1}}}};
    set_thread_count(1);
    const std::string a = to_json(run_check("invariances", req)).dump();
    set_thread_count(3);
    const std::string b = to_json(run_check("invariances", req)).dump();
    set_thread_count(0);
    CHECK(a == b);
    const CheckReport skip = run_check("submeanvalue", Json{{"field", "lacunary"}});
    CHECK(skip.skipped());
  }
}
