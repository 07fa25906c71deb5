#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "hhm/hhm.h"
#include "json.hpp"

TEST_CASE("version and check list") {
  CHECK(std::string(hhm_version()).size() > 0);
  CHECK(hhm_check_count() == 7);
  CHECK(hhm_check_id(100) == nullptr);
}

TEST_CASE("rules") {
  hhm_rule* r = nullptr;
  REQUIRE(hhm_rule_create(2, 4, 0, &r) == HHM_OK);
  CHECK(hhm_rule_size(r) == 16);
  CHECK(hhm_rule_dim(r) == 2);
  double xi[2], w = 0;
  CHECK(hhm_rule_node(r, 4, xi, &w) == HHM_OK);
  CHECK(xi[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(xi[1] == doctest::Approx(1.0));
  CHECK(w == 1.0 / 16);
  CHECK(hhm_rule_node(r, 16, xi, &w) == HHM_ERR_INVALID);
  CHECK(std::string(hhm_last_error()).find("range") != std::string::npos);
  const double x[2] = {0.1, 0.2};
  double mass = 0;
  CHECK(hhm_kernel_mass(r, x, &mass) == HHM_OK);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  hhm_rule_free(r);
  CHECK(hhm_rule_create(1, 4, 0, &r) == HHM_ERR_INVALID);
  CHECK(hhm_rule_create(2, 4, 0, nullptr) == HHM_ERR_INVALID);
}

TEST_CASE("fields") {
  hhm_rule* r = nullptr;
  REQUIRE(hhm_rule_create(2, 9, 0, &r) == HHM_OK);
  hhm_field* f = nullptr;
  REQUIRE(hhm_field_create("trig:k=2:component=cos", r, 1, &f) == HHM_OK);
  CHECK(hhm_field_dim(f) == 2);
  CHECK(hhm_field_target_dim(f) == 1);
  const double x[2] = {0.3, 0.4};
  double u = 0;
  CHECK(hhm_field_evaluate(f, x, &u) == HHM_OK);
  CHECK(u == doctest::Approx(0.09 - 0.16).epsilon(1e-10));
  double j[2];
  CHECK(hhm_field_jacobian(f, x, HHM_DIFF_ANALYTIC, j) == HHM_OK);
  CHECK(j[0] == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(j[1] == doctest::Approx(-0.8).epsilon(1e-9));
  const double far[2] = {0.99, 0.0};
  CHECK(hhm_field_evaluate(f, far, &u) == HHM_ERR_GUARD);
  CHECK(std::string(hhm_last_error()).find("guard") != std::string::npos);
  const double outside[2] = {1.5, 0.0};
  CHECK(hhm_field_evaluate(f, outside, &u) == HHM_ERR_INVALID);
  CHECK(hhm_field_set_kernel_correction(f, 0) == HHM_OK);
  CHECK(hhm_field_evaluate(f, x, &u) == HHM_OK);
  CHECK(u == doctest::Approx(-0.07).epsilon(1e-9));

  double lap = 1;
  CHECK(hhm_field_laplacian(f, x, 1e-3, &lap) == HHM_OK);
  CHECK(std::fabs(lap) <= 1e-6);

  const double w[2] = {0.2, -0.1};
  hhm_field* pb = nullptr;
  CHECK(hhm_field_pullback(f, w, nullptr, &pb) == HHM_OK);
  CHECK(hhm_field_set_kernel_correction(pb, 1) == HHM_ERR_INVALID);
  hhm_field_free(pb);

  hhm_field* bad = nullptr;
  CHECK(hhm_field_create("nosuch", r, 1, &bad) == HHM_ERR_INVALID);
  CHECK(std::string(hhm_last_error()).find("nosuch") != std::string::npos);
  CHECK(bad == nullptr);
  hhm_field_free(f);
  hhm_rule_free(r);
}

TEST_CASE("means and norms") {
  hhm_rule* r = nullptr;
  REQUIRE(hhm_rule_create(2, 9, 0, &r) == HHM_OK);
  hhm_rule* s = nullptr;
  REQUIRE(hhm_rule_create(2, 8, 0, &s) == HHM_OK);
  hhm_field* f = nullptr;
  REQUIRE(hhm_field_create("identity", r, 1, &f) == HHM_OK);
  double m = 0;
  CHECK(hhm_integral_mean(f, 0.6, INFINITY, s, 0, &m) == HHM_OK);
  CHECK(m == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(hhm_integral_mean(f, 0.6, 2.0, s, 1, &m) == HHM_OK);
  CHECK(m == doctest::Approx(1.0).epsilon(1e-9));
  char* json = nullptr;
  REQUIRE(hhm_norm(f, R"({"functional":"bloch","grid":{"sphere_level":6}})", &json) == HHM_OK);
  const auto doc = nlohmann::json::parse(json);
  hhm_string_free(json);
  CHECK(doc["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hhm_norm(f, R"({"functional":"nope"})", &json) == HHM_ERR_INVALID);
  CHECK(hhm_norm(f, "{not json", &json) == HHM_ERR_INVALID);
  hhm_field_free(f);
  hhm_rule_free(s);
  hhm_rule_free(r);
}

TEST_CASE("metrics") {
  const double o[2] = {0, 0}, h[2] = {0.5, 0};
  double v = 0;
  CHECK(hhm_metric("rho", 2, o, h, 0, &v) == HHM_OK);
  CHECK(v == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(hhm_metric("quasihyperbolic", 2, o, h, 64, &v) == HHM_OK);
  CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(hhm_metric("relative", 2, o, h, 0, &v) == HHM_OK);
  CHECK(v == doctest::Approx(1.0));
  CHECK(hhm_metric("nope", 2, o, h, 0, &v) == HHM_ERR_INVALID);
}

TEST_CASE("verification reports") {
  hhm_report* rep = nullptr;
  REQUIRE(hhm_verify_run("invariances",
                         R"({"field":"const:c=1","options":{"samples":10,"geometry_samples":500,"bloch_maps":1}})",
                         &rep) == HHM_OK);
  CHECK(hhm_report_verdict(rep) == HHM_PASS);
  CHECK(hhm_report_samples(rep) > 0);
  CHECK(hhm_report_margin(rep) >= 0);
  char* json = nullptr;
  REQUIRE(hhm_report_json(rep, &json) == HHM_OK);
  const auto doc = nlohmann::json::parse(json);
  hhm_string_free(json);
  CHECK(doc["check"].get<std::string>() == "invariances");
  hhm_report_free(rep);
  CHECK(hhm_verify_run("nope", "{}", &rep) == HHM_ERR_INVALID);
  CHECK(hhm_verify_run("invariances", R"({"options":{"zzz":1}})", &rep) == HHM_ERR_INVALID);
  CHECK(std::string(hhm_last_error()).find("zzz") != std::string::npos);
}
