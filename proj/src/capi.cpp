#include "hhm/hhm.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "hhm/analysis.hpp"
#include "hhm/errors.hpp"
#include "hhm/field.hpp"
#include "hhm/geometry.hpp"
#include "hhm/parallel.hpp"
#include "hhm/verify.hpp"

struct hhm_rule {
  hhm::SphereRule rule;
};

struct hhm_field {
  std::string spec;
  std::shared_ptr<const hhm::SphereRule> rule;  // null for pullbacks
  hhm::FieldOptions options;
  hhm::MappingPtr map;
};

struct hhm_report {
  hhm::CheckReport report;
};

namespace {

thread_local std::string last_error;

template <class Fn>
hhm_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return HHM_OK;
  } catch (const hhm::InvalidArgument& e) {
    last_error = e.what();
    return HHM_ERR_INVALID;
  } catch (const hhm::GuardError& e) {
    last_error = e.what();
    return HHM_ERR_GUARD;
  } catch (const hhm::NumericError& e) {
    last_error = e.what();
    return HHM_ERR_NUMERIC;
  } catch (const hhm::Json::exception& e) {
    last_error = std::string("malformed JSON: ") + e.what();
    return HHM_ERR_INVALID;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HHM_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return HHM_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) hhm::throw_invalid(std::string(what) + " is null");
}

char* duplicate(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hhm::Vec vec(const double* p, int n) { return hhm::Vec(p, p + n); }

hhm::Json parse_request(const char* text) {
  if (!text || !*text) return hhm::Json::object();
  return hhm::Json::parse(text);
}

double json_number(const hhm::Json& v, const char* key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && v.get<std::string>() == "inf") return hhm::kInfinity;
  hhm::throw_invalid(std::string("norm request: '") + key + "' must be a number");
}

void build_field(hhm_field& f) {
  f.map = hhm::make_mapping(f.spec, *f.rule, f.options);
}

}  // namespace

extern "C" {

const char* hhm_last_error(void) { return last_error.c_str(); }

const char* hhm_version(void) { return HHM_VERSION; }

void hhm_set_threads(int count) { hhm::set_thread_count(count); }

void hhm_string_free(char* s) { delete[] s; }

hhm_status hhm_rule_create(int dim, int level, uint64_t seed, hhm_rule** out) {
  return hhm_rule_cached(dim, level, seed, nullptr, out);
}

hhm_status hhm_rule_cached(int dim, int level, uint64_t seed, const char* cache_dir, hhm_rule** out) {
  return guarded([&] {
    require(out, "out");
    *out = new hhm_rule{hhm::cached_sphere_rule(dim, level, seed, cache_dir ? cache_dir : "")};
  });
}

hhm_status hhm_rule_load(const char* path, hhm_rule** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new hhm_rule{hhm::load_rule(path)};
  });
}

hhm_status hhm_rule_save(const hhm_rule* rule, const char* path) {
  return guarded([&] {
    require(rule, "rule");
    require(path, "path");
    hhm::save_rule(rule->rule, path);
  });
}

void hhm_rule_free(hhm_rule* rule) { delete rule; }

int hhm_rule_dim(const hhm_rule* rule) { return rule ? rule->rule.dim : 0; }

int hhm_rule_level(const hhm_rule* rule) { return rule ? rule->rule.level : 0; }

size_t hhm_rule_size(const hhm_rule* rule) { return rule ? rule->rule.size() : 0; }

hhm_status hhm_rule_node(const hhm_rule* rule, size_t index, double* xi, double* weight) {
  return guarded([&] {
    require(rule, "rule");
    if (index >= rule->rule.size()) hhm::throw_invalid("rule node index out of range");
    const auto node = rule->rule.node(index);
    if (xi) std::copy(node.begin(), node.end(), xi);
    if (weight) *weight = rule->rule.weights[index];
  });
}

double hhm_rule_guard_radius(const hhm_rule* rule) {
  return rule ? std::min(rule->rule.guard_radius(), 1.0 - 1e-6) : 0.0;
}

hhm_status hhm_kernel_mass(const hhm_rule* rule, const double* x, double* out) {
  return guarded([&] {
    require(rule, "rule");
    require(x, "x");
    require(out, "out");
    *out = hhm::kernel_mass(rule->rule, vec(x, rule->rule.dim));
  });
}

hhm_status hhm_field_create(const char* spec, const hhm_rule* rule, int kernel_correction, hhm_field** out) {
  return guarded([&] {
    require(spec, "spec");
    require(rule, "rule");
    require(out, "out");
    auto f = std::make_unique<hhm_field>();
    f->spec = spec;
    f->rule = std::make_shared<hhm::SphereRule>(rule->rule);
    f->options.kernel_correction = kernel_correction != 0;
    build_field(*f);
    *out = f.release();
  });
}

hhm_status hhm_field_pullback(const hhm_field* base, const double* w, const double* rotation, hhm_field** out) {
  return guarded([&] {
    require(base, "base");
    require(w, "w");
    require(out, "out");
    const int n = base->map->dim();
    hhm::Matrix a = hhm::Matrix::identity(static_cast<std::size_t>(n));
    if (rotation) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rotation[i * n + j];
    }
    auto f = std::make_unique<hhm_field>();
    f->spec = base->spec + " o moebius";
    f->options = base->options;
    f->map = hhm::pullback(base->map, vec(w, n), a);
    *out = f.release();
  });
}

void hhm_field_free(hhm_field* field) { delete field; }

int hhm_field_dim(const hhm_field* field) { return field ? field->map->dim() : 0; }

int hhm_field_target_dim(const hhm_field* field) { return field ? field->map->target_dim() : 0; }

double hhm_field_guard_radius(const hhm_field* field) { return field ? field->map->guard_radius() : 0.0; }

hhm_status hhm_field_set_kernel_correction(hhm_field* field, int on) {
  return guarded([&] {
    require(field, "field");
    if (!field->rule) hhm::throw_invalid("kernel correction cannot be changed on a pullback");
    field->options.kernel_correction = on != 0;
    build_field(*field);
  });
}

hhm_status hhm_field_evaluate(const hhm_field* field, const double* x, double* out) {
  return guarded([&] {
    require(field, "field");
    require(x, "x");
    require(out, "out");
    const hhm::Vec v = field->map->value(vec(x, field->map->dim()));
    std::copy(v.begin(), v.end(), out);
  });
}

hhm_status hhm_field_jacobian(const hhm_field* field, const double* x, hhm_diff_mode mode, double* out) {
  return guarded([&] {
    require(field, "field");
    require(x, "x");
    require(out, "out");
    hhm::DiffMode m = hhm::DiffMode::Auto;
    if (mode == HHM_DIFF_ANALYTIC) m = hhm::DiffMode::Analytic;
    else if (mode == HHM_DIFF_FD) m = hhm::DiffMode::FiniteDifference;
    else if (mode != HHM_DIFF_AUTO) hhm::throw_invalid("unknown differentiation mode");
    const hhm::Matrix j = hhm::jacobian(*field->map, vec(x, field->map->dim()), m);
    std::copy(j.data().begin(), j.data().end(), out);
  });
}

hhm_status hhm_field_laplacian(const hhm_field* field, const double* x, double h, double* out) {
  return guarded([&] {
    require(field, "field");
    require(x, "x");
    require(out, "out");
    const hhm::Vec v = hhm::hyperbolic_laplacian(*field->map, vec(x, field->map->dim()), h);
    std::copy(v.begin(), v.end(), out);
  });
}

hhm_status hhm_integral_mean(const hhm_field* field, double r, double p, const hhm_rule* sphere, int derivative,
                             double* out) {
  return guarded([&] {
    require(field, "field");
    require(sphere, "sphere");
    require(out, "out");
    if (sphere->rule.dim != field->map->dim()) hhm::throw_invalid("sphere rule dimension differs from field");
    *out = derivative ? hhm::derivative_mean(*field->map, r, p, sphere->rule)
                      : hhm::integral_mean(*field->map, r, p, sphere->rule);
  });
}

hhm_status hhm_norm(const hhm_field* field, const char* request_json, char** out_json) {
  return guarded([&] {
    require(field, "field");
    require(out_json, "out_json");
    const hhm::Json req = parse_request(request_json);
    const hhm::Mapping& u = *field->map;
    std::string functional = "bloch";
    hhm::BlochParams params;
    hhm::GridSpec grid;
    grid.sphere_level = u.dim() == 2 ? 6 : (u.dim() == 3 ? 4 : 3);
    std::string omega = "id";
    for (const auto& [key, v] : req.items()) {
      if (key == "functional") functional = v.get<std::string>();
      else if (key == "p") params.p = json_number(v, "p");
      else if (key == "alpha") params.alpha = json_number(v, "alpha");
      else if (key == "beta") params.beta = json_number(v, "beta");
      else if (key == "a") params.a = json_number(v, "a");
      else if (key == "omega") omega = v.get<std::string>();
      else if (key == "grid") {
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "radii") grid.radii = gv.get<int>();
          else if (gk == "cap") grid.cap = json_number(gv, "cap");
          else if (gk == "sphere_level") grid.sphere_level = gv.get<int>();
          else if (gk == "seed") grid.seed = gv.get<std::uint64_t>();
          else if (gk == "polish") grid.polish = gv.get<bool>();
          else hhm::throw_invalid("norm request: unknown grid key '" + gk + "'");
        }
      } else {
        hhm::throw_invalid("norm request: unknown key '" + key + "'");
      }
    }
    params.omega = hhm::Majorant::parse(omega);
    hhm::NormEstimate e;
    if (functional == "bloch") {
      e = hhm::bloch_seminorm(u, grid);
    } else if (functional == "generalized") {
      params.validate();
      e = hhm::generalized_bloch_norm(u, params, grid);
    } else if (functional == "hardy") {
      const double cap = std::min({grid.cap, u.guard_radius(), 1.0 - 1e-6});
      e = hhm::hardy_norm(u, params.p, hhm::radii_schedule(grid.radii, cap), hhm::grid_sphere(u.dim(), grid));
    } else {
      hhm::throw_invalid("norm request: unknown functional '" + functional + "'");
    }
    hhm::Json out = hhm::Json::object();
    auto num = [](double v) -> hhm::Json {
      if (std::isfinite(v)) return v;
      return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    };
    out["functional"] = e.functional;
    out["params"] = e.params;
    out["value"] = num(e.value);
    out["origin_part"] = num(e.origin_part);
    out["seminorm_part"] = num(e.seminorm_part);
    hhm::Json radii = hhm::Json::array(), history = hhm::Json::array(), argmax = hhm::Json::array();
    for (double r : e.radii) radii.push_back(num(r));
    for (double h : e.history) history.push_back(num(h));
    for (double a : e.argmax) argmax.push_back(num(a));
    out["radii"] = radii;
    out["history"] = history;
    out["sphere_level"] = e.sphere_level;
    out["argmax"] = argmax;
    out["polished"] = e.polished;
    *out_json = duplicate(out.dump());
  });
}

hhm_status hhm_metric(const char* kind, int dim, const double* x, const double* y, int resolution, double* out) {
  return guarded([&] {
    require(kind, "kind");
    require(x, "x");
    require(y, "y");
    require(out, "out");
    if (dim < 1) hhm::throw_invalid("dimension must be positive");
    const hhm::Vec a = vec(x, dim), b = vec(y, dim);
    const std::string k = kind;
    if (k == "rho") {
      *out = hhm::hyperbolic_distance(a, b);
    } else if (k == "pseudo") {
      hhm::require_interior(a, "pseudo");
      hhm::require_interior(b, "pseudo");
      *out = hhm::pseudo_hyperbolic(a, b);
    } else if (k == "relative") {
      *out = hhm::relative_distance(a, b);
    } else if (k == "quasihyperbolic") {
      hhm::QuasihyperbolicOptions o;
      if (resolution > 0) o.resolution = resolution;
      *out = hhm::quasihyperbolic_distance(a, b, o).upper;
    } else {
      hhm::throw_invalid("unknown metric '" + k + "'");
    }
  });
}

hhm_status hhm_quasihyperbolic_json(int dim, const double* x, const double* y, int resolution, char** out_json) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    require(out_json, "out_json");
    hhm::QuasihyperbolicOptions o;
    if (resolution > 0) o.resolution = resolution;
    const hhm::QuasihyperbolicEstimate e = hhm::quasihyperbolic_distance(vec(x, dim), vec(y, dim), o);
    hhm::Json out = {{"upper", e.upper},           {"lower", e.lower},
                     {"richardson", e.richardson}, {"resolution", e.resolution},
                     {"converged", e.converged},   {"levels", e.level_values}};
    *out_json = duplicate(out.dump());
  });
}

size_t hhm_check_count(void) { return hhm::check_ids().size(); }

const char* hhm_check_id(size_t index) {
  return index < hhm::check_ids().size() ? hhm::check_ids()[index].c_str() : nullptr;
}

hhm_status hhm_verify_run(const char* check_id, const char* request_json, hhm_report** out) {
  return guarded([&] {
    require(check_id, "check_id");
    require(out, "out");
    *out = new hhm_report{hhm::run_check(check_id, parse_request(request_json))};
  });
}

void hhm_report_free(hhm_report* report) { delete report; }

hhm_verdict hhm_report_verdict(const hhm_report* report) {
  if (!report || report->report.skipped()) return HHM_SKIP;
  return report->report.pass() ? HHM_PASS : HHM_FAIL;
}

double hhm_report_margin(const hhm_report* report) { return report ? report->report.margin() : NAN; }

size_t hhm_report_samples(const hhm_report* report) { return report ? report->report.samples() : 0; }

hhm_status hhm_report_json(const hhm_report* report, char** out_json) {
  return guarded([&] {
    require(report, "report");
    require(out_json, "out_json");
    *out_json = duplicate(hhm::to_json(report->report).dump());
  });
}

}  // extern "C"
