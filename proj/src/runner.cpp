#include <algorithm>
#include <set>

#include "hhm/closed_form.hpp"
#include "hhm/errors.hpp"
#include "verify_internal.hpp"

namespace hhm {

namespace {

// Reads typed options from a JSON object and rejects keys nobody asked for.
class OptionReader {
 public:
  OptionReader(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_null() && !obj_.is_object()) throw_invalid(where_ + ": options must be an object");
  }

  bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    used_.insert(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        out = number(obj_.at(key), key);
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        const Json& v = obj_.at(key);
        if (!v.is_array()) throw_invalid(where_ + ": option '" + key + "' must be a list");
        out.clear();
        for (const Json& e : v) out.push_back(number(e, key));
      } else {
        out = obj_.at(key).get<T>();
      }
    } catch (const Json::exception&) {
      throw_invalid(where_ + ": option '" + key + "' has the wrong type");
    }
  }

  const Json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &obj_.at(key);
  }

  void finish() const {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw_invalid(where_ + ": unknown option '" + key + "'");
    }
  }

 private:
  double number(const Json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf") return kInfinity;
      if (s == "-inf") return -kInfinity;
    }
    throw_invalid(where_ + ": option '" + key + "' must be a number");
  }

  const Json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

void read_grid(OptionReader& r, GridSpec& grid) {
  const Json* g = r.child("grid");
  if (!g) return;
  OptionReader gr(*g, "grid");
  gr.get("radii", grid.radii);
  gr.get("cap", grid.cap);
  gr.get("sphere_level", grid.sphere_level);
  gr.get("seed", grid.seed);
  gr.get("polish", grid.polish);
  gr.finish();
}

std::vector<BlochParams> read_param_sets(const Json& sets) {
  if (!sets.is_array()) throw_invalid("integral_mean: option 'param_sets' must be a list");
  std::vector<BlochParams> out;
  for (const Json& s : sets) {
    OptionReader r(s, "param_sets");
    BlochParams p;
    std::string omega = "id";
    r.get("alpha", p.alpha);
    r.get("beta", p.beta);
    r.get("a", p.a);
    r.get("omega", omega);
    r.finish();
    p.omega = Majorant::parse(omega);
    p.validate();
    out.push_back(p);
  }
  return out;
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids{"oscillation",       "bloch_lipschitz",     "integral_mean",
                                            "derivative_growth", "wub_quasihyperbolic", "submeanvalue",
                                            "invariances"};
  return ids;
}

int default_field_level(int n) { return n == 2 ? 9 : (n == 3 ? 7 : 10); }

CheckReport run_check(const std::string& check_id, const Json& request) {
  if (std::find(check_ids().begin(), check_ids().end(), check_id) == check_ids().end()) {
    throw_invalid("unknown check id '" + check_id + "'");
  }
  OptionReader req(request, "request");
  int n = 2;
  std::string spec = "identity";
  std::uint64_t seed = 0;
  bool correction = true;
  std::string cache_dir;
  std::string check = check_id;
  req.get("check", check);
  req.get("dim", n);
  req.get("field", spec);
  req.get("seed", seed);
  req.get("kernel_correction", correction);
  req.get("cache_dir", cache_dir);
  if (n < 2 || n > 8) throw_invalid("dim must lie in [2, 8]");
  int level = default_field_level(n);
  req.get("level", level);
  static const Json empty = Json::object();
  const Json* opts_json = req.child("options");
  req.finish();
  OptionReader r(opts_json ? *opts_json : empty, check_id);

  const SphereRule rule = cached_sphere_rule(n, level, seed, cache_dir);
  FieldOptions fopts;
  fopts.kernel_correction = correction;
  const MappingPtr u = make_mapping(spec, rule, fopts);
  const auto* field = dynamic_cast<const Field*>(u.get());

  CheckReport report;
  if (check_id == "oscillation") {
    OscillationOptions o;
    o.seed = seed;
    o.grid.seed = seed;
    o.grid.sphere_level = 0;
    r.get("alphas", o.alphas);
    r.get("majorants", o.majorants);
    r.get("samples", o.samples);
    r.get("radial_points", o.radial_points);
    r.get("angular_level", o.angular_level);
    r.get("tolerance", o.tolerance);
    read_grid(r, o.grid);
    r.finish();
    report = check_oscillation(*u, o);
  } else if (check_id == "bloch_lipschitz") {
    BlochLipschitzOptions o;
    o.seed = seed;
    o.grid.seed = seed;
    o.grid.sphere_level = 0;
    r.get("pairs", o.pairs);
    r.get("boundary_pairs", o.boundary_pairs);
    r.get("origin_points", o.origin_points);
    r.get("rel_tolerance", o.rel_tolerance);
    read_grid(r, o.grid);
    r.finish();
    report = check_bloch_lipschitz(*u, o);
  } else if (check_id == "integral_mean") {
    IntegralMeanOptions o;
    o.seed = seed;
    o.grid.seed = seed;
    o.grid.sphere_level = 0;
    if (const Json* sets = r.child("param_sets")) o.params = read_param_sets(*sets);
    r.get("ps", o.ps);
    r.get("radii", o.radii);
    r.get("rel_tolerance", o.rel_tolerance);
    read_grid(r, o.grid);
    r.finish();
    report = check_integral_mean(*u, o);
  } else if (check_id == "derivative_growth") {
    DerivativeGrowthOptions o;
    o.seed = seed;
    o.assert_q_spread = starts_with(spec, "lacunary");
    r.get("p", o.p);
    r.get("alpha", o.alpha);
    r.get("qs", o.qs);
    r.get("r_min", o.r_min);
    r.get("r_max", o.r_max);
    r.get("points", o.points);
    r.get("sphere_level", o.sphere_level);
    r.get("slack", o.slack);
    r.get("q_spread", o.q_spread);
    r.get("assert_q_spread", o.assert_q_spread);
    r.finish();
    report = check_derivative_growth(*u, o);
  } else if (check_id == "wub_quasihyperbolic") {
    WubOptions o;
    o.seed = seed;
    // Only for n = 2 is the extension of xi -> c xi the linear map itself.
    if (n == 2 && starts_with(spec, "identity")) o.expect_ratio = 1.0;
    r.get("pairs", o.pairs);
    r.get("wub_pairs", o.wub_pairs);
    r.get("mu07_points", o.mu07_points);
    r.get("lipschitz_points", o.lipschitz_points);
    r.get("path_resolution", o.path_resolution);
    r.get("boundary_level", o.boundary_level);
    r.get("radial_points", o.radial_points);
    r.get("angular_level", o.angular_level);
    r.get("r_max", o.r_max);
    r.get("expect_ratio", o.expect_ratio);
    r.get("ratio_slack", o.ratio_slack);
    r.get("drift", o.drift);
    r.finish();
    if (field) report = check_wub_quasihyperbolic(*field, o);
  } else if (check_id == "submeanvalue") {
    SubmeanOptions o;
    o.seed = seed;
    r.get("ps", o.ps);
    r.get("deltas", o.deltas);
    r.get("points", o.points);
    r.get("radial_points", o.radial_points);
    r.get("angular_level", o.angular_level);
    r.get("drift", o.drift);
    r.finish();
    if (field) report = check_submeanvalue(*field, o);
  } else {
    InvarianceOptions o;
    o.seed = seed;
    o.grid.seed = seed;
    o.grid.sphere_level = 0;
    r.get("samples", o.samples);
    r.get("geometry_samples", o.geometry_samples);
    r.get("bloch_maps", o.bloch_maps);
    r.get("h", o.h);
    r.get("residual_tolerance", o.residual_tolerance);
    r.get("gradient_tolerance", o.gradient_tolerance);
    r.get("geometry", o.geometry);
    read_grid(r, o.grid);
    r.finish();
    report = check_invariances(u, o);
  }
  if (report.check_id.empty()) {
    report.check_id = check_id;
    report.dim = n;
    report.seed = seed;
    report.skip_reason = "needs a field given by boundary data";
  }
  report.field_id = spec;
  report.params["field_level"] = level;
  report.params["kernel_correction"] = correction;
  return report;
}

}  // namespace hhm
