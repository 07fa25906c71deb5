#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "hhm/hhm.h"
#include "json.hpp"

using hhm_cli::Config;
using hhm_cli::ConfigError;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

// A failed C API call, carrying the library status.
class ApiError : public std::runtime_error {
 public:
  ApiError(hhm_status status, const std::string& what) : std::runtime_error(what), status(status) {}
  hhm_status status;
};

void check(hhm_status s) {
  if (s != HHM_OK) throw ApiError(s, hhm_last_error());
}

struct RuleDeleter {
  void operator()(hhm_rule* r) const { hhm_rule_free(r); }
};
struct FieldDeleter {
  void operator()(hhm_field* f) const { hhm_field_free(f); }
};
struct ReportDeleter {
  void operator()(hhm_report* r) const { hhm_report_free(r); }
};
using RulePtr = std::unique_ptr<hhm_rule, RuleDeleter>;
using FieldPtr = std::unique_ptr<hhm_field, FieldDeleter>;
using ReportPtr = std::unique_ptr<hhm_report, ReportDeleter>;

std::string take_string(char* s) {
  std::string out(s);
  hhm_string_free(s);
  return out;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Keys that do not change results and stay out of the config hash.
const std::set<std::string> kUnhashed{"output", "report", "sidecar", "threads", "cache_dir"};

struct Context {
  Config config;
  std::string version = hhm_version();
  std::uint64_t hash = 0;
  std::uint64_t seed = 0;

  std::string hash_text() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return std::string("fnv1a64:") + buf;
  }
  std::string header() const {
    return "# hhm " + version + "\n# config_hash " + hash_text() + "\n# seed " + std::to_string(seed) + "\n";
  }
  Json header_json() const {
    return Json{{"tool", "hhm"}, {"version", version}, {"config_hash", hash_text()}, {"seed", seed}};
  }
};

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("key 'output': cannot write '" + path + "'");
  out << content;
}

int default_level(int n) { return n == 2 ? 9 : (n == 3 ? 7 : 10); }

struct FieldSetup {
  int dim = 2;
  int level = 9;
  std::string spec;
  bool correction = true;
  std::string cache_dir;
};

FieldSetup read_field_setup(Config& c) {
  FieldSetup f;
  f.dim = static_cast<int>(c.integer("dim", 2));
  if (f.dim < 2 || f.dim > 8) throw ConfigError("key 'dim': must lie in [2, 8]");
  f.level = static_cast<int>(c.integer("level", default_level(f.dim)));
  if (f.level < 1 || f.level > 24) throw ConfigError("key 'level': must lie in [1, 24]");
  f.spec = c.text("field", "identity");
  f.correction = c.boolean("kernel_correction", true);
  const char* env = std::getenv("HHM_CACHE_DIR");
  f.cache_dir = c.text("cache_dir", env ? env : "");
  return f;
}

FieldPtr make_field(const FieldSetup& f, std::uint64_t seed) {
  hhm_rule* rule = nullptr;
  check(hhm_rule_cached(f.dim, f.level, seed, f.cache_dir.c_str(), &rule));
  RulePtr r(rule);
  hhm_field* field = nullptr;
  const hhm_status s = hhm_field_create(f.spec.c_str(), r.get(), f.correction ? 1 : 0, &field);
  if (s == HHM_ERR_INVALID) throw ConfigError(std::string("key 'field': ") + hhm_last_error());
  check(s);
  return FieldPtr(field);
}

// ------------------------------------------------------------------ solve

int cmd_solve(Context& ctx) {
  Config& c = ctx.config;
  const FieldSetup setup = read_field_setup(c);
  const std::vector<double> radii = c.numbers("radii", {0.0, 0.25, 0.5, 0.75, 0.9});
  const int ray_level = static_cast<int>(c.integer("ray_level", setup.dim == 2 ? 3 : (setup.dim == 3 ? 2 : 1)));
  const std::string output = c.text("output", "-");
  c.require_all_used();
  ctx.hash = c.hash(kUnhashed);

  FieldPtr field = make_field(setup, ctx.seed);
  hhm_rule* rays_raw = nullptr;
  check(hhm_rule_create(setup.dim, ray_level, ctx.seed, &rays_raw));
  RulePtr rays(rays_raw);
  const int n = setup.dim, m = hhm_field_target_dim(field.get());
  std::string out = ctx.header();
  for (int i = 0; i < n; ++i) out += (i ? ",x" : "x") + std::to_string(i + 1);
  for (int j = 0; j < m; ++j) out += ",u" + std::to_string(j + 1);
  out += "\n";
  std::vector<double> xi(n), x(n), u(m);
  for (double r : radii) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("key 'radii': radius " + fmt17(r) + " outside [0, 1)");
    const std::size_t count = r == 0.0 ? 1 : hhm_rule_size(rays.get());
    for (std::size_t k = 0; k < count; ++k) {
      check(hhm_rule_node(rays.get(), k, xi.data(), nullptr));
      for (int i = 0; i < n; ++i) x[i] = r * xi[i];
      check(hhm_field_evaluate(field.get(), x.data(), u.data()));
      for (int i = 0; i < n; ++i) out += (i ? "," : "") + fmt17(x[i]);
      for (int j = 0; j < m; ++j) out += "," + fmt17(u[j]);
      out += "\n";
    }
  }
  write_output(output, out);
  return kExitPass;
}

// ------------------------------------------------------------------ means

std::string p_label(double p) { return std::isinf(p) ? "inf" : fmt17(p); }

int cmd_means(Context& ctx) {
  Config& c = ctx.config;
  const FieldSetup setup = read_field_setup(c);
  const std::vector<double> radii = c.numbers("radii", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  const std::vector<double> ps = c.numbers("ps", {1.0, 2.0, INFINITY});
  const int sphere_level = static_cast<int>(c.integer("sphere_level", setup.dim == 2 ? 10 : 6));
  const std::string output = c.text("output", "-");
  c.require_all_used();
  ctx.hash = c.hash(kUnhashed);
  for (double p : ps) {
    if (!(p > 0.0)) throw ConfigError("key 'ps': exponent " + fmt17(p) + " must be positive");
  }

  FieldPtr field = make_field(setup, ctx.seed);
  hhm_rule* sphere_raw = nullptr;
  check(hhm_rule_create(setup.dim, sphere_level, ctx.seed, &sphere_raw));
  RulePtr sphere(sphere_raw);
  std::string out = ctx.header() + "r";
  for (double p : ps) out += ",M" + p_label(p) + "_u";
  for (double p : ps) out += ",M" + p_label(p) + "_Du";
  out += "\n";
  for (double r : radii) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("key 'radii': radius " + fmt17(r) + " outside [0, 1)");
    out += fmt17(r);
    for (int d = 0; d < 2; ++d) {
      for (double p : ps) {
        double v = 0.0;
        check(hhm_integral_mean(field.get(), r, p, sphere.get(), d, &v));
        out += "," + fmt17(v);
      }
    }
    out += "\n";
  }
  write_output(output, out);
  return kExitPass;
}

// ------------------------------------------------------------------ bloch

int cmd_bloch(Context& ctx) {
  Config& c = ctx.config;
  const FieldSetup setup = read_field_setup(c);
  Json req = Json::object();
  req["functional"] = c.text("functional", "bloch");
  for (const char* key : {"p", "alpha", "beta", "a"}) {
    if (c.has(key)) {
      const double v = c.number(key, 0.0);
      req[key] = std::isinf(v) ? Json("inf") : Json(v);
    }
  }
  if (c.has("omega")) req["omega"] = c.text("omega", "id");
  Json grid = Json::object();
  if (c.has("grid.radii")) grid["radii"] = c.integer("grid.radii", 28);
  if (c.has("grid.cap")) grid["cap"] = c.number("grid.cap", 1.0);
  if (c.has("grid.sphere_level")) grid["sphere_level"] = c.integer("grid.sphere_level", 6);
  if (c.has("grid.polish")) grid["polish"] = c.boolean("grid.polish", true);
  grid["seed"] = ctx.seed;
  req["grid"] = grid;
  const std::string output = c.text("output", "-");
  const std::string report = c.text("report", "");
  c.require_all_used();
  ctx.hash = c.hash(kUnhashed);

  FieldPtr field = make_field(setup, ctx.seed);
  char* raw = nullptr;
  const hhm_status s = hhm_norm(field.get(), req.dump().c_str(), &raw);
  if (s == HHM_ERR_INVALID) throw ConfigError(hhm_last_error());
  check(s);
  const Json est = Json::parse(take_string(raw));
  std::string out = ctx.header() + "stage,radius,estimate\n";
  const auto& radii = est["radii"];
  const auto& history = est["history"];
  auto value = [](const Json& v) { return v.is_number() ? fmt17(v.get<double>()) : v.get<std::string>(); };
  for (std::size_t i = 0; i < history.size(); ++i) {
    const bool grid_row = i < radii.size();
    out += std::string(grid_row ? "grid," : "polish,") + (grid_row ? value(radii[i]) : "") + "," +
           value(history[i]) + "\n";
  }
  out += "final,," + value(est["value"]) + "\n";
  write_output(output, out);
  if (!report.empty()) {
    Json doc = {{"header", ctx.header_json()}, {"estimate", est}};
    write_output(report, doc.dump(1) + "\n");
  }
  return kExitPass;
}

// ----------------------------------------------------------------- metric

int cmd_metric(Context& ctx) {
  Config& c = ctx.config;
  const std::string kind = c.text("kind", "rho");
  if (!c.has("x") || !c.has("y")) throw ConfigError("keys 'x' and 'y' are required");
  const std::vector<double> x = c.numbers("x", {});
  const std::vector<double> y = c.numbers("y", {});
  const int resolution = static_cast<int>(c.integer("resolution", 256));
  const std::string output = c.text("output", "-");
  c.require_all_used();
  ctx.hash = c.hash(kUnhashed);
  if (x.size() != y.size()) throw ConfigError("keys 'x' and 'y': dimensions differ");

  const int n = static_cast<int>(x.size());
  std::string out = ctx.header() + "metric,value\n";
  auto fail_as_config = [](hhm_status s) {
    if (s == HHM_ERR_INVALID) throw ConfigError(hhm_last_error());
    check(s);
  };
  if (kind == "quasihyperbolic") {
    char* raw = nullptr;
    fail_as_config(hhm_quasihyperbolic_json(n, x.data(), y.data(), resolution, &raw));
    const Json e = Json::parse(take_string(raw));
    out += "quasihyperbolic_upper," + fmt17(e["upper"].get<double>()) + "\n";
    out += "quasihyperbolic_lower," + fmt17(e["lower"].get<double>()) + "\n";
    out += "quasihyperbolic_richardson," + fmt17(e["richardson"].get<double>()) + "\n";
  } else {
    double v = 0.0;
    fail_as_config(hhm_metric(kind.c_str(), n, x.data(), y.data(), resolution, &v));
    out += kind + "," + fmt17(v) + "\n";
  }
  write_output(output, out);
  return kExitPass;
}

// ----------------------------------------------------------------- verify

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Option values: JSON literals, booleans, numbers, comma lists of numbers,
// semicolon lists of strings, or plain strings.
Json option_value(const std::string& key, const std::string& v) {
  if (!v.empty() && (v[0] == '[' || v[0] == '{')) {
    try {
      return Json::parse(v);
    } catch (const Json::exception&) {
      throw ConfigError("key '" + key + "': malformed JSON value");
    }
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.find(';') != std::string::npos) return Json(split(v, ';'));
  if (v.find(',') != std::string::npos) {
    Json arr = Json::array();
    for (const std::string& item : split(v, ',')) {
      const double d = hhm_cli::parse_number(item, key);
      arr.push_back(std::isinf(d) ? Json(d > 0 ? "inf" : "-inf") : Json(d));
    }
    return arr;
  }
  try {
    const double d = hhm_cli::parse_number(v, key);
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    if (d == std::floor(d) && std::fabs(d) < 9e15 && v.find_first_of(".eE") == std::string::npos) {
      return static_cast<std::int64_t>(d);
    }
    return d;
  } catch (const ConfigError&) {
    return v;
  }
}

int cmd_verify(Context& ctx) {
  Config& c = ctx.config;
  const FieldSetup setup = read_field_setup(c);
  std::vector<std::string> checks;
  if (c.has("checks")) {
    checks = split(c.text("checks", ""), ',');
  } else {
    for (std::size_t i = 0; i < hhm_check_count(); ++i) checks.push_back(hhm_check_id(i));
  }
  for (const std::string& id : checks) {
    bool known = false;
    for (std::size_t i = 0; i < hhm_check_count(); ++i) known = known || id == hhm_check_id(i);
    if (!known) throw ConfigError("key 'checks': unknown check id '" + id + "'");
  }
  std::vector<std::string> fields = split(setup.spec, ';');
  if (fields.empty()) throw ConfigError("key 'field': empty");
  std::map<std::string, Json> options;
  for (const std::string& key : c.keys_with_prefix("options.")) {
    const std::vector<std::string> parts = split(key, '.');
    if (parts.size() < 3) throw ConfigError("key '" + key + "': expected options.<check>.<option>");
    bool known = false;
    for (const std::string& id : checks) known = known || parts[1] == id;
    if (!known) throw ConfigError("key '" + key + "': check '" + parts[1] + "' is not selected");
    Json* node = &options[parts[1]];
    for (std::size_t i = 2; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    (*node)[parts.back()] = option_value(key, c.text(key, ""));
  }
  const std::string output = c.text("output", "-");
  const std::string report_path = c.text("report", "");
  const std::string sidecar =
      c.text("sidecar", output.empty() || output == "-" ? std::string() : output + ".json");
  c.require_all_used();
  ctx.hash = c.hash(kUnhashed);

  std::string csv = ctx.header() + "check,field,dim,samples,worst_margin,verdict\n";
  std::string jsonl = Json{{"header", ctx.header_json()}}.dump() + "\n";
  Json all = Json::array();
  bool any_fail = false;
  for (const std::string& spec : fields) {
    for (const std::string& id : checks) {
      Json req = {{"dim", setup.dim},   {"field", spec},
                  {"level", setup.level}, {"seed", ctx.seed},
                  {"kernel_correction", setup.correction}, {"cache_dir", setup.cache_dir}};
      if (options.count(id)) req["options"] = options[id];
      hhm_report* raw = nullptr;
      const hhm_status s = hhm_verify_run(id.c_str(), req.dump().c_str(), &raw);
      if (s == HHM_ERR_INVALID) throw ConfigError(id + ": " + hhm_last_error());
      check(s);
      ReportPtr report(raw);
      const hhm_verdict v = hhm_report_verdict(report.get());
      any_fail = any_fail || v == HHM_FAIL;
      char* text = nullptr;
      check(hhm_report_json(report.get(), &text));
      const std::string record = take_string(text);
      jsonl += record + "\n";
      all.push_back(Json::parse(record));
      csv += csv_field(id) + "," + csv_field(spec) + "," + std::to_string(setup.dim) + "," +
             std::to_string(hhm_report_samples(report.get())) + "," + fmt17(hhm_report_margin(report.get())) + "," +
             (v == HHM_PASS ? "pass" : (v == HHM_FAIL ? "fail" : "skip")) + "\n";
    }
  }
  write_output(output, csv);
  if (!report_path.empty()) write_output(report_path, jsonl);
  if (!sidecar.empty()) {
    const Json doc = {{"header", ctx.header_json()}, {"reports", all}};
    write_output(sidecar, doc.dump(1) + "\n");
  }
  return any_fail ? kExitFail : kExitPass;
}

// ---------------------------------------------------------------- rulegen

int cmd_rulegen(Context& ctx) {
  Config& c = ctx.config;
  const int dim = static_cast<int>(c.integer("dim", 2));
  if (dim < 2 || dim > 16) throw ConfigError("key 'dim': must lie in [2, 16]");
  const int level = static_cast<int>(c.integer("level", default_level(dim)));
  const char* env = std::getenv("HHM_CACHE_DIR");
  const std::string cache_dir = c.text("cache_dir", env ? env : "");
  const std::string output = c.text("output", "");
  c.require_all_used();
  ctx.hash = c.hash(kUnhashed);
  if (output.empty() && cache_dir.empty()) throw ConfigError("key 'output': rulegen needs an output path or cache_dir");
  if (output == "-") throw ConfigError("key 'output': rulegen writes a file, not stdout");
  hhm_rule* raw = nullptr;
  const hhm_status s = hhm_rule_cached(dim, level, ctx.seed, cache_dir.c_str(), &raw);
  if (s == HHM_ERR_INVALID) throw ConfigError(hhm_last_error());
  check(s);
  RulePtr rule(raw);
  if (!output.empty()) check(hhm_rule_save(rule.get(), output.c_str()));
  return kExitPass;
}

struct Subcommand {
  const char* name;
  const char* help;
  int (*run)(Context&);
  std::vector<std::pair<std::string, std::string>> flags;  // flag, config key
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::string>> common{
      {"--dim", "dim"},       {"--field", "field"},         {"--level", "level"},
      {"--seed", "seed"},     {"--threads", "threads"},     {"--output,-o", "output"},
      {"--cache-dir", "cache_dir"}, {"--kernel-correction", "kernel_correction"}};
  const std::vector<Subcommand> subs{
      {"solve", "Tabulate the field on rays through the origin", cmd_solve, {{"--radii", "radii"}, {"--ray-level", "ray_level"}}},
      {"means", "Tabulate M_p(r, u) and M_p(r, ||Du||)", cmd_means,
       {{"--radii", "radii"}, {"--ps", "ps"}, {"--sphere-level", "sphere_level"}}},
      {"bloch", "Estimate Bloch, generalized Bloch or Hardy norms", cmd_bloch,
       {{"--functional", "functional"}, {"--p", "p"}, {"--alpha", "alpha"}, {"--beta", "beta"}, {"--a", "a"},
        {"--omega", "omega"}, {"--report", "report"}}},
      {"metric", "Distances between two points of the ball", cmd_metric,
       {{"--kind", "kind"}, {"--x", "x"}, {"--y", "y"}, {"--resolution", "resolution"}}},
      {"verify", "Run verification checks", cmd_verify,
       {{"--checks", "checks"}, {"--report", "report"}, {"--sidecar", "sidecar"}}},
      {"rulegen", "Generate a sphere quadrature rule file", cmd_rulegen, {}},
  };

  CLI::App app{"Hyperbolic harmonic mappings: fields, norms, metrics and checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hhm_version()));
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;
  std::vector<std::pair<CLI::Option*, std::string>> flag_options;
  std::map<CLI::App*, const Subcommand*> by_app;
  for (const Subcommand& sub : subs) {
    CLI::App* s = app.add_subcommand(sub.name, sub.help);
    s->add_option("--config,-c", config_path, "key = value config file");
    s->add_option("--set", sets, "key=value override (repeatable)");
    auto add = [&](const std::pair<std::string, std::string>& f) {
      CLI::Option* o = s->add_option(f.first, flag_values[sub.name + std::string(":") + f.second],
                                     "config key '" + f.second + "'");
      flag_options.emplace_back(o, f.second);
    };
    for (const auto& f : common) add(f);
    for (const auto& f : sub.flags) add(f);
    by_app[s] = &sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Subcommand& sub = *by_app[chosen];
  Context ctx;
  try {
    ctx.config = config_path.empty() ? Config() : Config::load(config_path);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set '" + kv + "': expected key=value");
      ctx.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [opt, key] : flag_options) {
      if (opt->count() > 0) {
        ctx.config.set(key, flag_values[std::string(sub.name) + ":" + key]);
      }
    }
    ctx.seed = ctx.config.unsigned_integer("seed", 0);
    const std::int64_t threads = ctx.config.integer("threads", 0);
    if (threads < 0) throw ConfigError("key 'threads': must be >= 0");
    hhm_set_threads(static_cast<int>(threads));
    return sub.run(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "hhm " << sub.name << ": config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ApiError& e) {
    std::cerr << "hhm " << sub.name << ": " << e.what() << "\n";
    return e.status == HHM_ERR_INVALID ? kExitConfig : kExitGuard;
  } catch (const std::exception& e) {
    std::cerr << "hhm " << sub.name << ": " << e.what() << "\n";
    return kExitGuard;
  }
}
