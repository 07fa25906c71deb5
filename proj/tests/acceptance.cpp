// Acceptance run: one PASS/FAIL line per criterion with its runtime.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hhm/analysis.hpp"
#include "hhm/boundary.hpp"
#include "hhm/field.hpp"
#include "hhm/geometry.hpp"
#include "hhm/quadrature.hpp"
#include "hhm/verify.hpp"
#include "oracles.hpp"

using namespace hhm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Names the failing asserted parts of a report.
std::string failures(const CheckReport& r) {
  std::string s;
  for (const auto& p : r.parts) {
    if (!p.pass()) s += (s.empty() ? "" : ",") + p.name + " margin " + fmt("%.3g", p.margin);
  }
  return s;
}

CheckReport run(const std::string& check, int n, const std::string& field, Json options = Json::object()) {
  Json request = {{"dim", n}, {"field", field}, {"seed", 1}};
  if (!options.empty()) request["options"] = std::move(options);
  return run_check(check, request);
}

// Runs the check over fields and requires no failing verdicts.
void census(Outcome& out, const std::string& check, int n, const std::vector<std::string>& fields,
            const Json& options = Json::object()) {
  int passed = 0, skipped = 0;
  for (const auto& f : fields) {
    const CheckReport r = run(check, n, f, options);
    if (r.skipped()) {
      ++skipped;
    } else if (r.pass()) {
      ++passed;
    }
    out.require(r.verdict() != "fail", "n=" + std::to_string(n) + " " + f + ": " + failures(r));
  }
  out.note("n=" + std::to_string(n) + " " + std::to_string(passed) + " pass " + std::to_string(skipped) + " skip");
}

// Report numbers are JSON numbers, or strings for non-finite values.
double number(const Json& details, const char* key) {
  if (!details.contains(key)) return kNaN;
  const Json& v = details.at(key);
  if (v.is_number()) return v.get<double>();
  const std::string s = v.is_string() ? v.get<std::string>() : "nan";
  return s == "inf" ? kInfinity : s == "-inf" ? -kInfinity : kNaN;
}

// Least-squares slope of log v against log h.
double log_log_slope(const std::vector<double>& h, const std::vector<double>& v) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Vec random_point(std::mt19937_64& g, int n, double rmax) { return oracle::random_point(g, n, rmax); }

Outcome criterion_kernel_normalisation() {
  Outcome out;
  std::mt19937_64 g(101);
  for (auto [n, level] : {std::pair{2, 9}, {3, 8}}) {
    const SphereRule rule = sphere_rule(n, level);
    double worst = 0;
    for (int i = 0; i < 50; ++i) worst = std::max(worst, std::fabs(kernel_mass(rule, random_point(g, n, 0.9)) - 1));
    out.require(worst <= 1e-8, "n=" + std::to_string(n) + " deviation " + fmt("%.3g", worst));
    out.note("n=" + std::to_string(n) + " max dev " + fmt("%.2g", worst));
  }
  const SphereRule mc = sphere_rule(4, 10, 7);
  double worst_sigmas = 0;
  for (int i = 0; i < 50; ++i) {
    const Vec x = random_point(g, 4, 0.9);
    const auto m = integrate_sphere_with_error(mc, [&](std::span<const double> xi) { return poisson_kernel(x, xi); });
    worst_sigmas = std::max(worst_sigmas, std::fabs(m.value - 1) / m.error);
  }
  out.require(worst_sigmas <= 3, "n=4 deviation " + fmt("%.3g", worst_sigmas) + " sigma");
  out.note("n=4 max " + fmt("%.2f", worst_sigmas) + " sigma");
  return out;
}

std::vector<Vec> ball_grid(int n, double radius, double spacing) {
  std::vector<Vec> pts;
  const int m = static_cast<int>(std::floor(radius / spacing));
  std::vector<int> idx(static_cast<std::size_t>(n), -m);
  while (true) {
    Vec x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[i] = idx[i] * spacing;
    if (norm(x) <= radius) pts.push_back(x);
    int k = 0;
    while (k < n && ++idx[k] > m) idx[k++] = -m;
    if (k == n) break;
  }
  return pts;
}

Outcome criterion_pde_residual() {
  Outcome out;
  const std::vector<double> steps{0.04, 0.02, 0.01};
  double worst_order = kInfinity, worst_abs = 0;
  int exact = 0;
  for (int n : {2, 3}) {
    const auto grid = ball_grid(n, 0.7, n == 2 ? 0.175 : 0.35);
    for (const auto& spec : registry_boundary_specs(n)) {
      const auto u = solve_dirichlet(BoundaryMap::parse(spec, n), sphere_rule(n, default_field_level(n)));
      const double scale = u->scale();
      std::vector<double> res;
      for (double h : steps) {
        double r = 0;
        for (const auto& x : grid) r = std::max(r, norm(hyperbolic_laplacian(*u, x, h)));
        res.push_back(r);
      }
      double at_fine = 0;
      for (const auto& x : grid) at_fine = std::max(at_fine, norm(hyperbolic_laplacian(*u, x, 1e-3)));
      worst_abs = std::max(worst_abs, at_fine / scale);
      out.require(at_fine <= 1e-4 * scale, spec + " residual " + fmt("%.3g", at_fine));
      // Fields whose data make the difference quotient exact have nothing to fit.
      if (res.front() <= 1e-9 * scale) {
        ++exact;
        continue;
      }
      const double order = log_log_slope(steps, res);
      worst_order = std::min(worst_order, order);
      out.require(order >= 1.8, "n=" + std::to_string(n) + " " + spec + " order " + fmt("%.3f", order));
    }
  }
  out.note("min order " + fmt("%.3f", worst_order) + ", max residual/scale at h=1e-3 " + fmt("%.2g", worst_abs) +
           ", " + std::to_string(exact) + " fields exact to rounding");
  return out;
}

Outcome criterion_planar_oracle() {
  Outcome out;
  double worst = 0;
  for (int k = 1; k <= 8; ++k) {
    for (const char* comp : {"cos", "sin"}) {
      const Field u(BoundaryMap::parse("trig:k=" + std::to_string(k) + ":component=" + comp, 2), sphere_rule(2, 9));
      for (double r : {0.1, 0.3, 0.5, 0.7, 0.8, 0.9}) {
        for (int a = 0; a < 24; ++a) {
          const double t = 0.13 + a * std::numbers::pi / 12;
          const double exact = std::pow(r, k) * (comp[0] == 'c' ? std::cos(k * t) : std::sin(k * t));
          worst = std::max(worst, std::fabs(u.value(Vec{r * std::cos(t), r * std::sin(t)})[0] - exact));
        }
      }
    }
  }
  out.require(worst <= 1e-10, "max error " + fmt("%.3g", worst));
  out.note("max error " + fmt("%.2g", worst));
  return out;
}

Outcome criterion_geometry() {
  Outcome out;
  for (int n : {2, 3}) {
    std::size_t samples = 0;
    for (const auto& p : geometry_identity_parts(n, 10000, 11 + n)) {
      samples += p.samples;
      out.require(p.pass(), "n=" + std::to_string(n) + " " + p.name + " margin " + fmt("%.3g", p.margin));
    }
    out.note("n=" + std::to_string(n) + " " + std::to_string(samples) + " evaluations");
  }
  return out;
}

Outcome criterion_measure() {
  Outcome out;
  std::mt19937_64 g(55);
  for (int n : {2, 3}) {
    const double exact = oracle::simpson(
        [n](double t) { return n * std::pow(t, n - 1) * std::pow(1 - t * t, -n); }, 0.0, 1.0 / 9);
    const BallRule rule = ball_rule(n, 12, n == 2 ? 6 : 4);
    double worst = 0, largest = 0;
    for (int i = 0; i < 10; ++i) {
      const Vec w = random_point(g, n, 0.9);
      const double tau =
          integrate_ball(rule, pseudo_ball(w, 1.0 / 9), [](std::span<const double>) { return 1.0; }, Measure::Invariant);
      worst = std::max(worst, std::fabs(tau - exact) / exact);
      largest = std::max(largest, tau);
    }
    out.require(worst <= 1e-8, "n=" + std::to_string(n) + " relative error " + fmt("%.3g", worst));
    out.require(largest <= std::pow(9.0 / 80.0, n), "n=" + std::to_string(n) + " exceeds (9/80)^n");
    out.note("n=" + std::to_string(n) + " rel err " + fmt("%.2g", worst) + ", tau " + fmt("%.6g", largest) +
             " <= " + fmt("%.6g", std::pow(9.0 / 80.0, n)));
  }
  return out;
}

Outcome criterion_bloch_lipschitz() {
  Outcome out;
  for (int n : {2, 3}) census(out, "bloch_lipschitz", n, registry_boundary_specs(n));
  return out;
}

Outcome criterion_oscillation() {
  Outcome out;
  for (int n : {2, 3}) census(out, "oscillation", n, registry_boundary_specs(n));
  return out;
}

Outcome criterion_integral_mean() {
  Outcome out;
  // alpha = 1, beta = 0, omega = id: the weight integral is -log(1 - r).
  BlochParams witness;
  witness.omega = Majorant::parse("id");
  double worst = 0;
  for (int k = 1; k <= 20; ++k) {
    const double r = 0.99 * k / 20;
    worst = std::max(worst, std::fabs(inverse_phi_integral(witness, r) + std::log1p(-r)) / -std::log1p(-r));
  }
  out.require(worst <= 1e-12, "witness integral error " + fmt("%.3g", worst));
  out.note("witness rel err " + fmt("%.2g", worst));
  census(out, "integral_mean", 2, registry_boundary_specs(2));
  census(out, "integral_mean", 3, {"identity", "bump:width=0.8:gamma=1"});
  return out;
}

Outcome criterion_derivative_growth() {
  Outcome out;
  for (const char* spec : {"lacunary:alpha=0.5", "lacunary:alpha=1"}) {
    const CheckReport r = run("derivative_growth", 2, spec);
    out.require(r.pass(), std::string(spec) + ": " + failures(r) + r.skip_reason);
    std::string slopes;
    for (const auto& p : r.parts) {
      if (p.name.rfind("q=", 0) == 0) {
        slopes += (slopes.empty() ? "" : ",") + p.name + ":" + fmt("%.3f", number(p.details, "slope")) + "<=" +
                  fmt("%.3f", number(p.details, "bound"));
      }
    }
    out.note(std::string(spec) + " " + slopes);
  }
  return out;
}

Outcome criterion_wub() {
  Outcome out;
  for (const char* spec : {"identity", "identity:scale=0.5"}) {
    const CheckReport r = run("wub_quasihyperbolic", 2, spec);
    bool has_expected = false;
    for (const auto& p : r.parts) has_expected |= p.name == "expected_ratio";
    out.require(r.pass() && has_expected, std::string(spec) + ": " + failures(r));
  }
  for (const char* spec : {"perturb:eps=0.1", "perturb:eps=0.2"}) {
    const CheckReport r = run("wub_quasihyperbolic", 2, spec);
    out.require(r.pass(), std::string(spec) + ": " + failures(r) + r.skip_reason);
    for (const auto& p : r.parts) {
      if (p.name == "mu3_refinement") {
        out.note(std::string(spec) + " mu3 " + fmt("%.4f", number(p.details, "mu3")) + " drift " +
                 fmt("%.2g", number(p.details, "drift")) + " formula " +
                 fmt("%.4g", number(p.details, "formula_with_volume")) + " (without |B^n| " +
                 fmt("%.4g", number(p.details, "formula_without_volume")) + ")");
      }
    }
  }
  return out;
}

Outcome criterion_submean() {
  Outcome out;
  for (auto [n, spec] : {std::pair<int, const char*>{2, "perturb:eps=0.2"}, {3, "product:i=1:j=3"}}) {
    const CheckReport r = run("submeanvalue", n, spec);
    out.require(r.pass(), "n=" + std::to_string(n) + " " + spec + ": " + failures(r) + r.skip_reason);
    double worst_drift = 0;
    for (const auto& p : r.parts) {
      if (p.name.rfind("mu0", 0) == 0) worst_drift = std::max(worst_drift, number(p.details, "drift"));
    }
    out.note("n=" + std::to_string(n) + " " + spec + " max drift " + fmt("%.3g", worst_drift));
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion_determinism() {
  Outcome out;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "hhm_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "schema = 1\ndim = 2\nfield = perturb:eps=0.2;identity\nseed = 3\n"
           "checks = bloch_lipschitz,integral_mean,oscillation\n"
           "options.bloch_lipschitz.pairs = 2000\noptions.oscillation.samples = 40\n";
  }
  std::vector<std::string> outputs;
  int run_index = 0;
  for (int threads : {1, 1, 2, 4}) {
    const fs::path base = dir / ("run" + std::to_string(run_index++));
    const std::string cmd = std::string("\"") + HHM_CLI_PATH + "\" verify --config \"" + (dir / "run.cfg").string() +
                            "\" --threads " + std::to_string(threads) + " --output \"" + base.string() +
                            ".csv\" --report \"" + base.string() + ".jsonl\" > \"" + base.string() + ".log\" 2>&1";
    const int code = std::system(cmd.c_str());
    out.require(code == 0, "exit status " + std::to_string(code) + " with " + std::to_string(threads) + " threads");
    outputs.push_back(slurp(base.string() + ".csv") + slurp(base.string() + ".jsonl") +
                      slurp(base.string() + ".csv.json") + slurp(base.string() + ".log"));
  }
  for (std::size_t i = 1; i < outputs.size(); ++i) {
    out.require(outputs[i] == outputs[0], "run " + std::to_string(i) + " differs from run 0");
  }
  out.require(outputs[0].size() > 100, "empty output");
  out.note("4 runs (threads 1,1,2,4), " + std::to_string(outputs[0].size()) + " bytes each");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"kernel normalisation", 10, criterion_kernel_normalisation},
      {"PDE residual order", 60, criterion_pde_residual},
      {"planar trigonometric oracle", 5, criterion_planar_oracle},
      {"geometry identities", 10, criterion_geometry},
      {"invariant measure of E(w,1/9)", 30, criterion_measure},
      {"Bloch-Lipschitz bound", 120, criterion_bloch_lipschitz},
      {"mean oscillation bound", 120, criterion_oscillation},
      {"integral mean bound", 60, criterion_integral_mean},
      {"derivative growth slope", 120, criterion_derivative_growth},
      {"quasihyperbolic ratio", 180, criterion_wub},
      {"sub-mean-value constants", 120, criterion_submean},
      {"CLI determinism", 0, criterion_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit > 0 && secs > c.limit) o.require(false, "runtime over " + fmt("%g", c.limit) + " s");
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %-30s %7.2f s%s  %s\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, secs,
                c.limit > 0 ? (" (limit " + fmt("%g", c.limit) + " s)").c_str() : "", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
