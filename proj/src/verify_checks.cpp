#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "hhm/errors.hpp"
#include "hhm/parallel.hpp"
#include "hhm/sampling.hpp"
#include "verify_internal.hpp"

namespace hhm {

using detail::num;

namespace {

double grid_cap(const Mapping& u, const GridSpec& grid) {
  return std::min({grid.cap, u.guard_radius(), 1.0 - 1e-6});
}

GridSpec with_level(GridSpec grid, int n) {
  if (grid.sphere_level <= 0) grid.sphere_level = detail::grid_level_for(n);
  return grid;
}

Json grid_json(const GridSpec& g) {
  return Json{{"radii", g.radii}, {"cap", num(g.cap)}, {"sphere_level", g.sphere_level},
              {"seed", g.seed}, {"polish", g.polish}};
}

Json estimate_json(const NormEstimate& e) {
  return Json{{"functional", e.functional}, {"params", e.params},  {"value", num(e.value)},
              {"origin_part", num(e.origin_part)}, {"seminorm_part", num(e.seminorm_part)},
              {"history", detail::nums(e.history)}, {"argmax", detail::point_json(e.argmax)}};
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// True if the last few grid radii still raise the estimate noticeably: the
// supremum is not settling inside the guard.
bool diverging(const NormEstimate& e) {
  const std::size_t grid_points = e.radii.size();
  if (grid_points < 6) return false;
  const double before = e.history[grid_points - 5];
  const double last = e.history[grid_points - 1];
  return before > 0.0 && last > 1.25 * before;
}

}  // namespace

// ---------------------------------------------------------------- oscillation

CheckReport check_oscillation(const Mapping& u, const OscillationOptions& opts) {
  const int n = u.dim();
  CheckReport report;
  report.check_id = "oscillation";
  report.field_id = u.id();
  report.dim = n;
  report.seed = opts.seed;
  const GridSpec grid = with_level(opts.grid, n);
  const double guard = grid_cap(u, grid);
  const int angular = detail::angular_level_for(n, opts.angular_level);
  report.params = {{"alphas", detail::nums(opts.alphas)}, {"majorants", opts.majorants},
                   {"samples", opts.samples},             {"radial_points", opts.radial_points},
                   {"angular_level", angular},            {"grid", grid_json(grid)},
                   {"tolerance", num(opts.tolerance)}};
  for (double a : opts.alphas) {
    if (!(a >= 1.0 && a < 2.0)) throw_invalid("oscillation check needs alpha in [1, 2)");
  }
  if (opts.samples < 4) throw_invalid("oscillation check needs at least 4 samples");

  // (x, r) census with r < guard - |x| <= 1 - |x|.
  const std::vector<Vec> centres = detail::census_points(n, opts.samples - 3, 0.99 * guard, guard, opts.seed);
  std::vector<double> radii(centres.size());
  for (std::size_t i = 0; i < centres.size(); ++i) {
    const double room = guard - norm(centres[i]);
    radii[i] = room * (0.05 + 0.95 * detail::unit_uniform(opts.seed, i));
  }
  const BallRule rule = ball_rule(n, opts.radial_points, angular, opts.seed);
  std::vector<double> lhs(centres.size());
  parallel_for(centres.size(), [&](std::size_t i) {
    const Vec ux = u.value(centres[i]);
    const BallNodes nodes = ball_nodes(rule, EuclideanBall{centres[i], radii[i]}, Measure::Volume);
    std::vector<double> diff(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) diff[k] = distance(u.value(nodes.point(k)), ux);
    lhs[i] = detail::weighted_sum(nodes.weights, [&](std::size_t k) { return diff[k]; }) /
             std::pow(radii[i], n);
  });

  for (double alpha : opts.alphas) {
    for (const std::string& mspec : opts.majorants) {
      BlochParams params;
      params.p = kInfinity;
      params.alpha = alpha;
      params.beta = 0.0;
      params.a = 2.0;
      params.omega = Majorant::parse(mspec);
      const NormEstimate norm_est = generalized_bloch_norm(u, params, grid);
      CheckPart part;
      part.name = "alpha=" + fmt("%g", alpha) + ",omega=" + mspec;
      part.tolerance = opts.tolerance;
      const double c = n * norm_est.value / (2.0 - alpha);
      std::size_t worst = 0;
      for (std::size_t i = 0; i < centres.size(); ++i) {
        const double r = radii[i];
        const double rhs = c * r / params.omega(std::pow(r, alpha));
        const double before = part.margin;
        part.record(lhs[i], rhs);
        if (part.margin < before) worst = i;
      }
      part.details = {{"norm", estimate_json(norm_est)},
                      {"constant", num(c)},
                      {"worst_x", detail::point_json(centres[worst])},
                      {"worst_r", num(radii[worst])},
                      {"worst_lhs", num(lhs[worst])}};
      if (diverging(norm_est)) {
        part.informational = true;
        part.details["verdict"] = "not_in_space";
      }
      report.parts.push_back(std::move(part));
    }
  }
  report.census = {{"pairs", centres.size()}, {"max_lhs", num(*std::max_element(lhs.begin(), lhs.end()))}};
  return report;
}

// ------------------------------------------------------------ bloch lipschitz

CheckReport check_bloch_lipschitz(const Mapping& u, const BlochLipschitzOptions& opts) {
  const int n = u.dim();
  CheckReport report;
  report.check_id = "bloch_lipschitz";
  report.field_id = u.id();
  report.dim = n;
  report.seed = opts.seed;
  const GridSpec grid = with_level(opts.grid, n);
  const double guard = grid_cap(u, grid);
  const double r_edge = 0.99 * guard;
  report.params = {{"pairs", opts.pairs},
                   {"boundary_pairs", opts.boundary_pairs},
                   {"origin_points", opts.origin_points},
                   {"grid", grid_json(grid)},
                   {"rel_tolerance", num(opts.rel_tolerance)}};

  const NormEstimate est = bloch_seminorm(u, grid);
  const double semi = est.value;
  const double full = est.origin_part + semi;

  // Pair census: random pairs, near pairs y in E(x, 0.2), and pairs with
  // |x| = 0.99 guard.
  std::vector<std::pair<Vec, Vec>> pairs;
  const std::size_t boundary = std::min(opts.boundary_pairs, opts.pairs);
  const std::size_t near = (opts.pairs - boundary) / 10;
  const std::size_t random = opts.pairs - boundary - near;
  pairs = sample_ball_pairs(n, random, r_edge, opts.seed);
  {
    const auto xs = sample_ball_points(n, near, r_edge, opts.seed + 101);
    const auto zs = sample_ball_points(n, near, 0.2, opts.seed + 102);
    for (std::size_t i = 0; i < near; ++i) {
      Vec y = moebius_phi(xs[i], zs[i]);
      if (norm(y) > r_edge) y = scaled(y, r_edge / norm(y));
      pairs.emplace_back(xs[i], std::move(y));
    }
    const auto dirs = sample_ball_points(n, boundary, 1.0, opts.seed + 103);
    const auto ys = sample_ball_points(n, boundary, r_edge, opts.seed + 104);
    for (std::size_t i = 0; i < boundary; ++i) {
      const double len = norm(dirs[i]);
      Vec x = len > 0.0 ? scaled(dirs[i], r_edge / len) : Vec(static_cast<std::size_t>(n), 0.0);
      if (len == 0.0) x[0] = r_edge;
      pairs.emplace_back(std::move(x), ys[i]);
    }
  }
  std::vector<double> lhs(pairs.size()), rho(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    lhs[i] = distance(u.value(pairs[i].first), u.value(pairs[i].second));
    rho[i] = hyperbolic_distance(pairs[i].first, pairs[i].second);
  });
  CheckPart main;
  main.name = "lipschitz_rho";
  main.kind = MarginKind::Relative;
  main.tolerance = opts.rel_tolerance;
  const double c = std::sqrt(static_cast<double>(n)) / 2.0 * full;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (rho[i] == 0.0) {
      main.record_margin(lhs[i] == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity());
      continue;
    }
    main.record(lhs[i], c * rho[i]);
    worst_ratio = std::max(worst_ratio, lhs[i] / rho[i]);
  }
  main.details = {{"norm", estimate_json(est)},
                  {"constant", num(c)},
                  {"empirical_lipschitz", num(worst_ratio)},
                  {"edge_radius", num(r_edge)}};
  report.parts.push_back(std::move(main));

  // Special case y = 0 with the seminorm.
  const std::vector<Vec> zs = detail::census_points(n, opts.origin_points, r_edge, guard, opts.seed + 105);
  const Vec u0 = u.value(Vec(static_cast<std::size_t>(n), 0.0));
  std::vector<double> lz(zs.size());
  parallel_for(zs.size(), [&](std::size_t i) { lz[i] = distance(u.value(zs[i]), u0); });
  CheckPart origin;
  origin.name = "origin_special_case";
  origin.kind = MarginKind::Relative;
  origin.tolerance = opts.rel_tolerance;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double r = norm(zs[i]);
    if (r == 0.0) continue;
    origin.record(lz[i], semi / 2.0 * std::log((1.0 + r) / (1.0 - r)));
  }
  origin.details = {{"seminorm", num(semi)}};
  report.parts.push_back(std::move(origin));
  report.census = {{"pairs", pairs.size()}, {"near_pairs", near}, {"boundary_pairs", boundary},
                   {"origin_points", zs.size()}};
  return report;
}

// -------------------------------------------------------------- integral mean

std::vector<BlochParams> default_integral_mean_params() {
  std::vector<BlochParams> out(3);
  out[0].alpha = 1.0;
  out[0].beta = 0.0;
  out[0].a = 2.0;
  out[0].omega = Majorant::parse("id");
  out[1].alpha = 1.5;
  out[1].beta = 0.5;
  out[1].a = 2.0;
  out[1].omega = Majorant::parse("power:gamma=0.5");
  out[2].alpha = 0.5;
  out[2].beta = -1.0;
  out[2].a = 2.0;
  out[2].omega = Majorant::parse("log");
  return out;
}

double inverse_phi_integral(const BlochParams& params, double r) {
  params.validate();
  if (!(r >= 0.0 && r < 1.0)) throw_invalid("inverse_phi_integral: radius must lie in [0, 1)");
  if (r == 0.0) return 0.0;
  // s = 1 - e^-v: ds / phi(s) = e^{(alpha-1) v} (log a + v)^{-beta} dv
  const double top = -std::log1p(-r);
  const double la = std::log(params.a);
  std::vector<double> t, w;
  gauss_legendre(8, t, w);
  const int panels = 32;
  const double hpanel = top / panels;
  Vec terms(static_cast<std::size_t>(panels) * t.size());
  for (int p = 0; p < panels; ++p) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double v = hpanel * (p + 0.5 * (t[k] + 1.0));
      terms[static_cast<std::size_t>(p) * t.size() + k] =
          0.5 * hpanel * w[k] * std::exp((params.alpha - 1.0) * v) * std::pow(la + v, -params.beta);
    }
  }
  return tree_sum(terms.size(), 1, [&](std::size_t i, double* out) { out[0] = terms[i]; })[0];
}

CheckReport check_integral_mean(const Mapping& u, const IntegralMeanOptions& opts) {
  const int n = u.dim();
  CheckReport report;
  report.check_id = "integral_mean";
  report.field_id = u.id();
  report.dim = n;
  report.seed = opts.seed;
  const GridSpec grid = with_level(opts.grid, n);
  const double cap = grid_cap(u, grid);
  const std::vector<BlochParams> sets = opts.params.empty() ? default_integral_mean_params() : opts.params;
  Json sets_json = Json::array();
  for (const auto& s : sets) sets_json.push_back(s.describe());
  report.params = {{"param_sets", sets_json}, {"ps", detail::nums(opts.ps)}, {"radii", opts.radii},
                   {"grid", grid_json(grid)}, {"rel_tolerance", num(opts.rel_tolerance)}};
  if (opts.radii < 1) throw_invalid("integral mean check needs at least one radius");
  std::vector<double> radii;
  for (int k = 1; k <= opts.radii; ++k) radii.push_back(cap * k / opts.radii);
  const SphereRule sphere = grid_sphere(n, grid);
  const double u0 = norm(u.value(Vec(static_cast<std::size_t>(n), 0.0)));

  for (double p : opts.ps) {
    if (!(p >= 1.0)) throw_invalid("integral mean check needs p in [1, infinity]");
    std::vector<double> lhs(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) lhs[i] = integral_mean(u, radii[i], p, sphere);
    for (BlochParams params : sets) {
      params.p = p;
      params.validate();
      const NormEstimate est = generalized_bloch_norm(u, params, grid);
      const double lb = std::pow(std::log(params.a), params.beta);
      const double c = lb * est.value / params.omega(lb);
      CheckPart part;
      part.name = params.describe();
      part.kind = MarginKind::Relative;
      part.tolerance = opts.rel_tolerance;
      Json rows = Json::array();
      for (std::size_t i = 0; i < radii.size(); ++i) {
        const double rhs = u0 + c * inverse_phi_integral(params, radii[i]);
        part.record(lhs[i], rhs);
        rows.push_back(Json::array({num(radii[i]), num(lhs[i]), num(rhs)}));
      }
      part.details = {{"norm", estimate_json(est)}, {"constant", num(c)}, {"rows", rows}};
      report.parts.push_back(std::move(part));

      // The derivative bound behind it, at the grid radii.
      CheckPart lemma;
      lemma.name = "derivative_bound:" + params.describe();
      lemma.kind = MarginKind::Relative;
      lemma.tolerance = opts.rel_tolerance;
      for (double r : est.radii) {
        lemma.record(derivative_mean(u, r, p, sphere), c / phi_weight(params, r));
      }
      report.parts.push_back(std::move(lemma));
    }
  }
  report.census = {{"radii", detail::nums(radii)}, {"u0", num(u0)}};
  return report;
}

// ---------------------------------------------------------- derivative growth

SlopeFit fit_log_slope(const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() != values.size() || radii.size() < 3) throw_invalid("slope fit needs >= 3 points");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) throw_numeric("slope fit: non-positive value");
    xs.push_back(-std::log1p(-radii[i]));
    ys.push_back(std::log(values[i]));
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw_numeric("slope fit: degenerate radii");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

CheckReport check_derivative_growth(const Mapping& u, const DerivativeGrowthOptions& opts) {
  const int n = u.dim();
  CheckReport report;
  report.check_id = "derivative_growth";
  report.field_id = u.id();
  report.dim = n;
  report.seed = opts.seed;
  const double r_max = std::min(opts.r_max, u.guard_radius());
  report.params = {{"p", num(opts.p)},           {"alpha", num(opts.alpha)},
                   {"qs", detail::nums(opts.qs)}, {"r_min", num(opts.r_min)},
                   {"r_max", num(r_max)},         {"points", opts.points},
                   {"sphere_level", opts.sphere_level}, {"slack", num(opts.slack)},
                   {"q_spread", num(opts.q_spread)}, {"assert_q_spread", opts.assert_q_spread}};
  if (!(opts.p > 0.0) || std::isinf(opts.p)) throw_invalid("derivative growth needs finite p > 0");
  if (opts.points < 3 || !(opts.r_min >= 0.0 && opts.r_min < r_max)) {
    throw_invalid("derivative growth needs >= 3 points and r_min < r_max");
  }
  const double t0 = -std::log1p(-opts.r_min), t1 = -std::log1p(-r_max);
  std::vector<double> radii;
  for (int k = 0; k < opts.points; ++k) {
    radii.push_back(-std::expm1(-(t0 + (t1 - t0) * k / (opts.points - 1))));
  }
  const int level = opts.sphere_level > 0 ? opts.sphere_level : (n == 2 ? 14 : (n == 3 ? 8 : 10));
  const SphereRule sphere = sphere_rule(n, level, opts.seed);
  report.params["sphere_level"] = level;

  std::vector<double> mp;
  std::vector<Vec> dnorms;
  for (double r : radii) {
    mp.push_back(integral_mean(u, r, opts.p, sphere));
    dnorms.push_back(sphere_samples(sphere, r, [&](VecView x) { return operator_norm(jacobian(u, x)); }));
  }
  const SlopeFit growth = fit_log_slope(radii, mp);
  const double alpha = std::isnan(opts.alpha) ? growth.slope : opts.alpha;
  report.census = {{"radii", detail::nums(radii)},
                   {"mp", detail::nums(mp)},
                   {"growth_fit", {{"slope", num(growth.slope)}, {"residual", num(growth.residual)}}},
                   {"alpha", num(alpha)}};
  if (!(alpha > 1.0 / opts.p)) {
    report.skip_reason = "growth exponent " + fmt("%.4g", alpha) + " of M_p(r,u) does not exceed 1/p";
    return report;
  }
  const double bound = alpha + 1.0 + (n - 1.0) / opts.p;
  double lo = kInfinity, hi = -kInfinity;
  Json slopes = Json::array();
  for (double q : opts.qs) {
    std::vector<double> mq;
    for (const Vec& d : dnorms) mq.push_back(power_mean(sphere, d, q));
    const SlopeFit fit = fit_log_slope(radii, mq);
    CheckPart part;
    part.name = "q=" + fmt("%g", q);
    part.record(fit.slope, bound + opts.slack);
    part.details = {{"slope", num(fit.slope)}, {"residual", num(fit.residual)}, {"bound", num(bound)},
                    {"values", detail::nums(mq)}};
    report.parts.push_back(std::move(part));
    lo = std::min(lo, fit.slope);
    hi = std::max(hi, fit.slope);
    slopes.push_back(num(fit.slope));
  }
  CheckPart spread;
  spread.name = "q_spread";
  spread.informational = !opts.assert_q_spread;
  spread.record(hi - lo, opts.q_spread);
  spread.details = {{"slopes", slopes}, {"spread", num(hi - lo)}};
  report.parts.push_back(std::move(spread));
  return report;
}

// ------------------------------------------------------------- submean value

SubmeanConstants measure_submean_constants(const Mapping& u, const std::vector<Vec>& points,
                                           const SubmeanOptions& opts, int radial_points,
                                           int angular_level) {
  const int n = u.dim();
  const std::size_t m = static_cast<std::size_t>(u.target_dim());
  const std::size_t np = opts.ps.size(), nd = opts.deltas.size();
  const BallRule rule = ball_rule(n, radial_points, angular_level, opts.seed);
  struct Slot {
    std::vector<double> mu06;
    double mu07 = 0.0;
    std::size_t used = 0, skipped = 0;
  };
  std::vector<Slot> slots(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const Vec& x = points[i];
    Slot& s = slots[i];
    s.mu06.assign(np * nd, 0.0);
    const Matrix jac = jacobian(u, x);
    const Vec ux = u.value(x);
    const double a = 1.0 - norm2(x);
    for (std::size_t di = 0; di < nd; ++di) {
      const double delta = opts.deltas[di];
      const BallNodes nodes = ball_nodes(rule, pseudo_ball(x, delta), Measure::Invariant);
      const std::vector<Vec> vals = detail::evaluate_at(u, nodes);
      for (std::size_t j = 0; j < m; ++j) {
        const double grad = a * norm(jac.row(j));
        for (std::size_t pi = 0; pi < np; ++pi) {
          const double p = opts.ps[pi];
          const double den = std::pow(delta, -n) * detail::weighted_sum(nodes.weights, [&](std::size_t k) {
                               return std::pow(std::fabs(vals[k][j]), p);
                             });
          if (!(den > 1e-200)) {
            ++s.skipped;
            continue;
          }
          s.mu06[pi * nd + di] = std::max(s.mu06[pi * nd + di], std::pow(grad, p) / den);
          ++s.used;
        }
        if (std::fabs(delta - 1.0 / 9.0) < 1e-15) {
          const double den = detail::weighted_sum(nodes.weights, [&](std::size_t k) {
            return std::fabs(vals[k][j] - ux[j]);
          });
          if (den > 1e-200) s.mu07 = std::max(s.mu07, grad / den);
        }
      }
    }
  });
  SubmeanConstants out;
  out.mu06.assign(np * nd, 0.0);
  for (const Slot& s : slots) {
    for (std::size_t k = 0; k < out.mu06.size(); ++k) out.mu06[k] = std::max(out.mu06[k], s.mu06[k]);
    out.mu07 = std::max(out.mu07, s.mu07);
    out.samples += s.used;
    out.skipped += s.skipped;
  }
  return out;
}

CheckReport check_submeanvalue(const Field& u, const SubmeanOptions& opts) {
  const int n = u.dim();
  CheckReport report;
  report.check_id = "submeanvalue";
  report.field_id = u.id();
  report.dim = n;
  report.seed = opts.seed;
  const int angular = detail::angular_level_for(n, opts.angular_level) - (n == 2 ? 1 : 0);
  report.params = {{"ps", detail::nums(opts.ps)}, {"deltas", detail::nums(opts.deltas)},
                   {"points", opts.points},       {"radial_points", opts.radial_points},
                   {"angular_level", angular},    {"drift", num(opts.drift)}};
  bool has_ninth = false;
  for (double d : opts.deltas) {
    if (!(d > 0.0 && d < 0.5)) throw_invalid("submean check needs delta in (0, 1/2)");
    has_ninth = has_ninth || std::fabs(d - 1.0 / 9.0) < 1e-15;
  }
  for (double p : opts.ps) {
    if (!(p > 0.0) || std::isinf(p)) throw_invalid("submean check needs finite p > 0");
  }
  // E(x, 1/4) lies in B(0, (1 + 4|x|)/(4 + |x|)); keep it inside the guard.
  const double g = u.guard_radius();
  const double r_max = 0.99 * (4.0 * g - 1.0) / (4.0 - g);
  if (!(r_max > 0.0)) throw_invalid("submean check: field guard radius too small, raise the level");
  const std::vector<Vec> points = detail::census_points(n, opts.points, r_max, g, opts.seed);

  const SubmeanConstants base = measure_submean_constants(u, points, opts, opts.radial_points, angular);
  const Field refined(u.boundary(), sphere_rule(n, u.rule().level + 1, u.rule().seed), u.options());
  const SubmeanConstants fine =
      measure_submean_constants(refined, points, opts, 2 * opts.radial_points, angular + 1);

  for (std::size_t pi = 0; pi < opts.ps.size(); ++pi) {
    for (std::size_t di = 0; di < opts.deltas.size(); ++di) {
      const double a = base.mu06[pi * opts.deltas.size() + di];
      const double b = fine.mu06[pi * opts.deltas.size() + di];
      CheckPart part;
      part.name = "mu06:p=" + fmt("%g", opts.ps[pi]) + ",delta=" + fmt("%.6g", opts.deltas[di]);
      const double drift = detail::relative_drift(a, b);
      part.record(std::isfinite(a) && std::isfinite(b) ? drift : kInfinity, opts.drift);
      part.details = {{"base", num(a)}, {"refined", num(b)}, {"drift", num(drift)}};
      report.parts.push_back(std::move(part));
    }
  }
  if (has_ninth) {
    CheckPart part;
    part.name = "mu07";
    const double drift = detail::relative_drift(base.mu07, fine.mu07);
    part.record(std::isfinite(base.mu07) && std::isfinite(fine.mu07) ? drift : kInfinity, opts.drift);
    part.details = {{"base", num(base.mu07)}, {"refined", num(fine.mu07)}, {"drift", num(drift)}};
    report.parts.push_back(std::move(part));

    // ||Du(x)|| <= 5^n sqrt(n) mu07 / (2^n (1-|x|)^(n+1)) int_{B(x,(1-|x|)/4)} |u(y) - u(x)| dnu
    CheckPart lemma;
    lemma.name = "derivative_by_oscillation";
    lemma.kind = MarginKind::Relative;
    lemma.tolerance = 1e-6;
    const BallRule rule = ball_rule(n, opts.radial_points, angular, opts.seed);
    const double c = std::pow(5.0, n) * std::sqrt(static_cast<double>(n)) * base.mu07 / std::pow(2.0, n);
    std::vector<double> lhs(points.size()), rhs(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
      const Vec& x = points[i];
      const double d = 1.0 - norm(x);
      const Vec ux = u.value(x);
      const BallNodes nodes = ball_nodes(rule, EuclideanBall{x, d / 4.0}, Measure::Volume);
      const std::vector<Vec> vals = detail::evaluate_at(u, nodes);
      const double integral =
          detail::weighted_sum(nodes.weights, [&](std::size_t k) { return distance(vals[k], ux); });
      lhs[i] = operator_norm(jacobian(u, x));
      rhs[i] = c / std::pow(d, n + 1) * integral;
    });
    for (std::size_t i = 0; i < points.size(); ++i) lemma.record(lhs[i], rhs[i]);
    lemma.details = {{"mu07", num(base.mu07)}};
    report.parts.push_back(std::move(lemma));
  }
  report.census = {{"points", points.size()}, {"r_max", num(r_max)},
                   {"samples", base.samples},  {"skipped", base.skipped},
                   {"refined_level", refined.rule().level}};
  return report;
}

// ----------------------------------------------------------------- invariance

std::vector<CheckPart> geometry_identity_parts(int n, std::size_t samples, std::uint64_t seed) {
  std::vector<CheckPart> parts;
  const auto xs = sample_ball_points(n, samples, 0.95, seed + 11);
  const auto ws = sample_ball_points(n, samples, 0.95, seed + 12);
  const auto ys = sample_ball_points(n, samples, 0.9, seed + 13);

  CheckPart invol;
  invol.name = "moebius_involution";
  invol.tolerance = 1e-12;
  CheckPart ratio;
  ratio.name = "moebius_ratio_identity";
  ratio.tolerance = 1e-12;
  for (std::size_t i = 0; i < samples; ++i) {
    invol.record(distance(moebius_phi(ws[i], moebius_phi(ws[i], xs[i])), xs[i]), 0.0);
    const double q = distance(xs[i], ws[i]) / bracket(xs[i], ws[i]);
    ratio.record(std::max(std::fabs(norm(moebius_phi(ws[i], xs[i])) - q),
                          std::fabs(norm(moebius_phi(xs[i], ws[i])) - q)),
                 0.0);
  }
  parts.push_back(std::move(invol));
  parts.push_back(std::move(ratio));

  CheckPart rho;
  rho.name = "rho_moebius_invariance";
  rho.tolerance = 1e-10;
  const auto xr = sample_ball_points(n, samples, 0.9, seed + 14);
  for (std::size_t i = 0; i < samples; ++i) {
    const MoebiusMap map = MoebiusMap::random(static_cast<std::size_t>(n), 0.9, seed * 7919 + i);
    rho.record(std::fabs(hyperbolic_distance(xr[i], ys[i]) - hyperbolic_distance(map(xr[i]), map(ys[i]))), 0.0);
  }
  parts.push_back(std::move(rho));

  // 1 - |x|^2 <= 2(1+delta)/(1-delta) (1 - |y|^2) for y in E(x, delta).
  CheckPart comp;
  comp.name = "pseudo_ball_comparison";
  comp.tolerance = 1e-12;
  const auto xc = sample_ball_points(n, samples, 0.99, seed + 15);
  const auto zc = sample_ball_points(n, samples, 1.0, seed + 16);
  for (std::size_t i = 0; i < samples; ++i) {
    const double delta = 0.01 + 0.98 * detail::unit_uniform(seed + 17, i);
    const Vec y = moebius_phi(xc[i], scaled(zc[i], delta));
    comp.record(1.0 - norm2(xc[i]), 2.0 * (1.0 + delta) / (1.0 - delta) * (1.0 - norm2(y)));
  }
  parts.push_back(std::move(comp));

  // E(w, r) = {|phi_w(z)| < r} as the Euclidean ball, and its symmetry.
  CheckPart ball;
  ball.name = "pseudo_ball_representation";
  ball.tolerance = 1e-12;
  CheckPart sym;
  sym.name = "pseudo_ball_symmetry";
  sym.tolerance = 1e-12;
  const auto zb = sample_ball_points(n, samples, 0.99, seed + 18);
  for (std::size_t i = 0; i < samples; ++i) {
    const double r = 0.02 + 0.96 * detail::unit_uniform(seed + 19, i);
    const EuclideanBall e = pseudo_ball(ws[i], r);
    const double a = norm(moebius_phi(ws[i], zb[i])) - r;
    const double b = distance(zb[i], e.center) - e.radius;
    const bool agree = (a < 0.0) == (b < 0.0);
    ball.record_margin(agree ? 0.0 : -std::min(std::fabs(a), std::fabs(b)));
    ball.record_margin(1.0 + 1e-12 - (norm(e.center) + e.radius) >= 0.0 ? 0.0 : -1.0);
    const double s1 = norm(moebius_phi(ws[i], zb[i])) - r;
    const double s2 = norm(moebius_phi(zb[i], ws[i])) - r;
    const bool same = (s1 < 0.0) == (s2 < 0.0);
    sym.record_margin(same ? 0.0 : -std::min(std::fabs(s1), std::fabs(s2)));
  }
  parts.push_back(std::move(ball));
  parts.push_back(std::move(sym));
  return parts;
}

CheckReport check_invariances(const MappingPtr& u, const InvarianceOptions& opts) {
  const int n = u->dim();
  CheckReport report;
  report.check_id = "invariances";
  report.field_id = u->id();
  report.dim = n;
  report.seed = opts.seed;
  const GridSpec grid = with_level(opts.grid, n);
  report.params = {{"samples", opts.samples},   {"geometry_samples", opts.geometry_samples},
                   {"bloch_maps", opts.bloch_maps}, {"h", num(opts.h)},
                   {"residual_tolerance", num(opts.residual_tolerance)},
                   {"gradient_tolerance", num(opts.gradient_tolerance)},
                   {"grid", grid_json(grid)}};
  // |x|, |w| <= a keeps |phi_w(x)| <= 2a/(1+a^2) = 0.9 guard.
  const double t = 0.9 * std::min(u->guard_radius(), 1.0 - 1e-6);
  const double a = (1.0 - std::sqrt(1.0 - t * t)) / t;
  const auto xs = sample_ball_points(n, opts.samples, a, opts.seed + 21);
  const std::size_t m = static_cast<std::size_t>(u->target_dim());
  std::vector<double> lap_err(opts.samples), lap_scale(opts.samples), grad_err(opts.samples);
  parallel_for(opts.samples, [&](std::size_t i) {
    MoebiusMap map = MoebiusMap::random(static_cast<std::size_t>(n), a, opts.seed * 104729 + i + 1);
    const Pullback pb(u, map);
    const Vec lhs = hyperbolic_laplacian(pb, xs[i], opts.h);
    const Vec rhs = hyperbolic_laplacian(*u, map(xs[i]), opts.h);
    double e = 0.0, s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      e = std::max(e, std::fabs(lhs[j] - rhs[j]));
      s = std::max(s, std::fabs(rhs[j]));
    }
    lap_err[i] = e;
    lap_scale[i] = s;
    double g = 0.0;
    for (int j = 0; j < static_cast<int>(m); ++j) {
      const double gl = norm(hyperbolic_gradient(pb, j, xs[i], DiffMode::FiniteDifference));
      const double gr = norm(hyperbolic_gradient(*u, j, map(xs[i]), DiffMode::FiniteDifference));
      g = std::max(g, std::fabs(gl - gr) / (1.0 + gr));
    }
    grad_err[i] = g;
  });
  CheckPart lap;
  lap.name = "laplacian_pullback";
  CheckPart grad;
  grad.name = "hyperbolic_gradient_pullback";
  grad.tolerance = opts.gradient_tolerance;
  double worst_lap = 0.0;
  for (std::size_t i = 0; i < opts.samples; ++i) {
    lap.record(lap_err[i], opts.residual_tolerance * (1.0 + lap_scale[i]));
    worst_lap = std::max(worst_lap, lap_err[i]);
    grad.record(grad_err[i], 0.0);
  }
  lap.details = {{"max_abs_difference", num(worst_lap)}, {"radius", num(a)}};
  report.parts.push_back(std::move(lap));
  report.parts.push_back(std::move(grad));

  if (opts.bloch_maps > 0) {
    CheckPart bloch;
    bloch.name = "pullback_bloch_bound";
    bloch.kind = MarginKind::Relative;
    bloch.tolerance = 1e-6;
    const NormEstimate base = bloch_seminorm(*u, grid);
    Json values = Json::array();
    for (std::size_t k = 0; k < opts.bloch_maps; ++k) {
      MoebiusMap map = MoebiusMap::random(static_cast<std::size_t>(n), 0.5, opts.seed * 15485863 + k + 1);
      const Pullback pb(u, map);
      const NormEstimate e = bloch_seminorm(pb, grid);
      bloch.record(e.value, std::sqrt(static_cast<double>(n)) * base.value);
      values.push_back(num(e.value));
    }
    bloch.details = {{"seminorm", num(base.value)}, {"pullback_seminorms", values}};
    report.parts.push_back(std::move(bloch));
  }
  if (opts.geometry) {
    for (auto& part : geometry_identity_parts(n, opts.geometry_samples, opts.seed)) {
      report.parts.push_back(std::move(part));
    }
  }
  report.census = {{"samples", opts.samples}, {"radius", num(a)}};
  return report;
}

}  // namespace hhm
