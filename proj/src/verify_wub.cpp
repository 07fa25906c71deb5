#include <algorithm>
#include <cmath>
#include <numbers>

#include "hhm/errors.hpp"
#include "hhm/parallel.hpp"
#include "hhm/sampling.hpp"
#include "verify_internal.hpp"

namespace hhm {

using detail::num;

namespace {

double determinant(const Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<double> a(m.data());
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
    }
    if (a[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    det *= a[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

// Sampled image of the sphere under the boundary data.
struct ImageBoundary {
  int dim = 0;
  std::vector<double> points;

  double distance_from(VecView v) const {
    double best = kInfinity;
    const std::size_t d = static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < points.size() / d; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double t = v[k] - points[i * d + k];
        s += t * t;
      }
      best = std::min(best, s);
    }
    return std::sqrt(best);
  }
};

ImageBoundary image_boundary(const Field& u, int level) {
  const SphereRule rule = sphere_rule(u.dim(), level, u.rule().seed);
  ImageBoundary out;
  out.dim = u.target_dim();
  out.points.resize(rule.size() * static_cast<std::size_t>(out.dim));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    u.boundary().evaluate(rule.node(i),
                          std::span<double>(out.points.data() + i * out.dim, static_cast<std::size_t>(out.dim)));
  }
  return out;
}

int default_boundary_level(int n) { return n == 2 ? 12 : (n == 3 ? 8 : 10); }

// Winding number of the closed curve psi(e^{it}) around c.
int winding_number(const ImageBoundary& img, VecView c) {
  double total = 0.0;
  const std::size_t m = img.points.size() / 2;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    const double a = std::atan2(img.points[2 * i + 1] - c[1], img.points[2 * i] - c[0]);
    const double b = std::atan2(img.points[2 * j + 1] - c[1], img.points[2 * j] - c[0]);
    double d = b - a;
    if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    if (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
    total += d;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

struct PathIntegrals {
  double k_domain = 0.0;
  double k_image = 0.0;
  double pointwise = 0.0;  // sup ||Du|| d_B / d_img over the quadrature nodes
  double min_det = kInfinity;
  double max_det = -kInfinity;
};

// Both path integrals along the same polygon with the same Gauss-Legendre
// nodes: int |dz| / (1 - |z|) and int ||Du(z)|| |dz| / d_img(u(z)).
PathIntegrals path_integrals(const Field& u, const ImageBoundary& img, const std::vector<Vec>& path) {
  std::vector<double> t, w;
  gauss_legendre(4, t, w);
  const std::size_t segs = path.size() - 1;
  std::vector<PathIntegrals> parts(segs);
  parallel_for(segs, [&](std::size_t s) {
    const Vec& a = path[s];
    const Vec& b = path[s + 1];
    const double len = distance(a, b);
    PathIntegrals& p = parts[s];
    for (std::size_t k = 0; k < t.size(); ++k) {
      const Vec z = axpy(0.5 * (t[k] + 1.0), sub(b, a), a);
      const Matrix jac = u.analytic_jacobian(z);
      const double d_b = 1.0 - norm(z);
      const double d_img = img.distance_from(u.value(z));
      const double du = operator_norm(jac);
      const double det = determinant(jac);
      p.k_domain += 0.5 * len * w[k] / d_b;
      p.k_image += 0.5 * len * w[k] * du / d_img;
      p.pointwise = std::max(p.pointwise, du * d_b / d_img);
      p.min_det = std::min(p.min_det, det);
      p.max_det = std::max(p.max_det, det);
    }
  });
  PathIntegrals out;
  out.k_domain = tree_sum(segs, 1, [&](std::size_t i, double* o) { o[0] = parts[i].k_domain; })[0];
  out.k_image = tree_sum(segs, 1, [&](std::size_t i, double* o) { o[0] = parts[i].k_image; })[0];
  for (const auto& p : parts) {
    out.pointwise = std::max(out.pointwise, p.pointwise);
    out.min_det = std::min(out.min_det, p.min_det);
    out.max_det = std::max(out.max_det, p.max_det);
  }
  return out;
}

struct Ratios {
  std::vector<double> k_domain, k_image, pointwise;
  double min_det = kInfinity, max_det = -kInfinity;
  double mu3 = 0.0, min_ratio = kInfinity, k_factor = 0.0;
};

Ratios measure_ratios(const Field& u, const ImageBoundary& img,
                      const std::vector<std::pair<Vec, Vec>>& pairs, int resolution) {
  Ratios r;
  QuasihyperbolicOptions qopts;
  qopts.resolution = resolution;
  for (const auto& [x, y] : pairs) {
    const QuasihyperbolicEstimate est = quasihyperbolic_distance(x, y, qopts);
    const PathIntegrals p = path_integrals(u, img, est.path);
    r.k_domain.push_back(p.k_domain);
    r.k_image.push_back(p.k_image);
    r.pointwise.push_back(p.pointwise);
    r.min_det = std::min(r.min_det, p.min_det);
    r.max_det = std::max(r.max_det, p.max_det);
    const double ratio = p.k_image / p.k_domain;
    r.mu3 = std::max(r.mu3, ratio);
    r.min_ratio = std::min(r.min_ratio, ratio);
    r.k_factor = std::max(r.k_factor, p.pointwise);
  }
  return r;
}

}  // namespace

CheckReport check_wub_quasihyperbolic(const Field& u, const WubOptions& opts) {
  const int n = u.dim();
  CheckReport report;
  report.check_id = "wub_quasihyperbolic";
  report.field_id = u.id();
  report.dim = n;
  report.seed = opts.seed;
  const double guard = u.guard_radius();
  const double r_max = opts.r_max > 0.0 ? std::min(opts.r_max, guard) : 0.9 * guard;
  const int level = opts.boundary_level > 0 ? opts.boundary_level : default_boundary_level(n);
  const int angular = detail::angular_level_for(n, opts.angular_level);
  report.params = {{"pairs", opts.pairs},
                   {"wub_pairs", opts.wub_pairs},
                   {"mu07_points", opts.mu07_points},
                   {"lipschitz_points", opts.lipschitz_points},
                   {"path_resolution", opts.path_resolution},
                   {"boundary_level", level},
                   {"radial_points", opts.radial_points},
                   {"angular_level", angular},
                   {"r_max", num(r_max)},
                   {"expect_ratio", num(opts.expect_ratio)},
                   {"ratio_slack", num(opts.ratio_slack)},
                   {"drift", num(opts.drift)}};
  if (u.target_dim() != n) {
    report.skip_reason = "image dimension differs from domain dimension";
    return report;
  }
  if (opts.pairs < 1 || opts.path_resolution < 4) throw_invalid("wub check needs pairs >= 1 and path_resolution >= 4");

  const ImageBoundary img = image_boundary(u, level);
  const Vec u0 = u.value(Vec(static_cast<std::size_t>(n), 0.0));

  // Injectivity screen: boundary degree (n = 2) and a constant Jacobian sign.
  const std::vector<Vec> census = detail::census_points(n, opts.lipschitz_points, r_max, guard, opts.seed + 31);
  std::vector<double> dets(census.size()), factor(census.size()), d_img(census.size());
  parallel_for(census.size(), [&](std::size_t i) {
    const Matrix jac = u.analytic_jacobian(census[i]);
    dets[i] = determinant(jac);
    d_img[i] = img.distance_from(u.value(census[i]));
    factor[i] = operator_norm(jac) * (1.0 - norm(census[i])) / d_img[i];
  });
  const auto [dmin, dmax] = std::minmax_element(dets.begin(), dets.end());
  Json screen = {{"min_det", num(*dmin)}, {"max_det", num(*dmax)}};
  if (n == 2) {
    const int wn = winding_number(img, u0);
    screen["winding_number"] = wn;
    if (std::abs(wn) != 1) {
      report.census = screen;
      report.skip_reason = "boundary curve winds " + std::to_string(wn) + " times around u(0); not injective";
      return report;
    }
  }
  if (!(*dmin > 0.0 || *dmax < 0.0)) {
    report.census = screen;
    report.skip_reason = "Jacobian determinant changes sign on the sampled region; not injective";
    return report;
  }

  // Pairs for the path comparison.
  std::vector<std::pair<Vec, Vec>> pairs = sample_ball_pairs(n, opts.pairs, r_max, opts.seed + 32);
  for (auto& [x, y] : pairs) {
    if (distance(x, y) < 1e-3) y = scaled(x, -1.0);
  }
  const Ratios base = measure_ratios(u, img, pairs, opts.path_resolution);
  const ImageBoundary img_fine = image_boundary(u, level + 1);
  const Ratios fine = measure_ratios(u, img_fine, pairs, 2 * opts.path_resolution);
  if (base.min_det * base.max_det <= 0.0 || fine.min_det * fine.max_det <= 0.0 ||
      base.min_det * *dmin <= 0.0) {
    report.census = screen;
    report.skip_reason = "Jacobian determinant changes sign along a path; not injective";
    return report;
  }

  // Weak uniform boundedness over pairs with r_B(x, y) <= 1/2.
  const std::vector<Vec> xs = detail::census_points(n, opts.wub_pairs, r_max, guard, opts.seed + 33);
  const auto dirs = sample_ball_points(n, opts.wub_pairs, 1.0, opts.seed + 34);
  std::vector<double> rel(xs.size()), rel_b(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    const Vec& x = xs[i];
    const double s = detail::unit_uniform(opts.seed + 35, i);
    const double dl = norm(dirs[i]);
    Vec v = dl > 0.0 ? scaled(dirs[i], 1.0 / dl) : Vec(static_cast<std::size_t>(n), 0.0);
    if (dl == 0.0) v[0] = 1.0;
    const Vec y = axpy(s * (1.0 - norm(x)) / 3.0, v, x);
    const Vec ux = u.value(x), uy = u.value(y);
    rel[i] = distance(ux, uy) / std::min(img.distance_from(ux), img.distance_from(uy));
    rel_b[i] = relative_distance(x, y);
  });
  const double mu02 = *std::max_element(rel.begin(), rel.end());

  SubmeanOptions sub;
  sub.ps = {1.0};
  sub.deltas = {1.0 / 9.0};
  sub.seed = opts.seed;
  const double mu07_rmax = 0.99 * (9.0 * guard - 1.0) / (9.0 - guard);
  const std::vector<Vec> mu07_points =
      detail::census_points(n, opts.mu07_points, std::min(r_max, mu07_rmax), guard, opts.seed + 36);
  const double mu07 = measure_submean_constants(u, mu07_points, sub, opts.radial_points, angular).mu07;

  const double k_census = std::max(*std::max_element(factor.begin(), factor.end()), base.k_factor);

  CheckPart bound;
  bound.name = "path_ratio_within_pointwise_factor";
  bound.kind = MarginKind::Relative;
  bound.tolerance = 1e-6;
  Json rows = Json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    bound.record(base.k_image[i], k_census * base.k_domain[i]);
    rows.push_back(Json::array({num(base.k_domain[i]), num(base.k_image[i]), num(fine.k_domain[i]),
                                num(fine.k_image[i])}));
  }
  bound.details = {{"pointwise_factor", num(k_census)}, {"rows", rows}};
  report.parts.push_back(std::move(bound));

  CheckPart mu3;
  mu3.name = "mu3_refinement";
  const double drift = detail::relative_drift(base.mu3, fine.mu3);
  mu3.record(std::isfinite(base.mu3) && std::isfinite(fine.mu3) ? drift : kInfinity, opts.drift);
  const double vol = unit_ball_volume(n);
  const double formula = std::pow(5.0 / 8.0, n) * std::sqrt(static_cast<double>(n)) * mu02 * mu07;
  mu3.details = {{"mu3", num(base.mu3)},
                 {"mu3_refined", num(fine.mu3)},
                 {"drift", num(drift)},
                 {"min_ratio", num(base.min_ratio)},
                 {"mu02", num(mu02)},
                 {"mu07", num(mu07)},
                 {"formula_with_volume", num(formula * vol)},
                 {"formula_without_volume", num(formula)},
                 {"unit_ball_volume", num(vol)}};
  report.parts.push_back(std::move(mu3));

  if (!std::isnan(opts.expect_ratio)) {
    CheckPart exact;
    exact.name = "expected_ratio";
    exact.record(std::max(std::fabs(base.mu3 - opts.expect_ratio), std::fabs(base.min_ratio - opts.expect_ratio)),
                 opts.ratio_slack * opts.expect_ratio);
    exact.details = {{"max_ratio", num(base.mu3)}, {"min_ratio", num(base.min_ratio)},
                     {"expected", num(opts.expect_ratio)}};
    report.parts.push_back(std::move(exact));
  }

  for (const auto& [name, value] : {std::pair<const char*, double>{"mu02", mu02}, {"mu07", mu07}}) {
    CheckPart part;
    part.name = name;
    part.informational = true;
    part.record(std::isfinite(value) ? 0.0 : kInfinity, 0.0);
    part.details = {{"value", num(value)}};
    report.parts.push_back(std::move(part));
  }
  CheckPart closed;
  closed.name = "mu3_against_formula";
  closed.informational = true;
  closed.record(base.mu3, formula * vol);
  closed.details = {{"mu3", num(base.mu3)}, {"formula_with_volume", num(formula * vol)},
                    {"formula_without_volume", num(formula)}};
  report.parts.push_back(std::move(closed));

  screen["wub_pairs"] = xs.size();
  screen["max_relative_distance_domain"] = num(*std::max_element(rel_b.begin(), rel_b.end()));
  screen["image_boundary_points"] = img.points.size() / static_cast<std::size_t>(n);
  screen["lipschitz_points"] = census.size();
  report.census = screen;
  return report;
}

}  // namespace hhm
