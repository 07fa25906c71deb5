#include "hhm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hhm/errors.hpp"
#include "hhm/geometry.hpp"
#include "hhm/parallel.hpp"

namespace hhm {

double fd_step(VecView x) { return std::min(1e-4, (1.0 - norm(x)) / 100.0); }

namespace {

Matrix fd_jacobian(const Mapping& f, VecView x) {
  const std::size_t n = x.size();
  const std::size_t m = static_cast<std::size_t>(f.target_dim());
  const double h = fd_step(x);
  Matrix jac(m, n);
  Vec y(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto at = [&](double off) {
      y[i] = x[i] + off;
      Vec v = f.value(y);
      y[i] = x[i];
      return v;
    };
    const Vec p2 = at(2.0 * h), p1 = at(h), m1 = at(-h), m2 = at(-2.0 * h);
    for (std::size_t j = 0; j < m; ++j) {
      jac(j, i) = (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * h);
    }
  }
  return jac;
}

// Largest eigenvalue of a symmetric 3x3 matrix, trigonometric form.
double sym3_max_eigenvalue(const Matrix& s) {
  const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
  const double q = (s(0, 0) + s(1, 1) + s(2, 2)) / 3.0;
  if (p1 == 0.0) return std::max({s(0, 0), s(1, 1), s(2, 2)});
  const double p2 = (s(0, 0) - q) * (s(0, 0) - q) + (s(1, 1) - q) * (s(1, 1) - q) +
                    (s(2, 2) - q) * (s(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Matrix b(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) b(i, j) = (s(i, j) - (i == j ? q : 0.0)) / p;
  const double det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                     b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                     b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  return q + 2.0 * p * std::cos(std::acos(r) / 3.0);
}

}  // namespace

Matrix jacobian(const Mapping& f, VecView x, DiffMode mode) {
  if (static_cast<int>(x.size()) != f.dim()) throw_invalid("jacobian: dimension mismatch");
  require_interior(x, "jacobian");
  if (mode == DiffMode::Analytic && !f.has_analytic_jacobian()) {
    throw_invalid("analytic jacobian requires a kernel-differentiable field, got '" + f.id() + "'");
  }
  if (mode == DiffMode::FiniteDifference || !f.has_analytic_jacobian()) return fd_jacobian(f, x);
  return f.analytic_jacobian(x);
}

double operator_norm(const Matrix& a) {
  if (!all_finite(a.data())) throw_invalid("operator_norm: non-finite entries");
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0 || n == 0) return 0.0;
  if (m == 1 || n == 1) return norm(a.data());
  if (m == 2 && n == 2) {
    const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
    return 0.5 * (std::hypot(p + s, r - q) + std::hypot(p - s, q + r));
  }
  Matrix g = m < n ? a * a.transpose() : a.transpose() * a;
  const std::size_t k = g.rows();
  double diag = 0.0;
  for (std::size_t i = 0; i < k; ++i) diag += g(i, i) * g(i, i);
  bool converged = false;
  for (int sweep = 0; sweep < 200 && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) off += g(i, j) * g(i, j);
    if (off <= 1e-24 * diag) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        if (g(p, q) == 0.0) continue;
        const double theta = (g(q, q) - g(p, p)) / (2.0 * g(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < k; ++i) {
          const double gip = g(i, p), giq = g(i, q);
          g(i, p) = c * gip - s * giq;
          g(i, q) = s * gip + c * giq;
        }
        for (std::size_t i = 0; i < k; ++i) {
          const double gpi = g(p, i), gqi = g(q, i);
          g(p, i) = c * gpi - s * gqi;
          g(q, i) = s * gpi + c * gqi;
        }
      }
    }
  }
  if (!converged) {
    if (k == 3) {
      const Matrix orig = m < n ? a * a.transpose() : a.transpose() * a;
      return std::sqrt(std::max(0.0, sym3_max_eigenvalue(orig)));
    }
    throw_numeric("operator_norm: eigen-iteration did not converge");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < k; ++i) best = std::max(best, g(i, i));
  return std::sqrt(best);
}

Vec hyperbolic_gradient(const Mapping& f, int component, VecView x, DiffMode mode) {
  if (component < 0 || component >= f.target_dim()) throw_invalid("hyperbolic_gradient: bad component");
  const Matrix jac = jacobian(f, x, mode);
  const double r = norm(x);
  return scaled(jac.row(static_cast<std::size_t>(component)), (1.0 - r) * (1.0 + r));
}

Vec sphere_samples(const SphereRule& rule, double r, const std::function<double(VecView)>& g) {
  if (!(r >= 0.0 && r < 1.0)) throw_invalid("radius must lie in [0, 1)");
  const std::size_t n = static_cast<std::size_t>(rule.dim);
  Vec out(rule.size());
  parallel_for(rule.size(), [&](std::size_t i) {
    Vec x(n);
    const VecView xi = rule.node(i);
    for (std::size_t k = 0; k < n; ++k) x[k] = r * xi[k];
    out[i] = g(x);
  });
  return out;
}

double power_mean(const SphereRule& rule, const Vec& values, double p) {
  if (!(p > 0.0)) throw_invalid("integral mean exponent p must be > 0");
  if (values.size() != rule.size()) throw_invalid("power_mean: sample count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw_numeric("non-finite integrand at node " + std::to_string(i));
  }
  if (std::isinf(p)) return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  const double s = tree_sum(values.size(), 1, [&](std::size_t i, double* out) {
                     out[0] = rule.weights[i] * std::pow(values[i], p);
                   })[0];
  return std::pow(s, 1.0 / p);
}

double integral_mean(const Mapping& f, double r, double p, const SphereRule& rule) {
  if (!(p > 0.0)) throw_invalid("integral mean exponent p must be > 0");
  if (rule.dim != f.dim()) throw_invalid("integral_mean: rule dimension mismatch");
  return power_mean(rule, sphere_samples(rule, r, [&](VecView x) { return norm(f.value(x)); }), p);
}

double derivative_mean(const Mapping& f, double r, double p, const SphereRule& rule, DiffMode mode) {
  if (!(p > 0.0)) throw_invalid("integral mean exponent p must be > 0");
  if (rule.dim != f.dim()) throw_invalid("derivative_mean: rule dimension mismatch");
  return power_mean(
      rule, sphere_samples(rule, r, [&](VecView x) { return operator_norm(jacobian(f, x, mode)); }), p);
}

std::vector<double> radii_schedule(int count, double cap) {
  if (count < 0) throw_invalid("radii count must be >= 0");
  if (!(cap >= 0.0 && cap < 1.0)) throw_invalid("radius cap must lie in [0, 1)");
  std::vector<double> radii;
  for (int i = 0; i <= count; ++i) {
    const double r = 1.0 - std::exp2(-i / 4.0);
    if (r > cap) break;
    radii.push_back(r);
  }
  if (radii.empty() || cap > radii.back() + 1e-12) radii.push_back(cap);
  return radii;
}

SphereRule grid_sphere(int dim, const GridSpec& grid) { return sphere_rule(dim, grid.sphere_level, grid.seed); }

NormEstimate hardy_norm(const Mapping& f, double p, const std::vector<double>& radii, const SphereRule& rule) {
  if (radii.empty()) throw_invalid("hardy_norm: empty radii schedule");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw_invalid("hardy_norm: radii must be increasing");
  }
  NormEstimate est;
  est.functional = "hardy";
  char buf[64];
  std::snprintf(buf, sizeof buf, "p=%.17g", p);
  est.params = buf;
  est.radii = radii;
  est.sphere_level = rule.level;
  double best = 0.0;
  for (double r : radii) {
    const double m = integral_mean(f, r, p, rule);
    if (m > best || est.argmax.empty()) {
      best = std::max(best, m);
      est.argmax = {r};
    }
    est.history.push_back(best);
  }
  est.value = best;
  est.seminorm_part = best;
  return est;
}

namespace {

// Pattern search maximising g over the ball |x| <= cap, starting from x0.
Vec polish_max(const std::function<double(VecView)>& g, Vec x0, double cap, double& best) {
  const std::size_t n = x0.size();
  double step = 0.25 * std::max(1.0 - norm(x0), 1e-6);
  const double floor = 1e-6 * std::max(1.0 - cap, 1e-6);
  for (int iter = 0; iter < 200 && step > floor; ++iter) {
    bool moved = false;
    for (std::size_t i = 0; i < n && !moved; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vec y = x0;
        y[i] += sgn * step;
        if (norm(y) > cap) continue;
        const double v = g(y);
        if (v > best) {
          best = v;
          x0 = std::move(y);
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return x0;
}

double effective_cap(const Mapping& f, const GridSpec& grid) {
  return std::min({grid.cap, f.guard_radius(), 1.0 - 1e-6});
}

}  // namespace

NormEstimate bloch_seminorm(const Mapping& f, const GridSpec& grid) {
  const SphereRule sphere = grid_sphere(f.dim(), grid);
  const double cap = effective_cap(f, grid);
  NormEstimate est;
  est.functional = "bloch";
  est.radii = radii_schedule(grid.radii, cap);
  est.sphere_level = grid.sphere_level;
  const std::size_t n = static_cast<std::size_t>(f.dim());
  auto weighted = [&](VecView x) {
    const double r2 = norm2(x);
    return operator_norm(jacobian(f, x)) * (1.0 - r2);
  };
  double best = -1.0;
  for (double r : est.radii) {
    const Vec vals = sphere_samples(sphere, r, weighted);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (!std::isfinite(vals[i])) throw_numeric("non-finite Bloch weight at radius " + std::to_string(r));
      if (vals[i] > best) {
        best = vals[i];
        est.argmax = scaled(sphere.node(i), r);
      }
    }
    est.history.push_back(best);
  }
  if (grid.polish) {
    est.argmax = polish_max(weighted, est.argmax, cap, best);
    est.history.push_back(best);
    est.polished = true;
  }
  est.value = best;
  est.seminorm_part = best;
  est.origin_part = norm(f.value(Vec(n, 0.0)));
  return est;
}

void BlochParams::validate() const {
  if (!(p > 0.0)) throw_invalid("Bloch parameter p must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw_invalid("Bloch parameter alpha must be > 0");
  if (!std::isfinite(beta)) throw_invalid("Bloch parameter beta must be finite");
  if (beta <= 0.0) {
    if (!(a > 1.0)) throw_invalid("Bloch parameter a must exceed 1 when beta <= 0");
  } else if (!(a >= std::exp(beta / alpha))) {
    throw_invalid("Bloch parameter a must be >= e^(beta/alpha) when beta > 0");
  }
}

std::string BlochParams::describe() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "p=%.17g,alpha=%.17g,beta=%.17g,a=%.17g,omega=", p, alpha, beta, a);
  return buf + omega.id();
}

double phi_weight(const BlochParams& params, double r) {
  params.validate();
  if (!(r >= 0.0 && r < 1.0)) throw_invalid("phi_weight: radius must lie in [0, 1)");
  const double d = 1.0 - r;
  return std::pow(d, params.alpha) * std::pow(std::log(params.a / d), params.beta);
}

NormEstimate generalized_bloch_norm(const Mapping& f, const BlochParams& params, const GridSpec& grid) {
  params.validate();
  const SphereRule sphere = grid_sphere(f.dim(), grid);
  const double cap = effective_cap(f, grid);
  NormEstimate est;
  est.functional = "generalized_bloch";
  est.params = params.describe();
  est.radii = radii_schedule(grid.radii, cap);
  est.sphere_level = grid.sphere_level;
  auto h = [&](double r) {
    return derivative_mean(f, r, params.p, sphere) * params.omega(phi_weight(params, r));
  };
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < est.radii.size(); ++i) {
    const double v = h(est.radii[i]);
    if (!std::isfinite(v)) throw_numeric("non-finite generalized Bloch weight");
    if (v > best) {
      best = v;
      arg = i;
    }
    est.history.push_back(best);
  }
  double best_r = est.radii[arg];
  if (grid.polish && est.radii.size() > 1) {
    // Golden-section search on the bracket around the best radius.
    double lo = arg > 0 ? est.radii[arg - 1] : est.radii[0];
    double hi = arg + 1 < est.radii.size() ? est.radii[arg + 1] : est.radii[arg];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = h(c), fd = h(d);
    for (int it = 0; it < 30 && hi - lo > 1e-9; ++it) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - g * (hi - lo);
        fc = h(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + g * (hi - lo);
        fd = h(d);
      }
      if (fc > best) {
        best = fc;
        best_r = c;
      }
      if (fd > best) {
        best = fd;
        best_r = d;
      }
    }
    est.history.push_back(best);
    est.polished = true;
  }
  est.argmax = {best_r};
  est.seminorm_part = best;
  est.origin_part = norm(f.value(Vec(static_cast<std::size_t>(f.dim()), 0.0)));
  est.value = est.origin_part + best;
  return est;
}

}  // namespace hhm
