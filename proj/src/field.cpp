#include "hhm/field.hpp"

#include <cmath>
#include <cstdio>

#include "hhm/closed_form.hpp"
#include "hhm/errors.hpp"

namespace hhm {

namespace {

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double one_minus_norm2(VecView x) {
  const double r = norm(x);
  return (1.0 - r) * (1.0 + r);
}

[[noreturn]] void kernel_singular(VecView x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "Poisson kernel is singular: |x| = %.17g touches a node", norm(x));
  throw_guard(buf);
}

}  // namespace

double poisson_kernel(VecView x, VecView xi) {
  require_same_dim(x, xi, "poisson_kernel");
  require_interior(x, "poisson_kernel");
  require_boundary(xi, "poisson_kernel");
  const double b = norm2(sub(x, xi));
  if (b < 1e-24) kernel_singular(x);
  return ipow(one_minus_norm2(x) / b, static_cast<int>(x.size()) - 1);
}

double kernel_mass(const SphereRule& rule, VecView x) {
  if (static_cast<int>(x.size()) != rule.dim) throw_invalid("kernel_mass: dimension mismatch");
  require_interior(x, "kernel_mass");
  const double a = one_minus_norm2(x);
  const int e = rule.dim - 1;
  const std::size_t n = x.size();
  return tree_sum(rule.size(), 1, [&](std::size_t i, double* out) {
           const double* xi = rule.nodes.data() + i * n;
           double b = 0.0;
           for (std::size_t k = 0; k < n; ++k) b += (x[k] - xi[k]) * (x[k] - xi[k]);
           if (b < 1e-24) kernel_singular(x);
           out[0] = rule.weights[i] * ipow(a / b, e);
         })[0];
}

Field::Field(BoundaryMap boundary, SphereRule rule, FieldOptions options)
    : boundary_(std::move(boundary)), rule_(std::move(rule)), options_(options) {
  if (boundary_.dim() != rule_.dim) throw_invalid("boundary map and rule dimensions differ");
  const std::size_t m = static_cast<std::size_t>(boundary_.target_dim());
  psi_.resize(rule_.size() * m);
  for (std::size_t i = 0; i < rule_.size(); ++i) {
    std::span<double> out(psi_.data() + i * m, m);
    boundary_.evaluate(rule_.node(i), out);
    double mag = 0.0;
    for (double v : out) {
      if (!std::isfinite(v)) {
        throw_numeric("boundary map '" + boundary_.id() + "' is not finite at node " + std::to_string(i));
      }
      mag += v * v;
    }
    scale_ = std::max(scale_, std::sqrt(mag));
  }
  guard_ = std::min(rule_.guard_radius(), 1.0 - 1e-6);
  origin_ = value(Vec(static_cast<std::size_t>(rule_.dim), 0.0));
}

void Field::check_guard(VecView x) const {
  if (static_cast<int>(x.size()) != rule_.dim) throw_invalid("field evaluation: dimension mismatch");
  require_interior(x, "field evaluation");
  const double r = norm(x);
  if (r > guard_ + 1e-12) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "evaluation at |x| = %.10g exceeds the guard radius %.10g of the level-%d rule; "
                  "use level >= %d",
                  r, guard_, rule_.level, rule_.level_for_radius(std::min(r, 1.0 - 1e-6)));
    throw_guard(buf);
  }
}

double Field::kernel_mass(VecView x) const {
  check_guard(x);
  return hhm::kernel_mass(rule_, x);
}

Vec Field::value(VecView x) const {
  check_guard(x);
  const std::size_t n = x.size();
  const std::size_t m = static_cast<std::size_t>(target_dim());
  const double a = one_minus_norm2(x);
  const int e = rule_.dim - 1;
  Vec s = tree_sum(rule_.size(), m + 1, [&](std::size_t i, double* out) {
    const double* xi = rule_.nodes.data() + i * n;
    double b = 0.0;
    for (std::size_t k = 0; k < n; ++k) b += (x[k] - xi[k]) * (x[k] - xi[k]);
    if (b < 1e-24) kernel_singular(x);
    const double wp = rule_.weights[i] * ipow(a / b, e);
    out[0] = wp;
    const double* psi = psi_.data() + i * m;
    for (std::size_t k = 0; k < m; ++k) out[1 + k] = wp * psi[k];
  });
  Vec u(s.begin() + 1, s.end());
  if (options_.kernel_correction) {
    for (double& v : u) v /= s[0];
  }
  return u;
}

Matrix Field::analytic_jacobian(VecView x) const {
  check_guard(x);
  const std::size_t n = x.size();
  const std::size_t m = static_cast<std::size_t>(target_dim());
  const double a = one_minus_norm2(x);
  const int e = rule_.dim - 1;
  // Layout: S1 | grad S1 (n) | S_psi (m) | grad S_psi (m x n)
  const std::size_t width = 1 + n + m + m * n;
  Vec s = tree_sum(rule_.size(), width, [&](std::size_t i, double* out) {
    const double* xi = rule_.nodes.data() + i * n;
    double b = 0.0;
    for (std::size_t k = 0; k < n; ++k) b += (x[k] - xi[k]) * (x[k] - xi[k]);
    if (b < 1e-24) kernel_singular(x);
    const double wp = rule_.weights[i] * ipow(a / b, e);
    const double* psi = psi_.data() + i * m;
    out[0] = wp;
    for (std::size_t k = 0; k < n; ++k) {
      const double g = wp * static_cast<double>(e) * (-2.0 * x[k] / a - 2.0 * (x[k] - xi[k]) / b);
      out[1 + k] = g;
      for (std::size_t j = 0; j < m; ++j) out[1 + n + m + j * n + k] = g * psi[j];
    }
    for (std::size_t j = 0; j < m; ++j) out[1 + n + j] = wp * psi[j];
  });
  Matrix jac(m, n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const double g = s[1 + n + m + j * n + k];
      if (options_.kernel_correction) {
        const double u = s[1 + n + j] / s[0];
        jac(j, k) = (g - u * s[1 + k]) / s[0];
      } else {
        jac(j, k) = g;
      }
    }
  }
  return jac;
}

std::shared_ptr<Field> solve_dirichlet(BoundaryMap boundary, SphereRule rule, FieldOptions options) {
  return std::make_shared<Field>(std::move(boundary), std::move(rule), options);
}

MappingPtr make_mapping(const std::string& spec, const SphereRule& rule, FieldOptions options) {
  if (is_closed_form(spec)) return make_closed_form(spec, rule.dim);
  return solve_dirichlet(BoundaryMap::parse(spec, rule.dim), rule, options);
}

Vec hyperbolic_laplacian(const Mapping& f, VecView x, double h) {
  const std::size_t n = x.size();
  if (static_cast<int>(n) != f.dim()) throw_invalid("hyperbolic_laplacian: dimension mismatch");
  if (!(h > 0.0)) throw_invalid("hyperbolic_laplacian: step must be positive");
  if (!(norm(x) + 2.0 * h < 1.0)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "step h = %.6g too large for position |x| = %.10g", h, norm(x));
    throw_invalid(buf);
  }
  const std::size_t m = static_cast<std::size_t>(f.target_dim());
  const Vec f0 = f.value(x);
  Vec lap(m, 0.0), drift(m, 0.0);
  Vec y(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] + h;
    const Vec fp = f.value(y);
    y[i] = x[i] - h;
    const Vec fm = f.value(y);
    y[i] = x[i];
    for (std::size_t j = 0; j < m; ++j) {
      lap[j] += (fp[j] - 2.0 * f0[j] + fm[j]) / (h * h);
      drift[j] += x[i] * (fp[j] - fm[j]) / (2.0 * h);
    }
  }
  const double a = one_minus_norm2(x);
  Vec out(m);
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = a * a * lap[j] + 2.0 * (static_cast<double>(n) - 2.0) * a * drift[j];
  }
  return out;
}

Pullback::Pullback(MappingPtr base, MoebiusMap map) : base_(std::move(base)), map_(std::move(map)) {
  if (!base_) throw_invalid("pullback of a null map");
  if (static_cast<int>(map_.w.size()) != base_->dim() ||
      static_cast<int>(map_.rotation.rows()) != base_->dim() ||
      map_.rotation.cols() != map_.rotation.rows()) {
    throw_invalid("pullback: Moebius map dimension does not match the field");
  }
  require_interior(map_.w, "pullback");
  const Matrix check = map_.rotation.transpose() * map_.rotation;
  if (check.max_abs_diff(Matrix::identity(check.rows())) > 1e-10) {
    throw_invalid("pullback: rotation matrix is not orthogonal");
  }
}

Matrix Pullback::analytic_jacobian(VecView x) const {
  const Matrix outer = base_->analytic_jacobian(map_(x));
  return outer * (map_.rotation * moebius_phi_jacobian(map_.w, x));
}

double Pullback::guard_radius() const {
  // sup_{|x| = r} |phi_w(x)| = (r + |w|)/(1 + r|w|)
  const double g = base_->guard_radius();
  const double a = norm(map_.w);
  if (a >= g) return 0.0;
  return (g - a) / (1.0 - g * a);
}

MappingPtr pullback(MappingPtr base, VecView w, const Matrix& rotation) {
  return std::make_shared<Pullback>(std::move(base), MoebiusMap{Vec(w.begin(), w.end()), rotation});
}

}  // namespace hhm
