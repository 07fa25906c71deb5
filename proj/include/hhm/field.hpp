#pragma once

#include <memory>
#include <string>

#include "hhm/boundary.hpp"
#include "hhm/geometry.hpp"
#include "hhm/mapping.hpp"
#include "hhm/quadrature.hpp"

namespace hhm {

// ((1 - |x|^2) / |x - xi|^2)^(n-1). Throws GuardError when |x - xi| < 1e-12.
double poisson_kernel(VecView x, VecView xi);

// Sum_i w_i P_h(x, xi_i): equals 1 for an exact rule.
double kernel_mass(const SphereRule& rule, VecView x);

struct FieldOptions {
  // Divide by the discrete kernel mass so that constants are reproduced exactly.
  bool kernel_correction = true;
};

// u = P_h[psi] as the discrete Poisson integral over a sphere rule.
class Field : public Mapping {
 public:
  Field(BoundaryMap boundary, SphereRule rule, FieldOptions options = {});

  int dim() const override { return rule_.dim; }
  int target_dim() const override { return boundary_.target_dim(); }
  std::string id() const override { return boundary_.id(); }
  Vec value(VecView x) const override;
  bool has_analytic_jacobian() const override { return true; }
  Matrix analytic_jacobian(VecView x) const override;
  double guard_radius() const override { return guard_; }

  const BoundaryMap& boundary() const { return boundary_; }
  const SphereRule& rule() const { return rule_; }
  const FieldOptions& options() const { return options_; }
  void set_kernel_correction(bool on) { options_.kernel_correction = on; }

  const Vec& value_at_origin() const { return origin_; }
  // max_i |psi(xi_i)|, the natural scale of the field.
  double scale() const { return scale_; }
  double kernel_mass(VecView x) const;

 private:
  void check_guard(VecView x) const;

  BoundaryMap boundary_;
  SphereRule rule_;
  FieldOptions options_;
  std::vector<double> psi_;  // size() * target_dim
  Vec origin_;
  double scale_ = 0.0;
  double guard_ = 0.0;
};

std::shared_ptr<Field> solve_dirichlet(BoundaryMap boundary, SphereRule rule,
                                       FieldOptions options = {});

// Builds a map from a spec: closed-form ids (see closed_form.hpp) or a
// boundary registry entry solved on `rule`.
MappingPtr make_mapping(const std::string& spec, const SphereRule& rule, FieldOptions options = {});

// Delta_h f(x) = (1-|x|^2)^2 Laplace f + 2(n-2)(1-|x|^2) sum_i x_i d_i f, by
// central differences with step h. Requires |x| + 2h < 1.
Vec hyperbolic_laplacian(const Mapping& f, VecView x, double h);

// x -> base(A phi_w(x)).
class Pullback : public Mapping {
 public:
  Pullback(MappingPtr base, MoebiusMap map);

  int dim() const override { return base_->dim(); }
  int target_dim() const override { return base_->target_dim(); }
  std::string id() const override { return base_->id() + " o moebius"; }
  Vec value(VecView x) const override { return base_->value(map_(x)); }
  bool has_analytic_jacobian() const override { return base_->has_analytic_jacobian(); }
  // Chain rule through the closed-form Jacobian of phi_w.
  Matrix analytic_jacobian(VecView x) const override;
  double guard_radius() const override;

  const MoebiusMap& map() const { return map_; }

 private:
  MappingPtr base_;
  MoebiusMap map_;
};

MappingPtr pullback(MappingPtr base, VecView w, const Matrix& rotation);

}  // namespace hhm
