#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hhm/linalg.hpp"
#include "hhm/quadrature.hpp"

namespace hhm {

enum class Interpolation { Nearest, Linear };

// Continuous boundary data psi: S^{n-1} -> R^m.
//
// Registry (spec strings, indices are 1-based):
//   const[:c=v1,v2,...]          constant vector (default 1)
//   coord:j=J                    xi_J
//   identity[:scale=s]           s * xi
//   trig:k=K:component=cos|sin|both     n = 2 only: cos K theta, sin K theta
//   product:i=I:j=J              xi_I * xi_J
//   bump[:width=w][:gamma=g][:height=h][:center=c1,c2,...]
//                                h * max(0, 1 - |xi - c|/w)^g, Hoelder modulus t^g
//   perturb:eps=E                n = 2 only: conj-quadratic perturbation of
//                                the identity, boundary trace of z + E conj(z)^2
//   table:values=FILE:rule=FILE[:interp=nearest|linear]
//                                samples on a serialised sphere rule
class BoundaryMap {
 public:
  using Fn = std::function<void(VecView xi, std::span<double> out)>;

  BoundaryMap(int dim, int target_dim, std::string id, Fn fn);

  static BoundaryMap parse(const std::string& spec, int dim);
  static BoundaryMap tabulated(SphereRule rule, std::vector<Vec> values, Interpolation interp,
                               std::string id);
  // Reads "index v1 v2 ..." rows ('#' comments) bound to `rule`.
  static BoundaryMap from_table(const std::string& table_text, SphereRule rule,
                                Interpolation interp, std::string id);

  int dim() const { return dim_; }
  int target_dim() const { return target_dim_; }
  const std::string& id() const { return id_; }

  Vec operator()(VecView xi) const;
  void evaluate(VecView xi, std::span<double> out) const { fn_(xi, out); }

 private:
  int dim_;
  int target_dim_;
  std::string id_;
  Fn fn_;
};

// The registry entries exercised by the test and verification suites for a
// given dimension.
std::vector<std::string> registry_boundary_specs(int dim);

}  // namespace hhm
