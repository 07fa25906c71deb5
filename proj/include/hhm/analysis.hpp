#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hhm/linalg.hpp"
#include "hhm/mapping.hpp"
#include "hhm/quadrature.hpp"

namespace hhm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class DiffMode { Auto, Analytic, FiniteDifference };

// First-derivative step: min(1e-4, (1 - |x|)/100).
double fd_step(VecView x);

// Df(x), (target_dim x dim), rows are component gradients. Auto uses the
// analytic form when the map has one.
Matrix jacobian(const Mapping& f, VecView x, DiffMode mode = DiffMode::Auto);

// Largest singular value.
double operator_norm(const Matrix& a);

// (1 - |x|^2) grad f_j(x), component j 0-based.
Vec hyperbolic_gradient(const Mapping& f, int component, VecView x, DiffMode mode = DiffMode::Auto);

// Values g(r xi_i) for every node of the rule, evaluated in parallel.
Vec sphere_samples(const SphereRule& rule, double r, const std::function<double(VecView)>& g);

// (sum_i w_i v_i^p)^(1/p), or max_i v_i for p = infinity.
double power_mean(const SphereRule& rule, const Vec& values, double p);

// M_p(r, f) = (int |f(r xi)|^p dsigma)^(1/p); p = infinity takes the node max.
double integral_mean(const Mapping& f, double r, double p, const SphereRule& rule);

// M_p(r, ||Df||).
double derivative_mean(const Mapping& f, double r, double p, const SphereRule& rule,
                       DiffMode mode = DiffMode::Auto);

// r_i = 1 - 2^(-i/4), i = 0..count, truncated at cap; cap itself is appended
// when it lies beyond the last kept radius.
std::vector<double> radii_schedule(int count, double cap);

struct GridSpec {
  int radii = 28;
  double cap = 1.0;  // further limited by the map's guard radius
  int sphere_level = 6;
  std::uint64_t seed = 0;
  bool polish = true;
};

// An estimate of a supremum from below.
struct NormEstimate {
  std::string functional;
  std::string params;
  double value = 0.0;
  double origin_part = 0.0;     // |f(0)| where the functional includes it
  double seminorm_part = 0.0;
  std::vector<double> radii;
  std::vector<double> history;  // running maximum after each radius, then after polishing
  int sphere_level = 0;
  Vec argmax;
  bool polished = false;
};

NormEstimate hardy_norm(const Mapping& f, double p, const std::vector<double>& radii,
                        const SphereRule& rule);

// sup ||Df(x)|| (1 - |x|^2); value is the seminorm, origin_part holds |f(0)|
// so the full norm is origin_part + value.
NormEstimate bloch_seminorm(const Mapping& f, const GridSpec& grid);

class Majorant {
 public:
  // id | power:gamma=g (0 < g <= 1) | log   with log: t (1 + log(1 + 1/t))
  static Majorant parse(const std::string& spec);

  double operator()(double t) const;
  const std::string& id() const { return id_; }

 private:
  enum class Kind { Identity, Power, Log };
  Kind kind_ = Kind::Identity;
  double gamma_ = 1.0;
  std::string id_ = "id";
};

struct BlochParams {
  double p = kInfinity;
  double alpha = 1.0;
  double beta = 0.0;
  double a = 2.0;
  Majorant omega;

  // a > 1 if beta <= 0, a >= e^(beta/alpha) if beta > 0; p > 0; alpha > 0.
  void validate() const;
  std::string describe() const;
};

// (1 - r)^alpha (log(a/(1 - r)))^beta
double phi_weight(const BlochParams& params, double r);

// |f(0)| + sup_r M_p(r, ||Df||) omega(phi(r)).
NormEstimate generalized_bloch_norm(const Mapping& f, const BlochParams& params, const GridSpec& grid);

// Samples r xi_i for the grid's sphere rule (shared with verify).
SphereRule grid_sphere(int dim, const GridSpec& grid);

}  // namespace hhm
