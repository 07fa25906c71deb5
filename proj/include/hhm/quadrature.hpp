#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hhm/geometry.hpp"
#include "hhm/linalg.hpp"

namespace hhm {

// Quadrature on S^{n-1} for the normalised surface measure sigma.
//   n = 2: 2^level equally spaced angles.
//   n = 3: Gauss-Legendre in cos(polar) (2^(level-1) nodes) x 2^level azimuths.
//   n >= 4: `blocks` digitally shifted Sobol sets of 2^level points each, equal
//           weights; the spread of the block means gives a statistical error.
struct SphereRule {
  int dim = 0;
  int level = 0;
  int blocks = 1;
  std::uint64_t seed = 0;
  std::vector<double> nodes;    // size() * dim, row-major
  std::vector<double> weights;  // sums to 1

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return {nodes.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  bool deterministic() const { return dim <= 3; }
  // Characteristic distance between neighbouring nodes.
  double spacing() const;
  // Largest |x| at which the Poisson kernel (width ~ 1 - |x|) is still resolved:
  // spacing() < (1 - |x|)/4.
  double guard_radius() const;
  // Smallest level whose guard radius exceeds r (for error messages).
  int level_for_radius(double r) const;
};

inline constexpr int kQmcBlocks = 16;

SphereRule sphere_rule(int n, int level, std::uint64_t seed = 0);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights);

using SphereIntegrand = std::function<void(std::span<const double> node, std::span<double> out)>;

// Sum_i w_i f(xi_i) with deterministic pairwise summation; `width` values per
// node. Throws NumericError naming the node on a non-finite value.
Vec integrate_sphere(const SphereRule& rule, std::size_t width, const SphereIntegrand& f);
double integrate_sphere(const SphereRule& rule, const std::function<double(std::span<const double>)>& f);

struct SphereIntegral {
  double value = 0.0;
  double error = 0.0;  // one statistical sigma (0 for deterministic rules)
};
SphereIntegral integrate_sphere_with_error(const SphereRule& rule,
                                           const std::function<double(std::span<const double>)>& f);

// Refinement-based estimate: the value on `rule` and the difference with the
// rule one level coarser (floored at a few ulps of the value).
SphereIntegral integrate_sphere_refined(int n, int level, std::uint64_t seed,
                                        const std::function<double(std::span<const double>)>& f);

enum class Measure { Volume, Invariant };  // nu, and tau = nu / (1 - |x|^2)^n

// Radial Gauss-Legendre x angular sphere rule, centred on a Euclidean ball.
struct BallRule {
  int dim = 0;
  std::vector<double> radial_nodes;    // on [0, 1]
  std::vector<double> radial_weights;  // sum to 1 on [0, 1]
  SphereRule angular;
};

BallRule ball_rule(int n, int radial_points, int sphere_level, std::uint64_t seed = 0);

// Integral over `region` against nu (normalised so nu(B^n) = 1) or tau.
// Regions reaching within 1e-6 of the unit sphere are refused for tau.
double integrate_ball(const BallRule& rule, const EuclideanBall& region,
                      const std::function<double(std::span<const double>)>& f, Measure measure);

// The nodes and weights that integrate_ball would use, with the measure
// density and the scale folded into the weights (sum_i w_i f(y_i) = integral).
struct BallNodes {
  int dim = 0;
  std::vector<double> points;  // size() * dim
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};
BallNodes ball_nodes(const BallRule& rule, const EuclideanBall& region, Measure measure);

// Versioned text serialisation, 17 significant digits.
std::string serialize_rule(const SphereRule& rule);
SphereRule parse_rule(const std::string& text);
void save_rule(const SphereRule& rule, const std::string& path);
SphereRule load_rule(const std::string& path);

// Loads dir/sphere_n<dim>_l<level>_s<seed>.txt when present; otherwise builds
// the rule and, if the directory exists, stores it there. Empty dir disables
// the cache.
SphereRule cached_sphere_rule(int n, int level, std::uint64_t seed, const std::string& cache_dir);

}  // namespace hhm
