#pragma once

#include <cstddef>
#include <vector>

#include "hhm/linalg.hpp"

namespace hhm {

// Points of the unit ball are plain coordinate vectors; dimension is the
// vector length. Interior points satisfy |x| < 1, boundary points |x| = 1.
inline constexpr double kBoundaryTolerance = 1e-12;
// Beyond this radius geometry results carry a precision warning.
inline constexpr double kNearBoundaryRadius = 1.0 - 1e-9;

void require_interior(VecView x, const char* where);
void require_boundary(VecView xi, const char* where);
bool near_boundary(VecView x);

// Geometry on points beyond kNearBoundaryRadius still returns a value but
// bumps a process-wide warning counter that callers (the CLI) report.
void note_precision_warning();
std::size_t precision_warning_count();
void reset_precision_warnings();

struct EuclideanBall {
  Vec center;
  double radius = 0.0;

  bool contains(VecView z) const;
};

// [x,w] = | |x| w - x/|x| |, evaluated through the symmetric expansion
// sqrt(1 - 2<x,w> + |x|^2 |w|^2), which is continuous at x = 0 (value 1).
double bracket(VecView x, VecView w);

// The involutive Moebius map of the ball exchanging w and 0.
Vec moebius_phi(VecView w, VecView x);
// Jacobian of x -> phi_w(x).
Matrix moebius_phi_jacobian(VecView w, VecView x);

// A general Moebius self-map x -> A phi_w(x) with A orthogonal.
struct MoebiusMap {
  Vec w;
  Matrix rotation;

  static MoebiusMap random(std::size_t dim, double max_radius, std::uint64_t seed);
  Vec operator()(VecView x) const;
};

// |phi_w(x)| = |x - w| / [x, w]
double pseudo_hyperbolic(VecView x, VecView w);

// rho(x, y) = log((1 + t)/(1 - t)) with t = |phi_y(x)|. Throws GuardError when
// t >= 1 - 1e-15.
double hyperbolic_distance(VecView x, VecView y);

// E(w, r) = { x : |phi_w(x)| < r } as a Euclidean ball.
EuclideanBall pseudo_ball(VecView w, double r);

// |x - y| / min(1 - |x|, 1 - |y|)
double relative_distance(VecView x, VecView y);

struct QuasihyperbolicOptions {
  int resolution = 256;      // path segments; rounded up to a power of two
  int max_sweeps = 400;      // per refinement level
  double tolerance = 1e-13;  // relative improvement per sweep that ends a level
};

struct QuasihyperbolicEstimate {
  double upper = 0.0;       // length of the best path found (>= k)
  double lower = 0.0;       // rho(x, y) / 2 (<= k)
  double richardson = 0.0;  // extrapolation from the last two levels
  int resolution = 0;
  bool converged = true;
  std::vector<double> level_values;  // best length after each level
  std::vector<Vec> path;             // vertices, path.front() == x, path.back() == y
};

// Quasihyperbolic length element 1/(1 - |z|) integrated along a polygon.
double quasihyperbolic_path_length(const std::vector<Vec>& path);

// Numerical k_B(x, y): polygon initialised on the hyperbolic geodesic and
// refined by coordinate descent over a doubling hierarchy of resolutions, so
// the upper bound is non-increasing in the resolution.
QuasihyperbolicEstimate quasihyperbolic_distance(VecView x, VecView y,
                                                 const QuasihyperbolicOptions& opts = {});

// Points of the hyperbolic geodesic from x to y at equal hyperbolic spacing.
std::vector<Vec> hyperbolic_geodesic(VecView x, VecView y, int segments);

// Lebesgue volume of the unit ball of R^n.
double unit_ball_volume(int n);

}  // namespace hhm
