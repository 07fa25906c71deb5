#include "hhm/geometry.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hhm/errors.hpp"

namespace hhm {

namespace {

// 4-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 4> kGl4Nodes = {
    0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563,
    0.5 + 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.8611363115940526};
constexpr std::array<double, 4> kGl4Weights = {
    0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
    0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};

// 1 - |z| is concave along a segment, so its minimum sits at an endpoint;
// panels no longer than 5% of that distance keep the 4-point rule accurate
// to about 1e-13 relative, too little for the optimiser to exploit.
// Integral of ds/(1 - sqrt(delta^2 + s^2)) over s in [lo, hi], 0 <= lo < hi. With
// s = delta sinh(u) the radius delta cosh(u) is smooth even when delta is tiny.
double radial_piece(double delta, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (1.0 - std::hypot(delta, hi) <= 0.0) return std::numeric_limits<double>::infinity();
  if (delta < 1e-300) return std::log1p(-lo) - std::log1p(-hi);
  double u = std::asinh(lo / delta);
  const double ub = std::asinh(hi / delta);
  const auto step_at = [delta](double v) {
    const double r = delta * std::cosh(v);
    return std::min(0.1, 0.02 * (1.0 - r) / std::max(r, 1e-300));
  };
  double s = 0.0;
  for (int panels = 0; u < ub && panels < 100000; ++panels) {
    double h = std::min(step_at(u), ub - u);
    h = std::min(h, step_at(u + h));
    for (int q = 0; q < 4; ++q) {
      const double r = delta * std::cosh(u + kGl4Nodes[q] * h);
      s += h * kGl4Weights[q] * r / (1.0 - r);
    }
    u = (ub - u - h <= 1e-15 * ub) ? ub : u + h;
  }
  return s;
}

double segment_length(VecView a, VecView b) {
  const std::size_t n = a.size();
  const double len = distance(a, b);
  if (len == 0.0) return 0.0;
  double sa = 0.0;
  for (std::size_t i = 0; i < n; ++i) sa += a[i] * (b[i] - a[i]) / len;
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = a[i] - sa * (b[i] - a[i]) / len;
    d2 += c * c;
  }
  const double delta = std::sqrt(d2), sb = sa + len;
  if (sa >= 0.0) return radial_piece(delta, sa, sb);
  if (sb <= 0.0) return radial_piece(delta, -sb, -sa);
  return radial_piece(delta, 0.0, -sa) + radial_piece(delta, 0.0, sb);
}

int round_up_pow2(int v) {
  int p = 4;
  while (p < v) p *= 2;
  return p;
}

}  // namespace

void require_interior(VecView x, const char* where) {
  if (x.size() < 2) throw_invalid(std::string(where) + ": dimension must be >= 2");
  if (!all_finite(x)) throw_invalid(std::string(where) + ": non-finite coordinates");
  if (norm(x) >= 1.0) throw_invalid(std::string(where) + ": point outside the open unit ball");
}

void require_boundary(VecView xi, const char* where) {
  if (std::abs(norm(xi) - 1.0) > kBoundaryTolerance)
    throw_invalid(std::string(where) + ": boundary point must have |xi| = 1");
}

bool near_boundary(VecView x) { return norm(x) > kNearBoundaryRadius; }

namespace {
std::atomic<std::size_t> g_precision_warnings{0};

void check_precision(VecView a, VecView b) {
  if (near_boundary(a) || near_boundary(b)) note_precision_warning();
}
}  // namespace

void note_precision_warning() { g_precision_warnings.fetch_add(1); }
std::size_t precision_warning_count() { return g_precision_warnings.load(); }
void reset_precision_warnings() { g_precision_warnings.store(0); }

bool EuclideanBall::contains(VecView z) const { return distance(z, center) < radius; }

double bracket(VecView x, VecView w) {
  require_same_dim(x, w, "bracket");
  const double v = 1.0 - 2.0 * dot(x, w) + norm2(x) * norm2(w);
  return std::sqrt(std::max(0.0, v));
}

Vec moebius_phi(VecView w, VecView x) {
  require_same_dim(w, x, "moebius_phi");
  check_precision(w, x);
  const std::size_t n = x.size();
  const double w2 = norm2(w);
  const Vec d = sub(x, w);
  const double d2 = norm2(d);
  const double b = bracket(x, w);
  const double b2 = b * b;
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (d2 * w[i] - (1.0 - w2) * d[i]) / b2;
  return out;
}

Matrix moebius_phi_jacobian(VecView w, VecView x) {
  require_same_dim(x, w, "moebius_phi_jacobian");
  const std::size_t n = x.size();
  const double w2 = norm2(w);
  const double d = 1.0 - 2.0 * dot(x, w) + norm2(x) * w2;
  const Vec xw = sub(x, w);
  const double xw2 = norm2(xw);
  Vec num(n);
  for (std::size_t i = 0; i < n; ++i) num[i] = xw2 * w[i] - (1.0 - w2) * xw[i];
  Matrix jac(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dn = 2.0 * w[i] * xw[j] - (i == j ? 1.0 - w2 : 0.0);
      const double dd = 2.0 * (w2 * x[j] - w[j]);
      jac(i, j) = dn / d - num[i] * dd / (d * d);
    }
  }
  return jac;
}

MoebiusMap MoebiusMap::random(std::size_t dim, double max_radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec w(dim);
  for (auto& v : w) v = gauss(rng);
  const double radius = max_radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
  const double len = norm(w);
  for (auto& v : w) v *= radius / len;
  return {std::move(w), random_orthogonal(dim, seed)};
}

Vec MoebiusMap::operator()(VecView x) const { return rotation.apply(moebius_phi(w, x)); }

double pseudo_hyperbolic(VecView x, VecView w) {
  require_same_dim(x, w, "pseudo_hyperbolic");
  const double b = bracket(x, w);
  if (b == 0.0) return 1.0;
  return distance(x, w) / b;
}

double hyperbolic_distance(VecView x, VecView y) {
  check_precision(x, y);
  const double t = pseudo_hyperbolic(x, y);
  if (t >= 1.0 - 1e-15)
    throw_guard("hyperbolic_distance: |phi_y(x)| within 1e-15 of 1, precision lost");
  return 2.0 * std::atanh(t);
}

EuclideanBall pseudo_ball(VecView w, double r) {
  if (!(r > 0.0 && r < 1.0)) throw_invalid("pseudo_ball: radius must lie in (0, 1)");
  const double w2 = norm2(w);
  const double denom = 1.0 - w2 * r * r;
  return {scaled(w, (1.0 - r * r) / denom), (1.0 - w2) / denom * r};
}

double relative_distance(VecView x, VecView y) {
  require_same_dim(x, y, "relative_distance");
  check_precision(x, y);
  const double d = std::min(1.0 - norm(x), 1.0 - norm(y));
  return distance(x, y) / d;
}

double quasihyperbolic_path_length(const std::vector<Vec>& path) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) total += segment_length(path[i], path[i + 1]);
  return total;
}

std::vector<Vec> hyperbolic_geodesic(VecView x, VecView y, int segments) {
  const Vec z = moebius_phi(x, y);
  const double t = norm(z);
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(segments) + 1);
  const double total = std::atanh(t);
  for (int i = 0; i <= segments; ++i) {
    if (i == 0) {
      pts.emplace_back(x.begin(), x.end());
    } else if (i == segments) {
      pts.emplace_back(y.begin(), y.end());
    } else {
      const double s = std::tanh(total * i / segments);
      pts.push_back(moebius_phi(x, scaled(z, t > 0.0 ? s / t : 0.0)));
    }
  }
  return pts;
}

QuasihyperbolicEstimate quasihyperbolic_distance(VecView x, VecView y,
                                                 const QuasihyperbolicOptions& opts) {
  require_same_dim(x, y, "quasihyperbolic_distance");
  require_interior(x, "quasihyperbolic_distance");
  require_interior(y, "quasihyperbolic_distance");
  if (x.size() > 8) throw_invalid("quasihyperbolic_distance: dimension above 8 unsupported");

  QuasihyperbolicEstimate est;
  est.resolution = round_up_pow2(std::max(4, opts.resolution));
  est.lower = 0.5 * hyperbolic_distance(x, y);
  if (distance(x, y) == 0.0) {
    est.path = {Vec(x.begin(), x.end()), Vec(y.begin(), y.end())};
    est.level_values = {0.0};
    return est;
  }

  const std::size_t n = x.size();
  std::vector<Vec> path = hyperbolic_geodesic(x, y, 4);
  for (int segs = 4;; segs *= 2) {
    // Coordinate descent with a per-vertex step that halves on failure.
    std::vector<double> step(path.size(), 0.0);
    for (std::size_t i = 1; i + 1 < path.size(); ++i)
      step[i] = 0.25 * std::min(distance(path[i - 1], path[i]), distance(path[i], path[i + 1]));
    double length = quasihyperbolic_path_length(path);
    bool level_converged = false;
    Vec trial(n);
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      const double before = length;
      double max_step = 0.0;
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const Vec& prev = path[i - 1];
        const Vec& next = path[i + 1];
        double local = segment_length(prev, path[i]) + segment_length(path[i], next);
        bool improved = false;
        for (std::size_t k = 0; k < n; ++k) {
          for (double sign : {1.0, -1.0}) {
            trial = path[i];
            trial[k] += sign * step[i];
            if (norm(trial) >= 1.0) continue;
            const double c = segment_length(prev, trial) + segment_length(trial, next);
            if (c < local) {
              local = c;
              path[i] = trial;
              improved = true;
            }
          }
        }
        if (!improved) step[i] *= 0.5;
        max_step = std::max(max_step, step[i]);
      }
      length = quasihyperbolic_path_length(path);
      if (before - length <= opts.tolerance * length || max_step < 1e-12) {
        level_converged = true;
        break;
      }
    }
    est.converged = est.converged && level_converged;
    est.level_values.push_back(length);
    if (segs >= est.resolution) break;
    std::vector<Vec> finer;
    finer.reserve(2 * path.size() - 1);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      finer.push_back(path[i]);
      finer.push_back(scaled(add(path[i], path[i + 1]), 0.5));
    }
    finer.push_back(path.back());
    path = std::move(finer);
  }
  est.upper = est.level_values.back();
  if (est.level_values.size() >= 2) {
    const double coarse = est.level_values[est.level_values.size() - 2];
    est.richardson = est.upper - (coarse - est.upper) / 3.0;
  } else {
    est.richardson = est.upper;
  }
  est.path = std::move(path);
  return est;
}

double unit_ball_volume(int n) {
  const double h = 0.5 * n;
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

}  // namespace hhm
