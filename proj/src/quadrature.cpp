#include "hhm/quadrature.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hhm/errors.hpp"
#include "hhm/sampling.hpp"

namespace hhm {

namespace {

constexpr const char* kRuleMagic = "hhm-sphere-rule";
constexpr int kRuleFormatVersion = 1;

double sphere_area(int n) {
  // |S^{n-1}| = n |B^n|
  return n * unit_ball_volume(n);
}

}  // namespace

double SphereRule::spacing() const {
  if (dim <= 3) return 2.0 * std::numbers::pi / std::ldexp(1.0, level);
  return std::pow(sphere_area(dim) / static_cast<double>(size()), 1.0 / (dim - 1));
}

double SphereRule::guard_radius() const {
  return std::min(1.0 - 4.0 * spacing(), 1.0 - 1e-6);
}

int SphereRule::level_for_radius(double r) const {
  SphereRule probe = *this;
  for (int l = level; l < 40; ++l) {
    probe.level = l;
    if (dim <= 3) {
      if (1.0 - 4.0 * probe.spacing() > r) return l;
    } else {
      const double count = std::ldexp(1.0, l) * blocks;
      const double s = std::pow(sphere_area(dim) / count, 1.0 / (dim - 1));
      if (1.0 - 4.0 * s > r) return l;
    }
  }
  return 40;
}

void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  if (m < 1) throw_invalid("gauss_legendre: need at least one node");
  nodes.assign(static_cast<std::size_t>(m), 0.0);
  weights.assign(static_cast<std::size_t>(m), 0.0);
  if (m == 1) {
    weights[0] = 2.0;
    return;
  }
  // Legendre P_m and its derivative at x by the three-term recurrence.
  auto legendre = [m](double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = m * (x * p1 - p0) / (x * x - 1.0);
  };
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[m - 1 - i] = x;
    weights[i] = w;
    weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) nodes[m / 2] = 0.0;
}

SphereRule sphere_rule(int n, int level, std::uint64_t seed) {
  if (n < 2) throw_invalid("sphere_rule: dimension must be >= 2");
  if (level < 1) throw_invalid("sphere_rule: level must be >= 1");
  if (level > 24) throw_invalid("sphere_rule: level above 24 unsupported");
  SphereRule rule;
  rule.dim = n;
  rule.level = level;
  if (n == 2) {
    const std::size_t count = std::size_t{1} << level;
    rule.nodes.resize(2 * count);
    rule.weights.assign(count, 1.0 / static_cast<double>(count));
    for (std::size_t k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      rule.nodes[2 * k] = std::cos(t);
      rule.nodes[2 * k + 1] = std::sin(t);
    }
  } else if (n == 3) {
    const int m = 1 << (level - 1);
    const std::size_t az = std::size_t{1} << level;
    std::vector<double> t, w;
    gauss_legendre(m, t, w);
    rule.nodes.reserve(3 * az * m);
    rule.weights.reserve(az * m);
    for (int i = 0; i < m; ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - t[i] * t[i]));
      for (std::size_t k = 0; k < az; ++k) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(az);
        rule.nodes.push_back(s * std::cos(phi));
        rule.nodes.push_back(s * std::sin(phi));
        rule.nodes.push_back(t[i]);
        rule.weights.push_back(0.5 * w[i] / static_cast<double>(az));
      }
    }
  } else {
    if (n > SobolSequence::kMaxDim) throw_invalid("sphere_rule: dimension above 16 unsupported");
    rule.blocks = kQmcBlocks;
    rule.seed = seed;
    const std::size_t per_block = std::size_t{1} << level;
    const std::size_t count = per_block * kQmcBlocks;
    rule.nodes.reserve(count * n);
    rule.weights.assign(count, 1.0 / static_cast<double>(count));
    for (int b = 0; b < kQmcBlocks; ++b) {
      SobolSequence seq(n, seed * 1000003ULL + static_cast<std::uint64_t>(b) + 1);
      Vec u(static_cast<std::size_t>(n));
      for (std::size_t i = 0; i < per_block; ++i) {
        seq.next(u);
        const Vec p = uniform_to_sphere(u, n);
        rule.nodes.insert(rule.nodes.end(), p.begin(), p.end());
      }
    }
  }
  return rule;
}

Vec integrate_sphere(const SphereRule& rule, std::size_t width, const SphereIntegrand& f) {
  std::vector<double> values(rule.size() * width);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    std::span<double> out(values.data() + i * width, width);
    f(rule.node(i), out);
    for (double v : out)
      if (!std::isfinite(v))
        throw_numeric("integrate_sphere: non-finite integrand at node " + std::to_string(i));
  }
  return tree_sum(rule.size(), width, [&](std::size_t i, double* out) {
    for (std::size_t k = 0; k < width; ++k) out[k] = rule.weights[i] * values[i * width + k];
  });
}

double integrate_sphere(const SphereRule& rule,
                        const std::function<double(std::span<const double>)>& f) {
  return integrate_sphere(rule, 1, [&](std::span<const double> xi, std::span<double> out) {
    out[0] = f(xi);
  })[0];
}

SphereIntegral integrate_sphere_with_error(
    const SphereRule& rule, const std::function<double(std::span<const double>)>& f) {
  SphereIntegral res;
  res.value = integrate_sphere(rule, f);
  if (rule.deterministic() || rule.blocks < 2) return res;
  const std::size_t per_block = rule.size() / static_cast<std::size_t>(rule.blocks);
  std::vector<double> means(static_cast<std::size_t>(rule.blocks));
  for (int b = 0; b < rule.blocks; ++b) {
    const std::size_t off = static_cast<std::size_t>(b) * per_block;
    means[b] = tree_sum(per_block, 1, [&](std::size_t i, double* out) {
                 out[0] = f(rule.node(off + i));
               })[0] /
               static_cast<double>(per_block);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= rule.blocks;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (rule.blocks - 1);
  res.error = std::sqrt(var / rule.blocks);
  return res;
}

SphereIntegral integrate_sphere_refined(int n, int level, std::uint64_t seed,
                                        const std::function<double(std::span<const double>)>& f) {
  const SphereRule fine = sphere_rule(n, level, seed);
  SphereIntegral res = integrate_sphere_with_error(fine, f);
  double diff = 0.0;
  if (level > 1) diff = std::abs(res.value - integrate_sphere(sphere_rule(n, level - 1, seed), f));
  res.error = std::max({res.error, diff, 64.0 * std::numeric_limits<double>::epsilon() *
                                             std::abs(res.value)});
  return res;
}

BallRule ball_rule(int n, int radial_points, int sphere_level, std::uint64_t seed) {
  BallRule rule;
  rule.dim = n;
  std::vector<double> t, w;
  gauss_legendre(radial_points, t, w);
  rule.radial_nodes.resize(t.size());
  rule.radial_weights.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    rule.radial_nodes[i] = 0.5 * (t[i] + 1.0);
    rule.radial_weights[i] = 0.5 * w[i];
  }
  rule.angular = sphere_rule(n, sphere_level, seed);
  return rule;
}

double integrate_ball(const BallRule& rule, const EuclideanBall& region,
                      const std::function<double(std::span<const double>)>& f, Measure measure) {
  const int n = rule.dim;
  if (region.center.size() != static_cast<std::size_t>(n))
    throw_invalid("integrate_ball: region dimension does not match the rule");
  if (!(region.radius > 0.0)) throw_invalid("integrate_ball: region radius must be positive");
  if (measure == Measure::Invariant && norm(region.center) + region.radius > 1.0 - 1e-6)
    throw_guard("integrate_ball: region reaches the unit sphere; tau density diverges there");
  const std::size_t na = rule.angular.size();
  const std::size_t count = rule.radial_nodes.size() * na;
  Vec y(static_cast<std::size_t>(n));
  const double scale = n * std::pow(region.radius, n);
  return scale * tree_sum(count, 1, [&](std::size_t idx, double* out) {
           const std::size_t ri = idx / na;
           const std::size_t ai = idx % na;
           const double s = rule.radial_nodes[ri];
           const auto xi = rule.angular.node(ai);
           double y2 = 0.0;
           for (int k = 0; k < n; ++k) {
             y[k] = region.center[k] + region.radius * s * xi[k];
             y2 += y[k] * y[k];
           }
           double v = f(y);
           if (measure == Measure::Invariant) v /= std::pow(1.0 - y2, n);
           if (!std::isfinite(v))
             throw_numeric("integrate_ball: non-finite integrand at node " + std::to_string(idx));
           out[0] = rule.radial_weights[ri] * std::pow(s, n - 1) * rule.angular.weights[ai] * v;
         })[0];
}

BallNodes ball_nodes(const BallRule& rule, const EuclideanBall& region, Measure measure) {
  const int n = rule.dim;
  if (region.center.size() != static_cast<std::size_t>(n))
    throw_invalid("ball_nodes: region dimension does not match the rule");
  if (!(region.radius > 0.0)) throw_invalid("ball_nodes: region radius must be positive");
  if (measure == Measure::Invariant && norm(region.center) + region.radius > 1.0 - 1e-6)
    throw_guard("ball_nodes: region reaches the unit sphere; tau density diverges there");
  const std::size_t na = rule.angular.size();
  const std::size_t count = rule.radial_nodes.size() * na;
  const double scale = n * std::pow(region.radius, n);
  BallNodes out;
  out.dim = n;
  out.points.resize(count * static_cast<std::size_t>(n));
  out.weights.resize(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const std::size_t ri = idx / na;
    const std::size_t ai = idx % na;
    const double s = rule.radial_nodes[ri];
    const auto xi = rule.angular.node(ai);
    double* y = out.points.data() + idx * static_cast<std::size_t>(n);
    double y2 = 0.0;
    for (int k = 0; k < n; ++k) {
      y[k] = region.center[k] + region.radius * s * xi[k];
      y2 += y[k] * y[k];
    }
    double w = scale * rule.radial_weights[ri] * std::pow(s, n - 1) * rule.angular.weights[ai];
    if (measure == Measure::Invariant) w /= std::pow(1.0 - y2, n);
    out.weights[idx] = w;
  }
  return out;
}

std::string serialize_rule(const SphereRule& rule) {
  std::ostringstream os;
  char buf[64];
  os << kRuleMagic << ' ' << kRuleFormatVersion << '\n'
     << "dim " << rule.dim << '\n'
     << "level " << rule.level << '\n'
     << "blocks " << rule.blocks << '\n'
     << "seed " << rule.seed << '\n'
     << "count " << rule.size() << '\n';
  for (std::size_t i = 0; i < rule.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", rule.weights[i]);
    os << buf;
    for (double c : rule.node(i)) {
      std::snprintf(buf, sizeof buf, " %.17g", c);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

SphereRule parse_rule(const std::string& text) {
  std::istringstream is(text);
  std::string magic, key;
  int version = 0;
  if (!(is >> magic >> version) || magic != kRuleMagic)
    throw_invalid("parse_rule: not a sphere rule file");
  if (version != kRuleFormatVersion)
    throw_invalid("parse_rule: unsupported rule format version " + std::to_string(version));
  SphereRule rule;
  std::size_t count = 0;
  auto expect = [&](const char* name, auto& value) {
    if (!(is >> key >> value) || key != name)
      throw_invalid(std::string("parse_rule: expected field '") + name + "'");
  };
  expect("dim", rule.dim);
  expect("level", rule.level);
  expect("blocks", rule.blocks);
  expect("seed", rule.seed);
  expect("count", count);
  if (rule.dim < 2 || rule.blocks < 1) throw_invalid("parse_rule: invalid header");
  rule.weights.resize(count);
  rule.nodes.resize(count * static_cast<std::size_t>(rule.dim));
  for (std::size_t i = 0; i < count; ++i) {
    if (!(is >> rule.weights[i])) throw_invalid("parse_rule: truncated node table");
    for (int k = 0; k < rule.dim; ++k)
      if (!(is >> rule.nodes[i * rule.dim + k])) throw_invalid("parse_rule: truncated node table");
  }
  for (std::size_t i = 0; i < count; ++i)
    if (std::abs(norm(rule.node(i)) - 1.0) > 1e-14)
      throw_invalid("parse_rule: node " + std::to_string(i) + " is not on the unit sphere");
  return rule;
}

void save_rule(const SphereRule& rule, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_invalid("save_rule: cannot open " + path);
  out << serialize_rule(rule);
  if (!out) throw_invalid("save_rule: write failed for " + path);
}

SphereRule load_rule(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_invalid("load_rule: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rule(ss.str());
}

SphereRule cached_sphere_rule(int n, int level, std::uint64_t seed, const std::string& cache_dir) {
  if (cache_dir.empty()) return sphere_rule(n, level, seed);
  namespace fs = std::filesystem;
  const fs::path file = fs::path(cache_dir) / ("sphere_n" + std::to_string(n) + "_l" +
                                               std::to_string(level) + "_s" +
                                               std::to_string(n >= 4 ? seed : 0) + ".txt");
  std::error_code ec;
  if (fs::exists(file, ec)) {
    SphereRule r = load_rule(file.string());
    if (r.dim == n && r.level == level) return r;
  }
  SphereRule rule = sphere_rule(n, level, seed);
  if (fs::is_directory(cache_dir, ec)) save_rule(rule, file.string());
  return rule;
}

}  // namespace hhm
