#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "hhm/analysis.hpp"
#include "hhm/field.hpp"
#include "hhm/geometry.hpp"
#include "hhm/mapping.hpp"

namespace hhm {

using Json = nlohmann::ordered_json;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class MarginKind { Absolute, Relative };

// One inequality (or stability requirement) evaluated over a sample census.
// margin is the worst rhs - lhs (absolute) or (rhs - lhs)/rhs (relative);
// pass <=> margin >= -tolerance. Informational parts never fail.
struct CheckPart {
  std::string name;
  MarginKind kind = MarginKind::Absolute;
  double margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  bool informational = false;
  Json details = Json::object();

  bool pass() const { return informational || margin >= -tolerance; }
  // Folds one sample into the worst margin.
  void record(double lhs, double rhs);
  void record_margin(double m) { margin = std::min(margin, m); ++samples; }
};

struct CheckReport {
  std::string check_id;
  std::string field_id;
  int dim = 0;
  std::uint64_t seed = 0;
  Json params = Json::object();
  std::vector<CheckPart> parts;
  Json census = Json::object();
  std::string skip_reason;  // non-empty: the check does not apply to this field

  // min over asserted parts of margin + tolerance (so pass <=> margin >= 0).
  double margin() const;
  bool pass() const;
  bool skipped() const { return !skip_reason.empty(); }
  std::size_t samples() const;
  std::string verdict() const;  // pass | fail | skip
};

Json to_json(const CheckPart& part);
Json to_json(const CheckReport& report);

// Mean oscillation bound: for r < 1 - |x| (and inside the guard)
//   (1/|B(x,r)|) int_{B(x,r)} |u(y) - u(x)| dnu <= n N / (2 - alpha) * r / omega(r^alpha)
// with N = ||u|| in the generalized Bloch space with p = infinity, beta = 0.
struct OscillationOptions {
  std::vector<double> alphas{1.0, 1.5};
  std::vector<std::string> majorants{"id", "power:gamma=0.5"};
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  int radial_points = 12;
  int angular_level = 0;  // 0: by dimension
  GridSpec grid;
  double tolerance = 1e-9;
};
CheckReport check_oscillation(const Mapping& u, const OscillationOptions& opts);

// |u(x) - u(y)| <= (sqrt(n)/2) ||u||_B rho(x, y) (1 + rel), and the special case
// |u(z) - u(0)| <= (||u||^B / 2) log((1+|z|)/(1-|z|)).
struct BlochLipschitzOptions {
  std::size_t pairs = 10000;
  std::size_t boundary_pairs = 256;  // x on |x| = 0.99 guard
  std::size_t origin_points = 1000;
  std::uint64_t seed = 0;
  GridSpec grid;
  double rel_tolerance = 1e-6;
};
CheckReport check_bloch_lipschitz(const Mapping& u, const BlochLipschitzOptions& opts);

// M_p(r, u) <= |u(0)| + (log a)^beta N / omega((log a)^beta) * int_0^r ds / phi(s).
struct IntegralMeanOptions {
  std::vector<BlochParams> params;  // empty: three default sets
  std::vector<double> ps{1.0, 2.0, kInfinity};
  int radii = 20;
  std::uint64_t seed = 0;
  GridSpec grid;
  double rel_tolerance = 1e-6;
};
std::vector<BlochParams> default_integral_mean_params();
// int_0^r ds / phi(s) by composite Gauss-Legendre in v = -log(1 - s).
double inverse_phi_integral(const BlochParams& params, double r);
CheckReport check_integral_mean(const Mapping& u, const IntegralMeanOptions& opts);

// Growth fit: slope of log M_q(r, ||Du||) against -log(1 - r) is at most
// alpha + 1 + (n-1)/p + slack, where alpha is the growth exponent of M_p(r, u).
struct DerivativeGrowthOptions {
  double p = 2.0;
  double alpha = kNaN;  // NaN: use the fitted exponent of M_p(r, u)
  std::vector<double> qs{1.0, 2.0, kInfinity};
  double r_min = 0.5;
  double r_max = 1.0 - 1.0 / 4096.0;
  int points = 24;
  int sphere_level = 0;  // 0: by dimension
  std::uint64_t seed = 0;
  double slack = 0.2;
  double q_spread = 0.3;
  bool assert_q_spread = true;
};
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms
};
SlopeFit fit_log_slope(const std::vector<double>& radii, const std::vector<double>& values);
CheckReport check_derivative_growth(const Mapping& u, const DerivativeGrowthOptions& opts);

// Quasihyperbolic comparison for injective self-maps of the ball given by a
// Poisson field: the image-side path integral int ||Du|| / d_img(u(z)) |dz|
// along the optimised k_B path, divided by k_B(x, y).
struct WubOptions {
  std::size_t pairs = 16;
  std::size_t wub_pairs = 2000;    // pairs with r_B <= 1/2 for mu_02
  std::size_t mu07_points = 64;
  std::size_t lipschitz_points = 2000;
  std::uint64_t seed = 0;
  int path_resolution = 32;
  int boundary_level = 0;          // sphere level of the image-boundary sample, 0: by dimension
  int radial_points = 8;
  int angular_level = 0;           // 0: by dimension
  double r_max = 0.0;              // 0: 0.9 * guard
  double expect_ratio = kNaN;      // e.g. 1 for identity and dilations
  double ratio_slack = 0.02;
  double drift = 0.05;
};
CheckReport check_wub_quasihyperbolic(const Field& u, const WubOptions& opts);

// Sub-mean-value constants: mu_06(p, delta) as the sup of
//   |grad^h u_j(x)|^p / (delta^-n int_{E(x,delta)} |u_j|^p dtau),
// mu_07 from the (1 - |x|^2)|grad u_j(x)| <= mu int_{E(x,1/9)} |u_j - u_j(x)| dtau
// form, and the resulting composite derivative bound.
struct SubmeanOptions {
  std::vector<double> ps{1.0, 2.0};
  std::vector<double> deltas{1.0 / 9.0, 0.25};
  std::size_t points = 40;
  std::uint64_t seed = 0;
  int radial_points = 6;
  int angular_level = 0;  // 0: by dimension
  double drift = 0.05;
};
struct SubmeanConstants {
  std::vector<double> mu06;  // ps x deltas, row-major
  double mu07 = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;
};
SubmeanConstants measure_submean_constants(const Mapping& u, const std::vector<Vec>& points,
                                           const SubmeanOptions& opts, int radial_points,
                                           int angular_level);
CheckReport check_submeanvalue(const Field& u, const SubmeanOptions& opts);

// Moebius invariance of Delta_h and |grad^h|, the pullback Bloch bound, and
// the geometric identities of the ball.
struct InvarianceOptions {
  std::size_t samples = 100;
  std::size_t geometry_samples = 10000;
  std::size_t bloch_maps = 3;
  std::uint64_t seed = 0;
  double h = 2.5e-4;
  double residual_tolerance = 1e-4;
  double gradient_tolerance = 1e-6;
  bool geometry = true;
  GridSpec grid;
};
CheckReport check_invariances(const MappingPtr& u, const InvarianceOptions& opts);

// Geometry identity census (involution, |phi_w(x)| ratio identity, rho
// invariance, the (1 - |x|^2) comparison on E(x, delta), E(w, r) as a
// Euclidean ball, symmetry of E).
std::vector<CheckPart> geometry_identity_parts(int dim, std::size_t samples, std::uint64_t seed);

// Runs a check by id with a JSON request:
//   {"check": id, "dim": n, "field": spec, "level": L, "seed": s, "options": {...}}
// Request: {"dim", "field", "level", "seed", "kernel_correction", "cache_dir",
// "options": {...}}; every key optional, unknown keys rejected.
CheckReport run_check(const std::string& check_id, const Json& request);
int default_field_level(int n);
const std::vector<std::string>& check_ids();

}  // namespace hhm
