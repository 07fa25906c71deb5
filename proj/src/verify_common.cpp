#include <algorithm>
#include <cmath>

#include "hhm/errors.hpp"
#include "hhm/parallel.hpp"
#include "hhm/sampling.hpp"
#include "verify_internal.hpp"

namespace hhm {

void CheckPart::record(double lhs, double rhs) {
  double m;
  if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
    m = -std::numeric_limits<double>::infinity();
  } else if (kind == MarginKind::Relative) {
    const double scale = std::fabs(rhs);
    if (scale > 0.0) m = (rhs - lhs) / scale;
    else m = lhs <= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  } else {
    m = rhs - lhs;
  }
  record_margin(m);
}

double CheckReport::margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& part : parts) {
    if (!part.informational) m = std::min(m, part.margin + part.tolerance);
  }
  return m;
}

bool CheckReport::pass() const {
  if (skipped()) return true;
  for (const auto& part : parts) {
    if (!part.pass()) return false;
  }
  return true;
}

std::size_t CheckReport::samples() const {
  std::size_t s = 0;
  for (const auto& part : parts) s += part.samples;
  return s;
}

std::string CheckReport::verdict() const {
  if (skipped()) return "skip";
  return pass() ? "pass" : "fail";
}

Json to_json(const CheckPart& part) {
  Json j;
  j["name"] = part.name;
  j["kind"] = part.kind == MarginKind::Relative ? "relative" : "absolute";
  j["margin"] = detail::num(part.margin);
  j["tolerance"] = detail::num(part.tolerance);
  j["samples"] = part.samples;
  j["skipped"] = part.skipped;
  j["informational"] = part.informational;
  j["pass"] = part.pass();
  j["details"] = part.details;
  return j;
}

Json to_json(const CheckReport& report) {
  Json j;
  j["check"] = report.check_id;
  j["field"] = report.field_id;
  j["dim"] = report.dim;
  j["seed"] = report.seed;
  j["verdict"] = report.verdict();
  j["pass"] = report.pass();
  j["margin"] = detail::num(report.margin());
  j["samples"] = report.samples();
  if (report.skipped()) j["skip_reason"] = report.skip_reason;
  j["params"] = report.params;
  Json parts = Json::array();
  for (const auto& part : report.parts) parts.push_back(to_json(part));
  j["parts"] = std::move(parts);
  j["census"] = report.census;
  return j;
}

namespace detail {

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json nums(const std::vector<double>& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(num(x));
  return j;
}

double unit_uniform(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + (index + 1) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

int angular_level_for(int n, int requested) {
  if (requested > 0) return requested;
  if (n == 2) return 6;
  if (n == 3) return 3;
  return 2;
}

int grid_level_for(int n) {
  if (n == 2) return 6;
  if (n == 3) return 4;
  return 3;
}

std::vector<Vec> evaluate_at(const Mapping& u, const BallNodes& nodes) {
  std::vector<Vec> out(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) { out[i] = u.value(nodes.point(i)); });
  return out;
}

double weighted_sum(const std::vector<double>& w, const std::function<double(std::size_t)>& g) {
  return tree_sum(w.size(), 1, [&](std::size_t i, double* out) { out[0] = w[i] * g(i); })[0];
}

double relative_drift(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  if (scale == 0.0) return 0.0;
  if (!std::isfinite(scale)) return std::numeric_limits<double>::infinity();
  return std::fabs(a - b) / scale;
}

std::vector<Vec> census_points(int n, std::size_t count, double r_max, double guard, std::uint64_t seed) {
  const double strata[] = {0.9, 0.95, 0.99 * guard};
  return sample_ball_points(n, count, r_max, seed, strata);
}

Json point_json(VecView x) {
  Json j = Json::array();
  for (double v : x) j.push_back(num(v));
  return j;
}

}  // namespace detail
}  // namespace hhm
