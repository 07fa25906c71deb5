#include "hhm/sampling.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "hhm/errors.hpp"

namespace hhm {

namespace {

struct DirectionSpec {
  int degree;
  std::uint32_t poly;
  std::array<std::uint32_t, 6> m;
};

// new-joe-kuo-6.21201, dimensions 2..16 (dimension 1 is the van der Corput
// sequence and needs no entry).
constexpr std::array<DirectionSpec, 15> kJoeKuo = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
}};

}  // namespace

SobolSequence::SobolSequence(int dim, std::uint64_t seed, bool digital_shift) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim)
    throw_invalid("SobolSequence: dimension must be in [1, 16]");
  for (int b = 0; b < 32; ++b) direction_[0][b] = 1u << (31 - b);
  for (int d = 1; d < dim; ++d) {
    const auto& spec = kJoeKuo[d - 1];
    const int s = spec.degree;
    auto& v = direction_[d];
    for (int b = 0; b < s && b < 32; ++b) v[b] = spec.m[b] << (31 - b);
    for (int b = s; b < 32; ++b) {
      std::uint32_t x = v[b - s] ^ (v[b - s] >> s);
      for (int k = 1; k < s; ++k)
        if ((spec.poly >> (s - 1 - k)) & 1u) x ^= v[b - k];
      v[b] = x;
    }
  }
  if (digital_shift) {
    std::mt19937_64 rng(seed);
    for (int d = 0; d < dim; ++d) shift_[d] = static_cast<std::uint32_t>(rng() >> 32);
  }
  state_.fill(0);
}

void SobolSequence::next(std::span<double> out) {
  if (out.size() < static_cast<std::size_t>(dim_)) throw_invalid("SobolSequence::next: short buffer");
  constexpr double kScale = 1.0 / 4294967296.0;
  for (int d = 0; d < dim_; ++d)
    out[d] = (static_cast<double>(state_[d] ^ shift_[d]) + 0.5) * kScale;
  // Gray-code update for the following index.
  std::uint32_t c = 0;
  for (std::uint32_t i = index_; i & 1u; i >>= 1) ++c;
  if (c >= 32) throw_numeric("SobolSequence: sequence exhausted");
  for (int d = 0; d < dim_; ++d) state_[d] ^= direction_[d][c];
  ++index_;
}

Vec SobolSequence::next() {
  Vec v(static_cast<std::size_t>(dim_));
  next(v);
  return v;
}

int sphere_coordinates_needed(int n) {
  if (n == 2) return 1;
  if (n == 3) return 2;
  return n;
}

Vec uniform_to_sphere(std::span<const double> u, int n) {
  Vec p(static_cast<std::size_t>(n));
  if (n == 2) {
    const double t = 2.0 * std::numbers::pi * u[0];
    p[0] = std::cos(t);
    p[1] = std::sin(t);
  } else if (n == 3) {
    const double z = 2.0 * u[0] - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double t = 2.0 * std::numbers::pi * u[1];
    p[0] = s * std::cos(t);
    p[1] = s * std::sin(t);
    p[2] = z;
  } else {
    for (int i = 0; i < n; ++i)
      p[i] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u[i] - 1.0);
    const double len = norm(p);
    for (auto& v : p) v /= len;
  }
  return p;
}

std::vector<Vec> sample_ball_points(int n, std::size_t count, double r_max, std::uint64_t seed,
                                    std::span<const double> strata) {
  const int k = sphere_coordinates_needed(n);
  SobolSequence seq(k + 1, seed);
  std::vector<Vec> pts;
  pts.reserve(count + strata.size());
  Vec u(static_cast<std::size_t>(k + 1));
  for (std::size_t i = 0; i < count; ++i) {
    seq.next(u);
    const double r = r_max * std::pow(u[0], 1.0 / n);
    pts.push_back(scaled(uniform_to_sphere(std::span<const double>(u).subspan(1), n), r));
  }
  for (double r : strata) {
    if (r > r_max) continue;
    seq.next(u);
    pts.push_back(scaled(uniform_to_sphere(std::span<const double>(u).subspan(1), n), r));
  }
  return pts;
}

std::vector<std::pair<Vec, Vec>> sample_ball_pairs(int n, std::size_t count, double r_max,
                                                   std::uint64_t seed) {
  const int k = sphere_coordinates_needed(n);
  SobolSequence seq(2 * (k + 1), seed);
  std::vector<std::pair<Vec, Vec>> out;
  out.reserve(count);
  Vec u(static_cast<std::size_t>(2 * (k + 1)));
  const std::span<const double> us(u);
  for (std::size_t i = 0; i < count; ++i) {
    seq.next(u);
    const double rx = r_max * std::pow(u[0], 1.0 / n);
    const double ry = r_max * std::pow(u[k + 1], 1.0 / n);
    out.emplace_back(scaled(uniform_to_sphere(us.subspan(1, k), n), rx),
                     scaled(uniform_to_sphere(us.subspan(k + 2, k), n), ry));
  }
  return out;
}

}  // namespace hhm
