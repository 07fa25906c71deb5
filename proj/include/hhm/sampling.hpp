#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hhm/linalg.hpp"

namespace hhm {

// Sobol low-discrepancy sequence (Joe-Kuo direction numbers, up to 16
// dimensions, 32-bit resolution) with an optional seeded random digital shift.
class SobolSequence {
 public:
  static constexpr int kMaxDim = 16;

  SobolSequence(int dim, std::uint64_t seed, bool digital_shift = true);

  int dim() const { return dim_; }
  std::uint32_t index() const { return index_; }

  // Next point in [0,1)^dim; never returns an exact 0 coordinate.
  void next(std::span<double> out);
  Vec next();

 private:
  int dim_;
  std::uint32_t index_ = 0;
  std::array<std::array<std::uint32_t, 32>, kMaxDim> direction_{};
  std::array<std::uint32_t, kMaxDim> state_{};
  std::array<std::uint32_t, kMaxDim> shift_{};
};

// Number of uniform coordinates consumed to produce one point of S^{n-1}.
int sphere_coordinates_needed(int n);

// Area-preserving map from the unit cube to S^{n-1}: angle for n = 2,
// Archimedes' cylinder map for n = 3, normalised Gaussian for n >= 4.
Vec uniform_to_sphere(std::span<const double> u, int n);

// Seeded low-discrepancy points of the ball of radius r_max, uniform in
// volume, followed by one extra point on each requested stratum radius
// (radii above r_max are dropped).
std::vector<Vec> sample_ball_points(int n, std::size_t count, double r_max, std::uint64_t seed,
                                    std::span<const double> strata = {});

// Seeded pairs (x, y) with |x|, |y| <= r_max.
std::vector<std::pair<Vec, Vec>> sample_ball_pairs(int n, std::size_t count, double r_max,
                                                   std::uint64_t seed);

}  // namespace hhm
