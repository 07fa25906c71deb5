#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hhm/quadrature.hpp"
#include "hhm/verify.hpp"

namespace hhm::detail {

// Finite numbers as JSON numbers, infinities and NaN as strings.
Json num(double v);
Json nums(const std::vector<double>& v);

// Uniform in [0, 1) from (seed, index), SplitMix64 based.
double unit_uniform(std::uint64_t seed, std::uint64_t index);

// Default angular level of the small-ball rules used inside checks.
int angular_level_for(int n, int requested);
// Default sphere level of sup-estimation grids.
int grid_level_for(int n);

// Evaluations u(y_i) at every node, computed in parallel.
std::vector<Vec> evaluate_at(const Mapping& u, const BallNodes& nodes);

// sum_i w_i g(i) in fixed pairwise order.
double weighted_sum(const std::vector<double>& w, const std::function<double(std::size_t)>& g);

double relative_drift(double a, double b);

// Census points: low-discrepancy interior points up to r_max plus the
// near-boundary strata {0.9, 0.95, 0.99 guard} that do not exceed r_max.
std::vector<Vec> census_points(int n, std::size_t count, double r_max, double guard, std::uint64_t seed);

Json point_json(VecView x);

}  // namespace hhm::detail
