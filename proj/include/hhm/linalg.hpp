#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hhm {

using Vec = std::vector<double>;
using VecView = std::span<const double>;

double dot(VecView a, VecView b);
double norm2(VecView a);
double norm(VecView a);
double distance(VecView a, VecView b);
Vec sub(VecView a, VecView b);
Vec add(VecView a, VecView b);
Vec scaled(VecView a, double s);
Vec axpy(double s, VecView x, VecView y);  // s*x + y
bool all_finite(VecView a);

void require_same_dim(VecView a, VecView b, const char* where);

// Dense row-major matrix. Small sizes only (Jacobians, rotations).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {a_.data() + i * cols_, cols_};
  }
  const std::vector<double>& data() const { return a_; }

  Vec apply(VecView x) const;
  Matrix transpose() const;
  Matrix operator*(const Matrix& b) const;
  double max_abs_diff(const Matrix& b) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

// Haar-like random orthogonal matrix: QR of a seeded Gaussian matrix with the
// sign convention diag(R) > 0.
Matrix random_orthogonal(std::size_t n, std::uint64_t seed);

// Deterministic pairwise summation of `count` terms of fixed `width`.
// term(i, out) must write `width` values for term i into `out`. Terms are
// grouped in blocks of 32 (summed left to right), block sums are combined by a
// balanced binary tree, so the result depends only on the term values.
template <class TermFn>
Vec tree_sum(std::size_t count, std::size_t width, TermFn&& term);

}  // namespace hhm

#include "hhm/detail/tree_sum.ipp"
