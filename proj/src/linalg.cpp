#include "hhm/linalg.hpp"

#include <cmath>
#include <random>

#include "hhm/errors.hpp"

namespace hhm {

double dot(VecView a, VecView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(VecView a) { return dot(a, a); }

double norm(VecView a) {
  // hypot-style scaling is unnecessary here: all points live in the unit ball.
  return std::sqrt(norm2(a));
}

double distance(VecView a, VecView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Vec sub(VecView a, VecView b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec add(VecView a, VecView b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec scaled(VecView a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

Vec axpy(double s, VecView x, VecView y) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = s * x[i] + y[i];
  return r;
}

bool all_finite(VecView a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_same_dim(VecView a, VecView b, const char* where) {
  if (a.size() != b.size())
    throw_invalid(std::string(where) + ": dimension mismatch (" +
                  std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec Matrix::apply(VecView x) const {
  if (x.size() != cols_) throw_invalid("Matrix::apply: dimension mismatch");
  Vec y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
  return y;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::operator*(const Matrix& b) const {
  if (cols_ != b.rows_) throw_invalid("Matrix product: dimension mismatch");
  Matrix c(rows_, b.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double aik = (*this)(i, k);
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

double Matrix::max_abs_diff(const Matrix& b) const {
  double m = 0.0;
  for (std::size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - b.a_[i]));
  return m;
}

Matrix random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Columns of g are orthonormalised by modified Gram-Schmidt; the signs of the
  // implied R diagonal are positive by construction.
  std::vector<Vec> cols(n, Vec(n));
  for (auto& c : cols)
    for (auto& v : c) v = gauss(rng);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      const double proj = dot(cols[j], cols[k]);
      for (std::size_t i = 0; i < n; ++i) cols[j][i] -= proj * cols[k][i];
    }
    const double len = norm(cols[j]);
    if (len < 1e-12) throw_numeric("random_orthogonal: degenerate Gaussian draw");
    for (auto& v : cols[j]) v /= len;
  }
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = cols[j][i];
  return q;
}

}  // namespace hhm
