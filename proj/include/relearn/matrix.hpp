#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "relearn/common.hpp"

namespace relearn {

// Dense row-major matrix of doubles. All reals in this library are 64-bit;
// oracle tolerances (1e-8 and below) rule out single precision.
class Matrix {
 public:
  Matrix() = default;
  Matrix(count_t rows, count_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(count_t rows, count_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ShapeMismatch("matrix data length does not match rows*cols");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw ShapeMismatch("ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(count_t n) {
    Matrix m(n, n);
    for (count_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  count_t rows() const { return rows_; }
  count_t cols() const { return cols_; }
  count_t size() const { return data_.size(); }

  double& operator()(count_t i, count_t j) { return data_[i * cols_ + j]; }
  double operator()(count_t i, count_t j) const { return data_[i * cols_ + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (count_t i = 0; i < rows_; ++i)
      for (count_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o, "+=");
    for (count_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o, "-=");
    for (count_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw ShapeMismatch("matmul inner dimensions");
    Matrix c(a.rows_, b.cols_);
    // ikj order keeps the inner loop contiguous in both b and c.
    for (count_t i = 0; i < a.rows_; ++i) {
      for (count_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* brow = &b.data_[k * b.cols_];
        double* crow = &c.data_[i * b.cols_];
        for (count_t j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
      }
    }
    return c;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  bool is_symmetric(double tol) const {
    if (rows_ != cols_) return false;
    for (count_t i = 0; i < rows_; ++i)
      for (count_t j = i + 1; j < cols_; ++j)
        if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

 private:
  void require_same_shape(const Matrix& o, const char* op) const {
    if (!same_shape(o)) throw ShapeMismatch(std::string("matrix ") + op);
  }

  count_t rows_ = 0;
  count_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {
constexpr double kSymmetryTol = 1e-10;
constexpr double kCholeskyPivotFloor = 1e-12;
}  // namespace detail

// Lower-triangular factor L with L*L^T = m. The symmetry gate runs before
// factorization so that assembly bugs surface as symmetry errors, not as
// mysterious pivot failures.
inline Matrix cholesky(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeMismatch("cholesky needs a square matrix");
  if (!m.is_symmetric(detail::kSymmetryTol))
    throw NotPositiveDefinite("matrix is not symmetric within 1e-10");
  const count_t n = m.rows();
  Matrix l(n, n);
  for (count_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (count_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (diag <= detail::kCholeskyPivotFloor)
      throw NotPositiveDefinite("pivot " + std::to_string(j) + " is " +
                                std::to_string(diag));
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (count_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (count_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

// Solves L*x = b for lower-triangular L, column by column.
inline Matrix solve_lower(const Matrix& l, const Matrix& b) {
  if (l.rows() != b.rows()) throw ShapeMismatch("solve_lower row counts");
  const count_t n = l.rows(), m = b.cols();
  Matrix x = b;
  for (count_t i = 0; i < n; ++i) {
    for (count_t c = 0; c < m; ++c) {
      double s = x(i, c);
      for (count_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
      x(i, c) = s / l(i, i);
    }
  }
  return x;
}

// Solves L^T*x = b for lower-triangular L (i.e. an upper-triangular solve).
inline Matrix solve_lower_transposed(const Matrix& l, const Matrix& b) {
  if (l.rows() != b.rows()) throw ShapeMismatch("solve_lower_transposed row counts");
  const count_t n = l.rows(), m = b.cols();
  Matrix x = b;
  for (count_t ii = n; ii-- > 0;) {
    for (count_t c = 0; c < m; ++c) {
      double s = x(ii, c);
      for (count_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x(k, c);
      x(ii, c) = s / l(ii, ii);
    }
  }
  return x;
}

// Solves m*x = b for symmetric positive definite m via Cholesky.
inline Matrix solve_spd(const Matrix& m, const Matrix& b) {
  if (m.rows() != b.rows()) throw ShapeMismatch("solve_spd rhs row count");
  const Matrix l = cholesky(m);
  return solve_lower_transposed(l, solve_lower(l, b));
}

inline Matrix inverse_spd(const Matrix& m) {
  return solve_spd(m, Matrix::identity(m.rows()));
}

// Largest |eigenvalue| estimate by power iteration; used for kernel
// spectral-radius checks.
inline double spectral_radius_estimate(const Matrix& m, count_t iters = 300) {
  const count_t n = m.rows();
  if (n == 0) return 0.0;
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  for (count_t it = 0; it < iters; ++it) {
    std::vector<double> w(n, 0.0);
    for (count_t i = 0; i < n; ++i)
      for (count_t j = 0; j < n; ++j) w[i] += m(i, j) * v[j];
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (count_t i = 0; i < n; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

}  // namespace relearn
