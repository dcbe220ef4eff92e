#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace xfermse::numkit {

/// Dense row-major matrix of doubles.
///
/// Storage length always equals rows * cols. Constructors that take external
/// data reject NaN and infinite entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  /// Column vector (n x 1).
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Column c copied out as a vector.
  std::vector<double> col(std::size_t c) const;

  /// New matrix holding the given rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  Matrix transposed() const;

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// MᵀM (cols x cols). Lower triangle is accumulated once and mirrored, so the
/// result is exactly symmetric.
Matrix gram(const Matrix& m);

/// AᵀB for A (n x p) and B (n x q).
Matrix cross(const Matrix& a, const Matrix& b);

/// A·B.
Matrix multiply(const Matrix& a, const Matrix& b);

/// Solves S·X = B for symmetric S.
///
/// Cholesky first. When S is not numerically positive definite the solve
/// falls back to a symmetric eigendecomposition and applies the
/// pseudo-inverse, discarding eigenvalues below 1e-12 times the largest one,
/// which yields the minimum-norm solution for singular S.
///
/// Throws DimensionError on shape mismatch and InvalidArgument when S is
/// asymmetric beyond 1e-10 relative to its largest entry.
Matrix solve_spd(const Matrix& s, const Matrix& b);

/// Per-column arithmetic mean. Throws DimensionError for zero rows.
std::vector<double> column_means(const Matrix& m);

/// Sum of squared entries.
double frobenius_sq(const Matrix& m);

/// Largest absolute entry (0 for an empty matrix).
double max_abs(const Matrix& m);

}  // namespace xfermse::numkit
