#include "xfermse/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eigen_view.hpp"
#include "xfermse/errors.hpp"

namespace xfermse::numkit {

using detail::to_matrix;
using detail::view;

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kEigenCutoff = 1e-12;

void require_finite(const std::vector<double>& data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw InvalidArgument("matrix entry is not finite");
  }
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> Matrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw DimensionError("row index out of range");
    std::copy_n(row(indices[i]).begin(), cols_, out.row(i).begin());
  }
  return out;
}

Matrix Matrix::transposed() const {
  Matrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix gram(const Matrix& m) {
  if (m.empty()) throw DimensionError("gram of an empty matrix");
  const auto p = static_cast<Eigen::Index>(m.cols());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
  g.selfadjointView<Eigen::Lower>().rankUpdate(view(m).transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return to_matrix(g);
}

Matrix cross(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("cross product row mismatch: " + shape(a) + " vs " + shape(b));
  }
  return to_matrix(view(a).transpose() * view(b));
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("product shape mismatch: " + shape(a) + " * " + shape(b));
  }
  return to_matrix(view(a) * view(b));
}

Matrix solve_spd(const Matrix& s, const Matrix& b) {
  if (s.rows() != s.cols()) throw DimensionError("solve_spd needs a square system, got " + shape(s));
  if (s.rows() != b.rows()) {
    throw DimensionError("solve_spd right-hand side " + shape(b) + " does not match " + shape(s));
  }
  if (s.empty()) return Matrix(0, b.cols());

  const double scale = std::max(max_abs(s), 1.0);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(s(i, j) - s(j, i)) > kSymmetryTolerance * scale) {
        throw InvalidArgument("solve_spd: matrix is not symmetric");
      }
    }
  }

  const auto sv = view(s);
  const auto bv = view(b);

  Eigen::LLT<Eigen::MatrixXd> llt(sv);
  if (llt.info() == Eigen::Success) {
    // A pivot that collapsed to rounding level means S is singular in all but
    // name; the eigen path gives the minimum-norm answer instead.
    const auto diag = llt.matrixLLT().diagonal().cwiseAbs2();
    if (diag.minCoeff() > kEigenCutoff * diag.maxCoeff()) return to_matrix(llt.solve(bv));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sv);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const Eigen::MatrixXd& vectors = eig.eigenvectors();
  const double top = values.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] > kEigenCutoff * top) inv[i] = 1.0 / values[i];
  }
  return to_matrix(vectors * inv.asDiagonal() * (vectors.transpose() * bv));
}

std::vector<double> column_means(const Matrix& m) {
  if (m.rows() == 0) throw DimensionError("column means of a matrix with zero rows");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
  const double n = static_cast<double>(m.rows());
  for (double& v : out) v /= n;
  return out;
}

double frobenius_sq(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return acc;
}

double max_abs(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data()) acc = std::max(acc, std::abs(v));
  return acc;
}

}  // namespace xfermse::numkit
