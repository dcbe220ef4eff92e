#include "xfermse/ridge.hpp"

#include <cmath>
#include <string>

#include "eigen_view.hpp"
#include "xfermse/errors.hpp"

namespace xfermse::ridge {

using numkit::detail::view;

namespace {

void require_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw InvalidArgument("lambda must be a finite nonnegative number");
  }
}

void require_consistent(const Matrix& a, std::span<const double> b, const Matrix& inputs,
                        const Matrix& targets) {
  if (inputs.rows() != targets.rows()) {
    throw DimensionError("inputs have " + std::to_string(inputs.rows()) + " rows, targets have " +
                         std::to_string(targets.rows()));
  }
  if (inputs.rows() == 0) throw DimensionError("no samples");
  if (a.cols() != inputs.cols() || a.rows() != targets.cols() || b.size() != targets.cols()) {
    throw DimensionError("linear map does not match input/target dimensions");
  }
}

Matrix centered(const Matrix& m, const std::vector<double>& means) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < out.cols(); ++c) row[c] -= means[c];
  }
  return out;
}

}  // namespace

RidgeSolution::RidgeSolution(Matrix a, std::vector<double> b, double lambda, double mse_term,
                             double penalty_term, std::size_t n)
    : a_(std::move(a)),
      b_(std::move(b)),
      lambda_(lambda),
      mse_term_(mse_term),
      penalty_term_(penalty_term),
      n_(n) {
  require_lambda(lambda_);
  if (b_.size() != a_.rows()) throw DimensionError("intercept length does not match A");
  if (mse_term_ < 0.0 || penalty_term_ < 0.0) {
    throw InvalidArgument("objective terms must be nonnegative");
  }
}

double mean_squared_residual(const Matrix& a, std::span<const double> b, const Matrix& inputs,
                             const Matrix& targets) {
  require_consistent(a, b, inputs, targets);
  const Eigen::Map<const Eigen::RowVectorXd> bias(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::MatrixXd residual = view(targets) - view(inputs) * view(a).transpose();
  residual.rowwise() -= bias;
  return residual.squaredNorm() / static_cast<double>(inputs.rows());
}

double objective_at(const Matrix& a, std::span<const double> b, const Matrix& inputs,
                    const Matrix& targets, double lambda) {
  require_lambda(lambda);
  return mean_squared_residual(a, b, inputs, targets) + lambda * numkit::frobenius_sq(a);
}

RidgeSolution ridge_fit(const Matrix& inputs, const Matrix& targets, double lambda) {
  require_lambda(lambda);
  if (inputs.rows() != targets.rows()) {
    throw DimensionError("inputs have " + std::to_string(inputs.rows()) + " rows, targets have " +
                         std::to_string(targets.rows()));
  }
  if (inputs.rows() == 0) throw DimensionError("ridge_fit needs at least one sample");
  if (inputs.cols() == 0 || targets.cols() == 0) throw DimensionError("zero-width inputs or targets");
  if (!inputs.all_finite() || !targets.all_finite()) throw InvalidArgument("non-finite input");

  const std::size_t n = inputs.rows();
  const std::size_t p = inputs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  const auto u_mean = numkit::column_means(inputs);
  const auto y_mean = numkit::column_means(targets);
  const Matrix uc = centered(inputs, u_mean);
  const Matrix yc = centered(targets, y_mean);

  Matrix system = numkit::gram(uc);
  for (double& v : system.data()) v *= inv_n;
  for (std::size_t i = 0; i < p; ++i) system(i, i) += lambda;
  Matrix rhs = numkit::cross(uc, yc);
  for (double& v : rhs.data()) v *= inv_n;

  Matrix a = numkit::solve_spd(system, rhs).transposed();

  std::vector<double> b(y_mean);
  for (std::size_t j = 0; j < a.rows(); ++j) {
    const auto coef = a.row(j);
    for (std::size_t k = 0; k < p; ++k) b[j] -= coef[k] * u_mean[k];
  }

  const double mse = mean_squared_residual(a, b, inputs, targets);
  const double penalty = lambda * numkit::frobenius_sq(a);
  return RidgeSolution(std::move(a), std::move(b), lambda, mse, penalty, n);
}

Matrix predict(const RidgeSolution& sol, const Matrix& inputs) {
  if (inputs.cols() != sol.input_dim()) {
    throw DimensionError("predict: input has " + std::to_string(inputs.cols()) +
                         " columns, model expects " + std::to_string(sol.input_dim()));
  }
  Matrix out = numkit::detail::to_matrix(view(inputs) * view(sol.a()).transpose());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += sol.b()[c];
  }
  return out;
}

}  // namespace xfermse::ridge
