#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xfermse/numkit.hpp"

namespace xfermse::ridge {

using numkit::Matrix;

/// Fitted affine map u -> A·u + b from a regularized least-squares problem
///
///   min_{A,b} (1/n) Σ ‖yᵢ − A·uᵢ − b‖² + λ‖A‖_F²
///
/// A is stored output-dim x input-dim. The intercept b is not penalized.
class RidgeSolution {
 public:
  RidgeSolution(Matrix a, std::vector<double> b, double lambda, double mse_term,
                double penalty_term, std::size_t n);

  const Matrix& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  double lambda() const { return lambda_; }
  double mse_term() const { return mse_term_; }
  double penalty_term() const { return penalty_term_; }
  std::size_t n() const { return n_; }
  std::size_t input_dim() const { return a_.cols(); }
  std::size_t output_dim() const { return a_.rows(); }

  double objective() const { return mse_term_ + penalty_term_; }

  friend bool operator==(const RidgeSolution&, const RidgeSolution&) = default;

 private:
  Matrix a_;
  std::vector<double> b_;
  double lambda_;
  double mse_term_;
  double penalty_term_;
  std::size_t n_;
};

/// Exact minimizer via centering and the normal equations
/// (S + λI)·Aᵀ = C, with S and C the 1/n-scaled centered Gram and cross
/// products; λ is not rescaled by n. λ = 0 on rank-deficient inputs returns
/// the minimum-norm A.
RidgeSolution ridge_fit(const Matrix& inputs, const Matrix& targets, double lambda);

/// Row i = A·uᵢ + b.
Matrix predict(const RidgeSolution& sol, const Matrix& inputs);

/// (1/n) Σ ‖yᵢ − A·uᵢ − b‖² + λ‖A‖_F² at an arbitrary (A, b).
double objective_at(const Matrix& a, std::span<const double> b, const Matrix& inputs,
                    const Matrix& targets, double lambda);

/// (1/n) Σ ‖yᵢ − A·uᵢ − b‖².
double mean_squared_residual(const Matrix& a, std::span<const double> b, const Matrix& inputs,
                             const Matrix& targets);

}  // namespace xfermse::ridge
