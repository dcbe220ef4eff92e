#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "xfermse/errors.hpp"
#include "xfermse/ridge.hpp"

using namespace xfermse;
using numkit::Matrix;

TEST(Ridge, TwoSampleFixture) {
  const Matrix u{{0}, {1}};
  const Matrix y{{0}, {1}};
  const auto sol = ridge::ridge_fit(u, y, 1.0);
  EXPECT_NEAR(sol.a()(0, 0), 0.2, 1e-15);
  EXPECT_NEAR(sol.b()[0], 0.4, 1e-15);
  EXPECT_NEAR(sol.mse_term(), 0.16, 1e-15);
  EXPECT_NEAR(sol.penalty_term(), 0.04, 1e-15);
  EXPECT_NEAR(sol.objective(), 0.20, 1e-15);
  EXPECT_EQ(sol.n(), 2u);
  EXPECT_EQ(sol.input_dim(), 1u);
  EXPECT_EQ(sol.output_dim(), 1u);

  const auto exact = ridge::ridge_fit(u, y, 0.0);
  EXPECT_NEAR(exact.a()(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(exact.b()[0], 0.0, 1e-15);
  EXPECT_NEAR(exact.objective(), 0.0, 1e-15);
}

TEST(Ridge, MatchesGradientDescent) {
  Rng rng(11);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 3 + rng.below(30), p = 1 + rng.below(6), q = 1 + rng.below(3);
    const double lambda = (trial % 3 == 0) ? 0.0 : (trial % 3 == 1 ? 0.1 : 1.0);
    const Matrix u = oracle::random_matrix(rng, n, p);
    const Matrix y = oracle::random_matrix(rng, n, q);
    const auto sol = ridge::ridge_fit(u, y, lambda);
    const auto gd = oracle::ridge_gradient_descent(u, y, lambda);
    EXPECT_NEAR(sol.objective(), gd.objective, 1e-6) << "trial " << trial;
    EXPECT_NEAR(sol.objective(), oracle::ridge_objective(sol.a(), sol.b(), u, y, lambda), 1e-12);
  }
}

TEST(Ridge, StationaryAndLocallyOptimal) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.below(40), p = 1 + rng.below(8), q = 1 + rng.below(3);
    const double lambda = 0.5 * static_cast<double>(trial % 4);
    const Matrix u = oracle::random_matrix(rng, n, p);
    const Matrix y = oracle::random_matrix(rng, n, q);
    const auto sol = ridge::ridge_fit(u, y, lambda);
    EXPECT_LE(oracle::fd_gradient_max(sol.a(), sol.b(), u, y, lambda), 1e-5);

    for (int k = 0; k < 5; ++k) {
      Matrix a = sol.a();
      std::vector<double> b = sol.b();
      for (double& v : a.data()) v += 1e-3 * rng.normal();
      for (double& v : b) v += 1e-3 * rng.normal();
      EXPECT_GE(ridge::objective_at(a, b, u, y, lambda), sol.objective() - 1e-12);
    }
  }
}

TEST(Ridge, ObjectiveGrowsAndNormShrinksWithLambda) {
  Rng rng(13);
  const Matrix u = oracle::random_matrix(rng, 40, 6);
  const Matrix y = oracle::random_matrix(rng, 40, 2);
  double prev_obj = -1.0, prev_norm = 1e300;
  for (double lambda : {0.0, 0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    const auto sol = ridge::ridge_fit(u, y, lambda);
    const double norm = numkit::frobenius_sq(sol.a());
    EXPECT_GE(sol.objective(), prev_obj);
    EXPECT_LE(norm, prev_norm + 1e-15);
    prev_obj = sol.objective();
    prev_norm = norm;
  }
}

TEST(Ridge, RecoversExactAffineMap) {
  Rng rng(14);
  const Matrix u = oracle::random_matrix(rng, 30, 4);
  const Matrix a{{1, -2, 0.5, 3}, {0, 1, 1, -1}};
  const std::vector<double> b{0.7, -4.0};
  Matrix y = oracle::matmul(u, oracle::transpose(a));
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t o = 0; o < 2; ++o) y(i, o) += b[o];
  const auto sol = ridge::ridge_fit(u, y, 0.0);
  EXPECT_LE(oracle::max_abs_diff(sol.a(), a), 1e-10);
  EXPECT_NEAR(sol.b()[0], b[0], 1e-10);
  EXPECT_NEAR(sol.b()[1], b[1], 1e-10);
  EXPECT_LE(sol.mse_term(), 1e-20);
  EXPECT_LE(oracle::max_abs_diff(ridge::predict(sol, u), y), 1e-10);
}

TEST(Ridge, InterceptIsUnpenalized) {
  // Constant targets: A = 0 for any λ and b equals the constant.
  Rng rng(15);
  const Matrix u = oracle::random_matrix(rng, 10, 3);
  const Matrix y(10, 1, 42.0);
  for (double lambda : {0.0, 1.0, 100.0}) {
    const auto sol = ridge::ridge_fit(u, y, lambda);
    EXPECT_LE(numkit::max_abs(sol.a()), 1e-12);
    EXPECT_NEAR(sol.b()[0], 42.0, 1e-12);
  }
}

TEST(Ridge, RankDeficientGivesMinimumNorm) {
  // Duplicated column: the weight splits evenly between the copies.
  const Matrix u{{0, 0}, {1, 1}, {2, 2}};
  const Matrix y{{0}, {2}, {4}};
  const auto sol = ridge::ridge_fit(u, y, 0.0);
  EXPECT_NEAR(sol.a()(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(sol.a()(0, 1), 1.0, 1e-10);
  EXPECT_NEAR(sol.mse_term(), 0.0, 1e-12);
}

TEST(Ridge, ResidualHelpersAgree) {
  Rng rng(16);
  const Matrix u = oracle::random_matrix(rng, 25, 3);
  const Matrix y = oracle::random_matrix(rng, 25, 2);
  const auto sol = ridge::ridge_fit(u, y, 0.3);
  EXPECT_NEAR(ridge::mean_squared_residual(sol.a(), sol.b(), u, y), sol.mse_term(), 1e-12);
  EXPECT_NEAR(ridge::objective_at(sol.a(), sol.b(), u, y, 0.3), sol.objective(), 1e-12);
}

TEST(Ridge, RejectsBadInput) {
  const Matrix u{{0}, {1}};
  EXPECT_THROW(ridge::ridge_fit(u, Matrix{{1}}, 1.0), DimensionError);
  EXPECT_THROW(ridge::ridge_fit(u, Matrix{{1}, {2}}, -1.0), InvalidArgument);
  EXPECT_THROW(ridge::ridge_fit(u, Matrix{{1}, {2}}, std::nan("")), InvalidArgument);
  EXPECT_THROW(ridge::ridge_fit(Matrix(0, 1), Matrix(0, 1), 1.0), DimensionError);
  const auto sol = ridge::ridge_fit(u, Matrix{{1}, {2}}, 1.0);
  EXPECT_THROW(ridge::predict(sol, Matrix(2, 3)), DimensionError);
}
