#pragma once

// Slow reference implementations used to cross-check the library. None of
// these call into xfermse beyond the Matrix container.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "xfermse/numkit.hpp"
#include "xfermse/rng.hpp"

namespace oracle {

using xfermse::numkit::Matrix;

inline Matrix random_matrix(xfermse::Rng& rng, std::size_t rows, std::size_t cols,
                            double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

inline std::vector<double> random_vector(xfermse::Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Gauss-Jordan with partial pivoting on [S | B].
inline Matrix gauss_jordan_solve(Matrix s, Matrix b) {
  const std::size_t n = s.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(s(r, c)) > std::abs(s(piv, c))) piv = r;
    for (std::size_t j = 0; j < n; ++j) std::swap(s(c, j), s(piv, j));
    for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(c, j), b(piv, j));
    const double d = s(c, c);
    for (std::size_t j = 0; j < n; ++j) s(c, j) /= d;
    for (std::size_t j = 0; j < b.cols(); ++j) b(c, j) /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = s(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) s(r, j) -= f * s(c, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(r, j) -= f * b(c, j);
    }
  }
  return b;
}

// (1/n) Σ ‖yᵢ − A·uᵢ − b‖² + λ‖A‖², A stored q x p.
inline double ridge_objective(const Matrix& a, const std::vector<double>& b, const Matrix& u,
                              const Matrix& y, double lambda) {
  double loss = 0.0;
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t o = 0; o < y.cols(); ++o) {
      double r = y(i, o) - b[o];
      for (std::size_t k = 0; k < u.cols(); ++k) r -= a(o, k) * u(i, k);
      loss += r * r;
    }
  double pen = 0.0;
  for (double v : a.data()) pen += v * v;
  return loss / static_cast<double>(u.rows()) + lambda * pen;
}

struct RidgeOracle {
  Matrix a;
  std::vector<double> b;
  double objective = 0.0;
};

// Nesterov-accelerated full-batch gradient descent on (A, b) jointly.
inline RidgeOracle ridge_gradient_descent(const Matrix& u, const Matrix& y, double lambda,
                                          int iterations = 40000) {
  const std::size_t n = u.rows(), p = u.cols(), q = y.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Lipschitz constant of the gradient: 2·(λ_max([U 1]ᵀ[U 1]/n) + λ), by power iteration.
  std::vector<double> v(p + 1, 1.0);
  double top = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> w(p + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = v[p];
      for (std::size_t k = 0; k < p; ++k) dot += u(i, k) * v[k];
      for (std::size_t k = 0; k < p; ++k) w[k] += u(i, k) * dot * inv_n;
      w[p] += dot * inv_n;
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    top = norm;
    for (std::size_t k = 0; k <= p; ++k) v[k] = w[k] / norm;
  }
  const double step = 1.0 / (2.0 * (1.05 * top + lambda));

  Matrix a(q, p), a_prev(q, p);
  std::vector<double> b(q, 0.0), b_prev(q, 0.0);
  Matrix ga(q, p);
  std::vector<double> gb(q);
  for (int it = 1; it <= iterations; ++it) {
    const double mom = static_cast<double>(it - 1) / static_cast<double>(it + 2);
    Matrix ya(q, p);
    std::vector<double> yb(q);
    for (std::size_t j = 0; j < a.size(); ++j)
      ya.data()[j] = a.data()[j] + mom * (a.data()[j] - a_prev.data()[j]);
    for (std::size_t o = 0; o < q; ++o) yb[o] = b[o] + mom * (b[o] - b_prev[o]);

    for (double& g : ga.data()) g = 0.0;
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t o = 0; o < q; ++o) {
        double r = y(i, o) - yb[o];
        for (std::size_t k = 0; k < p; ++k) r -= ya(o, k) * u(i, k);
        for (std::size_t k = 0; k < p; ++k) ga(o, k) -= 2.0 * inv_n * r * u(i, k);
        gb[o] -= 2.0 * inv_n * r;
      }
    a_prev = a;
    b_prev = b;
    for (std::size_t j = 0; j < a.size(); ++j)
      a.data()[j] = ya.data()[j] - step * (ga.data()[j] + 2.0 * lambda * ya.data()[j]);
    for (std::size_t o = 0; o < q; ++o) b[o] = yb[o] - step * gb[o];
  }
  RidgeOracle out{a, b, 0.0};
  out.objective = ridge_objective(a, b, u, y, lambda);
  return out;
}

// Central-difference gradient of the ridge objective, max-norm.
inline double fd_gradient_max(const Matrix& a, const std::vector<double>& b, const Matrix& u,
                              const Matrix& y, double lambda, double h = 1e-6) {
  double worst = 0.0;
  Matrix ap = a;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double orig = ap.data()[j];
    ap.data()[j] = orig + h;
    const double fp = ridge_objective(ap, b, u, y, lambda);
    ap.data()[j] = orig - h;
    const double fm = ridge_objective(ap, b, u, y, lambda);
    ap.data()[j] = orig;
    worst = std::max(worst, std::abs(fp - fm) / (2.0 * h));
  }
  std::vector<double> bp = b;
  for (std::size_t o = 0; o < b.size(); ++o) {
    const double orig = bp[o];
    bp[o] = orig + h;
    const double fp = ridge_objective(a, bp, u, y, lambda);
    bp[o] = orig - h;
    const double fm = ridge_objective(a, bp, u, y, lambda);
    bp[o] = orig;
    worst = std::max(worst, std::abs(fp - fm) / (2.0 * h));
  }
  return worst;
}

// Every pair enumerated; τ-b = (C − D) / √((n₀ − n₁)(n₀ − n₂)).
inline double kendall_brute(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double conc = 0.0, disc = 0.0, tx = 0.0, ty = 0.0, n0 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      n0 += 1.0;
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0.0) tx += 1.0;
      if (dy == 0.0) ty += 1.0;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0) == (dy > 0)) conc += 1.0;
      else disc += 1.0;
    }
  return (conc - disc) / std::sqrt((n0 - tx) * (n0 - ty));
}

// Rank of vᵢ = 1 + #{v < vᵢ} + (#{v == vᵢ} − 1)/2.
inline std::vector<double> naive_ranks(std::span<const double> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double naive_pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
