#pragma once

// Internal: zero-copy Eigen views over numkit::Matrix storage.

#include <Eigen/Dense>

#include "xfermse/numkit.hpp"

namespace xfermse::numkit::detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMajor>;
using View = Eigen::Map<RowMajor>;

inline ConstView view(const Matrix& m) {
  return ConstView(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                   static_cast<Eigen::Index>(m.cols()));
}

inline View view(Matrix& m) {
  return View(m.data().data(), static_cast<Eigen::Index>(m.rows()),
              static_cast<Eigen::Index>(m.cols()));
}

template <typename Derived>
Matrix to_matrix(const Eigen::MatrixBase<Derived>& e) {
  Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  view(out) = e;
  return out;
}

}  // namespace xfermse::numkit::detail
