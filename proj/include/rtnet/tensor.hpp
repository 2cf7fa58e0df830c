#pragma once

#include <Eigen/Dense>
#include <string>

#include "rtnet/errors.hpp"

namespace rtnet {

/// Row-major batch x feature storage. Every tensor in the library is 2-D:
/// rows are samples, columns are features.
template <typename Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Column = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using TensorXd = Tensor<double>;
using ColumnXd = Column<double>;
using Labels = Eigen::VectorXi;

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& x, const std::string& what) {
  if (!x.allFinite()) throw NumericalError(what + ": non-finite value");
}

template <typename Derived>
void require_shape(const Eigen::DenseBase<Derived>& x, Eigen::Index rows, Eigen::Index cols,
                   const std::string& what) {
  if (x.rows() != rows || x.cols() != cols) {
    throw UsageError(what + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                     ", got " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
}

/// Copy of the rows of `x` listed in `idx`, in order.
template <typename Derived, typename Index>
Tensor<typename Derived::Scalar> gather_rows(const Eigen::MatrixBase<Derived>& x, const Index& idx) {
  Tensor<typename Derived::Scalar> out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace rtnet
