#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subbfgs {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Row-compressed n x d design matrix; column indices ascend within a row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_size(Index actual, Index expected, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(expected) + ", got " +
                         std::to_string(actual));
  }
}

/// Computes X * v row by row, splitting rows across `threads` workers.
/// Each entry is an independent dot product, so the result does not depend
/// on the thread count.
Vector row_products(const SparseMatrix& x, const Vector& v, int threads = 1);

/// Same as row_products for a block of right-hand sides (d x k), giving n x k.
Matrix row_products(const SparseMatrix& x, const Matrix& v, int threads = 1);

}  // namespace subbfgs
