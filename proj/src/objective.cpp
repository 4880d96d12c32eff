#include "subbfgs/objective.hpp"

namespace subbfgs {

void add_transpose_product(const SparseMatrix& x, const Vector& coeffs, Vector& out) {
  require_size(coeffs.size(), x.rows(), "add_transpose_product");
  require_size(out.size(), x.cols(), "add_transpose_product");
  for (Index i = 0; i < x.rows(); ++i) {
    const double c = coeffs[i];
    if (c == 0.0) continue;
    for (SparseMatrix::InnerIterator it(x, i); it; ++it) out[it.col()] += c * it.value();
  }
}

}  // namespace subbfgs
