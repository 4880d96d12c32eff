#include "subbfgs/linalg.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace subbfgs {

namespace {

template <typename RowFn>
void for_row_chunks(Index rows, int threads, RowFn&& fn) {
  const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(rows, 1));
  // Not worth spawning threads for small problems.
  if (workers == 1 || rows < 4096) {
    fn(Index{0}, rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const Index chunk = (rows + workers - 1) / workers;
  for (Index begin = 0; begin < rows; begin += chunk) {
    const Index end = std::min(rows, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

Vector row_products(const SparseMatrix& x, const Vector& v, int threads) {
  require_size(v.size(), x.cols(), "row_products");
  Vector out(x.rows());
  for_row_chunks(x.rows(), threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      double acc = 0.0;
      for (SparseMatrix::InnerIterator it(x, i); it; ++it) acc += it.value() * v[it.col()];
      out[i] = acc;
    }
  });
  return out;
}

Matrix row_products(const SparseMatrix& x, const Matrix& v, int threads) {
  require_size(v.rows(), x.cols(), "row_products");
  Matrix out = Matrix::Zero(x.rows(), v.cols());
  for_row_chunks(x.rows(), threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      for (SparseMatrix::InnerIterator it(x, i); it; ++it) {
        out.row(i).noalias() += it.value() * v.row(it.col());
      }
    }
  });
  return out;
}

}  // namespace subbfgs
