#include "oracles.hpp"

#include "subbfgs/quasi_newton.hpp"

#include <doctest.h>

using namespace subbfgs;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

}  // namespace

TEST_CASE("identity models leave vectors unchanged") {
  const DenseInverseHessian<double> dense(2);
  CHECK(dense.apply(vec({3, -4})) == vec({3, -4}));
  const LbfgsInverseHessian<double> lbfgs(3, 5);
  CHECK(lbfgs.apply(vec({1, 2, 3})) == vec({1, 2, 3}));
}

TEST_CASE("single pair: LBFGS agrees with the dense update") {
  const auto pair = DisplacementPair<double>::make(vec({1, 0}), vec({2, 0}));
  DenseInverseHessian<double> dense(2);
  LbfgsInverseHessian<double> lbfgs(2, 3);
  dense.update(pair);
  lbfgs.update(pair);
  const Vector v = vec({2, 0});
  CHECK((lbfgs.apply(v) - dense.apply(v)).norm() <= 1e-15);
  CHECK(dense.apply(v).isApprox(vec({1, 0})));
}

TEST_CASE("one-dimensional update is s / y") {
  DenseInverseHessian<double> b(1);
  b.update(DisplacementPair<double>::make(vec({2}), vec({1})));
  CHECK(b.matrix()(0, 0) == doctest::Approx(2.0));
  CHECK(b.apply(vec({1}))[0] == doctest::Approx(2.0));
}

TEST_CASE("pair with s = y is preserved") {
  std::mt19937_64 rng(1);
  DenseInverseHessian<double> b(oracle::random_spd(4, 0.5, 3.0, rng));
  const Vector s = oracle::random_vector(4, -1, 1, rng);
  b.update(DisplacementPair<double>::make(s, s));
  CHECK((b.apply(s) - s).norm() <= 1e-12 * s.norm());
}

TEST_CASE("random SPD update stays symmetric, satisfies the secant and stays positive") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    DenseInverseHessian<double> b(oracle::random_spd(5, 0.1, 10.0, rng));
    Vector s = oracle::random_vector(5, -1, 1, rng);
    Vector y = oracle::random_vector(5, -1, 1, rng);
    if (s.dot(y) <= 0.0) y = -y;
    if (s.dot(y) <= 1e-3) continue;
    b.update(DisplacementPair<double>::make(s, y));
    CHECK((b.matrix() - b.matrix().transpose()).norm() == 0.0);
    CHECK((b.apply(y) - s).norm() <= 1e-10 * s.norm() * std::max(1.0, b.matrix().norm()));
    for (int k = 0; k < 100; ++k) {
      const Vector x = oracle::random_vector(5, -1, 1, rng);
      CHECK(x.dot(b.apply(x)) > 0.0);
    }
  }
}

TEST_CASE("displacement pairs reject nonpositive curvature and non-finite input") {
  CHECK_THROWS_AS(DisplacementPair<double>::make(vec({1, 0}), vec({0, 1})), CurvatureError);
  CHECK_THROWS_AS(DisplacementPair<double>::make(vec({1, 0}), vec({-1, 0})), CurvatureError);
  CHECK_THROWS_AS(DisplacementPair<double>::make(vec({1, NAN}), vec({1, 0})), CurvatureError);
  CHECK_THROWS_AS(DisplacementPair<double>::make(vec({1}), vec({1, 0})), DimensionError);
  const auto p = DisplacementPair<double>::make(vec({1, 1}), vec({2, 0}));
  CHECK(p.rho == 0.5);
}

TEST_CASE("curvature safeguard") {
  CHECK(curvature_safeguard(vec({1, 0}), vec({1, 0}), 1e-8) == vec({1, 0}));
  CHECK(curvature_safeguard(vec({0, 1}), vec({1, 0}), 0.5) == vec({0.5, 1}));
  CHECK(curvature_safeguard(vec({-1, 0}), vec({1, 0}), 0.5) == vec({0.5, 0}));
  CHECK_THROWS_AS(curvature_safeguard(vec({1, 0}), vec({0, 0}), 0.5), DegenerateDisplacement);
}

TEST_CASE("curvature safeguard meets h on random pairs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector s = oracle::random_vector(6, -1, 1, rng);
    const Vector y = oracle::random_vector(6, -1e3, 1e3, rng);
    const double h = std::pow(10.0, -static_cast<double>(rng() % 12));
    const Vector out = curvature_safeguard(s, y, h);
    CHECK(out.dot(y) / y.squaredNorm() >= h);
  }
}

TEST_CASE("skip test") {
  CHECK_FALSE(skip_update_test(vec({1, 0}), vec({1, 0}), 1e-12));
  CHECK(skip_update_test(vec({1, 0}), vec({0, 1}), 1e-12));
  CHECK_THROWS_AS(skip_update_test(vec({0, 0}), vec({0, 1}), 1e-12), DegenerateDisplacement);
}

TEST_CASE("quadratic trajectory never triggers the skip test") {
  std::mt19937_64 rng(4);
  const Matrix a = oracle::random_spd(6, 0.5, 4.0, rng);
  Vector w = oracle::random_vector(6, -1, 1, rng);
  DenseInverseHessian<double> b(6);
  for (int t = 0; t < 20; ++t) {
    const Vector g = a * w;
    if (g.norm() < 1e-12) break;
    const Vector p = -b.apply(g);
    const double eta = -g.dot(p) / p.dot(a * p);
    const Vector s = eta * p;
    const Vector y = a * s;
    CHECK_FALSE(skip_update_test(s, y, 1e-12));
    b.update(DisplacementPair<double>::make(s, y));
    w += s;
  }
}

TEST_CASE("LBFGS matches dense for up to m pairs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 1 + static_cast<Index>(rng() % 20);
    const Index m = 1 + static_cast<Index>(rng() % 10);
    const Matrix a = oracle::random_spd(d, 0.1, 10.0, rng);
    DenseInverseHessian<double> dense(d);
    LbfgsInverseHessian<double> lbfgs(d, m);
    for (Index k = 0; k < m; ++k) {
      const Vector s = oracle::random_vector(d, -1, 1, rng);
      const auto pair = DisplacementPair<double>::make(s, a * s);
      dense.update(pair);
      lbfgs.update(pair);
      CHECK(lbfgs.size() <= m);
    }
    const Vector v = oracle::random_vector(d, -1, 1, rng);
    const Vector ref = dense.apply(v);
    CHECK((lbfgs.apply(v) - ref).norm() <= 1e-8 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("LBFGS buffer drops the oldest pair") {
  LbfgsInverseHessian<double> b(2, 2);
  b.update(DisplacementPair<double>::make(vec({1, 0}), vec({1, 0})));
  b.update(DisplacementPair<double>::make(vec({0, 1}), vec({0, 2})));
  b.update(DisplacementPair<double>::make(vec({1, 1}), vec({3, 3})));
  REQUIRE(b.size() == 2);
  CHECK(b.pairs().front().s == vec({0, 1}));
  b.reset();
  CHECK(b.size() == 0);
  CHECK_THROWS(LbfgsInverseHessian<double>(2, 0));
}

TEST_CASE("scaled initial matrix uses the newest pair") {
  LbfgsInverseHessian<double> b(2, 3, true);
  b.update(DisplacementPair<double>::make(vec({1, 0}), vec({4, 0})));
  CHECK(b.apply(vec({0, 1})).isApprox(vec({0, 0.25})));
}

TEST_CASE("apply is linear") {
  std::mt19937_64 rng(6);
  const Matrix a = oracle::random_spd(5, 0.1, 10.0, rng);
  auto dense = InverseHessian<double>::dense(5);
  auto lbfgs = InverseHessian<double>::limited_memory(5, 3);
  for (int k = 0; k < 5; ++k) {
    const Vector s = oracle::random_vector(5, -1, 1, rng);
    const auto pair = DisplacementPair<double>::make(s, a * s);
    dense.update(pair);
    lbfgs.update(pair);
  }
  const Vector u = oracle::random_vector(5, -1, 1, rng);
  const Vector v = oracle::random_vector(5, -1, 1, rng);
  for (const auto* m : {&dense, &lbfgs}) {
    const Vector lhs = m->apply(2.5 * u - 0.75 * v);
    const Vector rhs = 2.5 * m->apply(u) - 0.75 * m->apply(v);
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
  }
  CHECK(dense.is_dense());
  CHECK(dense.as_dense() != nullptr);
  CHECK(lbfgs.as_limited_memory() != nullptr);
  CHECK(lbfgs.as_limited_memory()->size() == 3);
}

TEST_CASE("dimension mismatches are reported") {
  DenseInverseHessian<double> b(3);
  CHECK_THROWS_AS(b.apply(vec({1, 2})), DimensionError);
  CHECK_THROWS_AS(DenseInverseHessian<double>(Matrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(curvature_safeguard(vec({1, 2}), vec({1}), 0.1), DimensionError);
}

TEST_CASE("single precision instantiation") {
  DenseInverseHessian<float> b(2);
  VectorX<float> s(2), y(2);
  s << 1.0f, 0.0f;
  y << 2.0f, 0.0f;
  b.update(DisplacementPair<float>::make(s, y));
  CHECK(b.apply(y).isApprox(s));
}
