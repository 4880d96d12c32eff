#include "oracles.hpp"

#include "subbfgs/analytic.hpp"
#include "subbfgs/hinge.hpp"
#include "subbfgs/logistic.hpp"

#include <doctest.h>

#include <memory>
#include <set>

using namespace subbfgs;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

SparseMatrix sparse(const Matrix& m) {
  SparseMatrix s = m.sparseView();
  s.makeCompressed();
  return s;
}

struct Named {
  std::string name;
  std::unique_ptr<Objective> obj;
  Vector w;
};

// One instance of every objective at a point with kinks.
std::vector<Named> zoo(std::mt19937_64& rng) {
  std::vector<Named> out;
  const SparseMatrix x = oracle::random_integer_design(12, 3, 0.8, 2, rng);
  Vector z(12);
  for (Index i = 0; i < 12; ++i) z[i] = i % 2 ? 1.0 : -1.0;
  out.push_back({"binary", std::make_unique<BinaryHinge>(x, z, 0.3), vec({0, 0, 0})});
  out.push_back({"binary margin", std::make_unique<BinaryHinge>(x, z, 0.3), vec({1, 0, -1})});
  std::vector<Index> labels;
  std::vector<std::vector<Index>> sets;
  for (Index i = 0; i < 12; ++i) {
    labels.push_back(i % 3);
    sets.push_back(i % 2 ? std::vector<Index>{i % 3} : std::vector<Index>{0, 2});
  }
  out.push_back({"multiclass", std::make_unique<MulticlassHinge>(x, labels, 3, 0.2),
                 Vector::Zero(9)});
  out.push_back({"multiclass int", std::make_unique<MulticlassHinge>(x, labels, 3, 0.2),
                 vec({1, 0, -1, 0, 1, 0, -1, 0, 0})});
  out.push_back({"multilabel", std::make_unique<MultilabelHinge>(x, sets, 3, 0.2),
                 Vector::Zero(9)});
  out.push_back({"l1 logistic", std::make_unique<L1Logistic>(x, z, 0.1), vec({0, 0.5, 0})});
  out.push_back({"toy", std::make_unique<ToyAbs>(), vec({0, 0})});
  out.push_back({"toy x-kink", std::make_unique<ToyAbs>(), vec({0, 1})});
  out.push_back({"wolfe", std::make_unique<Wolfe75>(), vec({0, 0})});
  out.push_back({"wolfe y-kink", std::make_unique<Wolfe75>(), vec({-1, 0})});
  out.push_back({"wolfe smooth", std::make_unique<Wolfe75>(), vec({2, 1})});
  out.push_back({"hul", std::make_unique<PiecewiseMax>(hul_counterexample()), vec({0, 0})});
  out.push_back({"lo", std::make_unique<PiecewiseMax>(lo_counterexample()),
                 vec({0, -1})});
  return out;
}

}  // namespace

TEST_CASE("binary hinge values by hand") {
  const BinaryHinge obj(sparse(vec({1})), vec({1}), 1.0);
  CHECK(obj.value(vec({0})) == 1.0);
  CHECK(obj.value(vec({2})) == 2.0);
  CHECK(obj.value(vec({1})) == 0.5);
  CHECK(obj.margin_set(vec({1})) == std::vector<Index>{0});
  CHECK(obj.margin_set(vec({0})).empty());
}

TEST_CASE("binary hinge sup subgradient by hand") {
  const BinaryHinge obj(sparse(vec({1})), vec({1}), 1.0);
  const auto a = obj.sup_subgradient(vec({0}), vec({1}));
  CHECK(a.g == vec({-1}));
  CHECK(a.value == -1.0);
  const auto b = obj.sup_subgradient(vec({1}), vec({-1}));
  CHECK(b.g == vec({0}));
  CHECK(b.value == 0.0);
}

TEST_CASE("binary hinge random subgradient covers both margin choices") {
  const BinaryHinge obj(sparse(vec({1})), vec({1}), 1.0);
  std::set<double> seen;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    seen.insert(obj.any_subgradient(vec({1}), rng)[0]);
  }
  CHECK(seen == std::set<double>{0.0, 1.0});
}

TEST_CASE("differentiable points give the gradient regardless of seed and direction") {
  std::mt19937_64 rng(21);
  const SparseMatrix x = oracle::random_integer_design(10, 4, 0.8, 3, rng);
  Vector z(10);
  for (Index i = 0; i < 10; ++i) z[i] = i % 3 ? 1.0 : -1.0;
  const BinaryHinge obj(x, z, 0.1);
  const Vector w = oracle::random_vector(4, -1, 1, rng);
  REQUIRE(obj.margin_set(w).empty());
  Rng r0(0);
  const Vector g = obj.any_subgradient(w, r0);
  for (int k = 0; k < 10; ++k) {
    Rng rk(static_cast<std::uint64_t>(k) + 1);
    CHECK(obj.any_subgradient(w, rk) == g);
    const Vector p = oracle::random_vector(4, -1, 1, rng);
    const auto s = obj.sup_subgradient(w, p);
    CHECK(s.g == g);
    CHECK(s.value == doctest::Approx(g.dot(p)).epsilon(1e-14));
  }
}

TEST_CASE("multiclass with one class is pure regularization") {
  const MulticlassHinge obj(sparse(vec({1, 2})), {0, 0}, 1, 0.5);
  const Vector w = vec({3});
  CHECK(obj.value(w) == doctest::Approx(0.25 * 9));
  CHECK(obj.sup_subgradient(w, vec({1})).g == 0.5 * w);
}

TEST_CASE("multiclass at zero picks the other label") {
  Matrix xm(1, 2);
  xm << 1, 2;
  const MulticlassHinge obj(sparse(xm), {0}, 2, 1.0);
  const Vector w = Vector::Zero(4);
  CHECK(obj.value(w) == 1.0);
  const Vector p = vec({0.3, -0.2, 0.1, 0.7});
  // Only z = 1 attains the maximal loss, so g = phi(x, 1) - phi(x, 0).
  CHECK(obj.sup_subgradient(w, p).g == vec({-1, -2, 1, 2}));
}

TEST_CASE("multilabel with all labels and zero label loss has no loss") {
  Matrix xm(2, 2);
  xm << 1, -1, 0.5, 2;
  const MultilabelHinge obj(sparse(xm), {{0, 1, 2}, {0, 1, 2}}, 3, 1.0, Matrix::Zero(3, 3));
  std::mt19937_64 rng(22);
  const Vector w = oracle::random_vector(6, -1, 1, rng);
  CHECK(obj.value(w) == doctest::Approx(0.5 * w.squaredNorm()));
  CHECK(obj.pairs(0).size() == 3);
}

TEST_CASE("multilabel value equals brute-force pair maximum") {
  Matrix xm(1, 2);
  xm << 1.5, -0.5;
  const std::vector<std::vector<Index>> sets{{0, 1}};
  const Matrix delta = uniform_label_loss(3);
  const MultilabelHinge obj(sparse(xm), sets, 3, 0.1);
  std::mt19937_64 rng(23);
  for (int k = 0; k < 20; ++k) {
    const Vector w = oracle::random_vector(6, -1, 1, rng);
    CHECK(obj.value(w) == doctest::Approx(oracle::multilabel_value(xm, sets, 3, 0.1, delta, w)));
  }
  const auto pairs = obj.pairs(0);
  const std::vector<std::pair<Index, Index>> expected{{0, 0}, {0, 2}, {1, 1}, {1, 2}};
  CHECK(pairs == expected);
}

TEST_CASE("singleton multilabel equals multiclass bitwise") {
  std::mt19937_64 rng(24);
  const SparseMatrix x = oracle::random_integer_design(6, 3, 0.8, 3, rng);
  const std::vector<Index> labels{0, 1, 2, 0, 2, 1};
  std::vector<std::vector<Index>> sets;
  for (Index l : labels) sets.push_back({l});
  const MulticlassHinge mc(x, labels, 3, 0.2);
  const MultilabelHinge ml(x, sets, 3, 0.2);
  for (int k = 0; k < 20; ++k) {
    const Vector w = k % 2 ? Vector::Zero(9) : oracle::random_vector(9, -1, 1, rng);
    const Vector p = oracle::random_vector(9, -1, 1, rng);
    CHECK(mc.value(w) == ml.value(w));
    const auto a = mc.sup_subgradient(w, p);
    const auto b = ml.sup_subgradient(w, p);
    CHECK(a.g == b.g);
    CHECK(a.value == b.value);
    const Matrix sc = mc.scores(w);
    const Matrix dir = mc.scores(p);
    for (Index i = 0; i < 6; ++i) {
      const auto la = mc.example_lines(sc, dir, i);
      const auto lb = ml.example_lines(sc, dir, i);
      CHECK(la.a == lb.a);
      CHECK(la.b == lb.b);
    }
  }
}

TEST_CASE("label loss validation") {
  CHECK(uniform_label_loss(3, 2.0) == Matrix::Constant(3, 3, 2.0) - 2.0 * Matrix::Identity(3, 3));
  const SparseMatrix x = sparse(vec({1, 1}));
  Matrix bad = uniform_label_loss(2);
  bad(0, 0) = 1.0;
  CHECK_THROWS(MulticlassHinge(x, {0, 1}, 2, 0.1, bad));
  CHECK_THROWS(MulticlassHinge(x, {0, 2}, 2, 0.1));
  CHECK_THROWS(MultilabelHinge(x, {{0}, {}}, 2, 0.1));
  CHECK_THROWS(BinaryHinge(x, vec({1, 0}), 0.1));
  CHECK_THROWS(BinaryHinge(x, vec({1, -1}), 0.0));
}

TEST_CASE("L1 logistic sup subgradient at zero uses the sign of p") {
  Matrix xm(2, 2);
  xm << 1, 0, 0, 1;
  const L1Logistic obj(sparse(xm), vec({1, -1}), 0.1);
  const Vector w = Vector::Zero(2);
  const Vector p = vec({1, -1});
  const auto s = obj.sup_subgradient(w, p);
  CHECK((s.g - obj.loss_gradient(w)).isApprox(vec({0.1, -0.1})));
  CHECK(s.value == doctest::Approx(s.g.dot(p)));
}

TEST_CASE("L1 logistic away from zero is differentiable") {
  std::mt19937_64 rng(25);
  const auto data = oracle::synthetic_binary(30, 5, 0.8, 0.1, rng);
  const L1Logistic obj(data.x, data.z, 0.05);
  const Vector w = vec({0.5, -0.25, 1, -1, 0.1});
  const Vector p = oracle::random_vector(5, -1, 1, rng);
  Rng r(0);
  const Vector g = obj.any_subgradient(w, r);
  CHECK(obj.sup_subgradient(w, p).g.isApprox(g));
  const Matrix xd = oracle::dense(data.x);
  CHECK(obj.value(w) == doctest::Approx(oracle::l1_logistic_value(xd, data.z, 0.05, w)));
}

TEST_CASE("logistic loss is stable for large margins") {
  CHECK(logistic_loss(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(logistic_loss(1000.0) >= 0.0);
  CHECK(logistic_loss(1000.0) < 1e-300);
  CHECK(logistic_loss(-1000.0) == doctest::Approx(1000.0));
  CHECK(logistic_loss_derivative(-1000.0) == -1.0);
  CHECK(logistic_loss_derivative(0.0) == -0.5);
  CHECK(std::isfinite(logistic_loss_derivative(1000.0)));
}

TEST_CASE("analytic functions by hand") {
  const ToyAbs toy;
  const auto s = toy.sup_subgradient(vec({0, 1}), vec({1, 0}));
  CHECK(s.value == 10.0);
  CHECK(s.g == vec({10, 1}));

  const PiecewiseMax hul = hul_counterexample();
  std::mt19937_64 rng(26);
  for (int k = 0; k < 20; ++k) {
    const Vector w = oracle::random_vector(2, -200, 200, rng);
    const double ref = std::max({-100.0, 2 * w[0] + 3 * w[1], -2 * w[0] + 3 * w[1],
                                 5 * w[0] + 2 * w[1], -5 * w[0] + 2 * w[1]});
    CHECK(hul.value(w) == ref);
  }

  const PiecewiseMax lo = lo_counterexample();
  CHECK(lo.active(vec({0, -1})) == std::vector<Index>{0, 1});
  CHECK(lo.sup_subgradient(vec({0, -1}), vec({0, -1})).value == -1.0);

  const Wolfe75 wolfe;
  CHECK(wolfe.value(vec({2, 1})) == doctest::Approx(5 * std::sqrt(36.0 + 16.0)));
  CHECK(wolfe.value(vec({-1, 2})) == 23.0);
  CHECK(wolfe.sup_subgradient(vec({-1, 0}), vec({0, -1})).g == vec({9, -16}));
  // Along -x at the origin the ellipse cap is maximized on its chord.
  const auto origin = wolfe.sup_subgradient(vec({0, 0}), vec({-1, 0}));
  CHECK(origin.value == -9.0);
}

TEST_CASE("counterexample registry") {
  for (const auto& name : counterexample_names()) {
    const Counterexample c = make_counterexample(name);
    CHECK(c.name == name);
    CHECK(c.start.size() == 2);
    CHECK(std::isfinite(c.objective->value(c.start)));
  }
  CHECK_THROWS(make_counterexample("nope"));
}

TEST_CASE("every oracle returns valid subgradients") {
  std::mt19937_64 rng(27);
  for (const auto& item : zoo(rng)) {
    CAPTURE(item.name);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng r(seed);
      const Vector g = item.obj->any_subgradient(item.w, r);
      CHECK(oracle::min_subgradient_slack(*item.obj, item.w, g, 100, 1.0, rng) >= -1e-9);
      const Vector p = oracle::random_vector(item.obj->dim(), -1, 1, rng);
      const Vector gs = item.obj->sup_subgradient(item.w, p).g;
      CHECK(oracle::min_subgradient_slack(*item.obj, item.w, gs, 100, 1.0, rng) >= -1e-9);
    }
  }
}

TEST_CASE("sup oracle dominates random subgradients") {
  std::mt19937_64 rng(28);
  for (const auto& item : zoo(rng)) {
    CAPTURE(item.name);
    const Vector p = oracle::random_vector(item.obj->dim(), -1, 1, rng);
    const auto s = item.obj->sup_subgradient(item.w, p);
    CHECK(std::abs(s.value - s.g.dot(p)) <= 1e-12 * std::max(1.0, std::abs(s.value)));
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng r(seed);
      CHECK(s.value >= item.obj->any_subgradient(item.w, r).dot(p) - 1e-12);
    }
  }
}

TEST_CASE("thread count does not change results") {
  std::mt19937_64 rng(29);
  const auto data = oracle::synthetic_binary(5000, 12, 0.3, 0.1, rng);
  const BinaryHinge one(data.x, data.z, 1e-3, 1);
  const BinaryHinge four(data.x, data.z, 1e-3, 4);
  const L1Logistic lone(data.x, data.z, 1e-3, 1);
  const L1Logistic lfour(data.x, data.z, 1e-3, 4);
  const Vector w = oracle::random_vector(12, -1, 1, rng);
  const Vector p = oracle::random_vector(12, -1, 1, rng);
  CHECK(one.value(w) == four.value(w));
  CHECK(one.sup_subgradient(w, p).g == four.sup_subgradient(w, p).g);
  CHECK(lone.value(w) == lfour.value(w));
  CHECK(lone.sup_subgradient(w, p).g == lfour.sup_subgradient(w, p).g);
  const Vector a = row_products(data.x, w, 1);
  const Vector b = row_products(data.x, w, 3);
  CHECK(a == b);
}
