#include "subbfgs/hinge.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace subbfgs {

namespace {

void require_examples(const SparseMatrix& x) {
  if (x.rows() < 1) throw std::invalid_argument("objective needs at least one example");
}

Matrix checked_label_loss(Matrix delta, Index classes) {
  if (delta.size() == 0) return uniform_label_loss(classes);
  if (delta.rows() != classes || delta.cols() != classes) {
    throw DimensionError("label loss must be K x K");
  }
  for (Index a = 0; a < classes; ++a) {
    if (delta(a, a) != 0.0) throw std::invalid_argument("label loss diagonal must be zero");
    for (Index b = 0; b < classes; ++b) {
      if (!(delta(a, b) >= 0.0)) throw std::invalid_argument("label loss must be nonnegative");
    }
  }
  return delta;
}

Matrix block_scores(const SparseMatrix& x, const Vector& w, Index classes, int threads) {
  require_size(w.size(), x.cols() * classes, "label objective");
  const Matrix wm = Eigen::Map<const Matrix>(w.data(), x.cols(), classes);
  return row_products(x, wm, threads);
}

// Shared engine for the multiclass and multilabel losses. `Pairs` yields the
// admissible (z, z') pairs of an example in a fixed order; the multiclass
// loss is the special case z = z_i. Keeping a single code path makes the two
// objectives agree bit for bit when every label set is a singleton.
struct PairChoice {
  Index z;
  Index zp;
};

template <typename Pairs>
double pair_loss(const Matrix& delta, const Matrix& s, Index i, const Pairs& pairs) {
  double best = -std::numeric_limits<double>::infinity();
  pairs(i, [&](Index z, Index zp) {
    const double b = (delta(zp, z) + s(i, zp)) - s(i, z);
    if (b > best) best = b;
  });
  return best;
}

template <typename Pairs>
double pair_value(const Vector& w, double lambda, const Matrix& delta, const Matrix& s,
                  const Pairs& pairs) {
  const Index n = s.rows();
  double loss = 0.0;
  for (Index i = 0; i < n; ++i) loss += pair_loss(delta, s, i, pairs);
  return 0.5 * lambda * w.squaredNorm() + loss / static_cast<double>(n);
}

// Steepest worst pair along p (ties to the first pair in enumeration order).
template <typename Pairs>
PairChoice steepest_pair(const Matrix& delta, const Matrix& s, const Matrix& dir, Index i,
                         const Pairs& pairs) {
  const double best = pair_loss(delta, s, i, pairs);
  PairChoice choice{-1, -1};
  double slope = -std::numeric_limits<double>::infinity();
  pairs(i, [&](Index z, Index zp) {
    const double b = (delta(zp, z) + s(i, zp)) - s(i, z);
    if (best - b > kArgmaxTolerance) return;
    const double a = dir(i, zp) - dir(i, z);
    if (a > slope) {
      slope = a;
      choice = {z, zp};
    }
  });
  return choice;
}

template <typename Pairs>
PairChoice random_worst_pair(const Matrix& delta, const Matrix& s, Index i, const Pairs& pairs,
                             Rng& rng) {
  const double best = pair_loss(delta, s, i, pairs);
  std::vector<PairChoice> worst;
  pairs(i, [&](Index z, Index zp) {
    const double b = (delta(zp, z) + s(i, zp)) - s(i, z);
    if (best - b <= kArgmaxTolerance) worst.push_back({z, zp});
  });
  std::uniform_int_distribution<std::size_t> pick(0, worst.size() - 1);
  return worst[pick(rng)];
}

Vector pair_gradient(const SparseMatrix& x, const Vector& w, double lambda,
                     const std::vector<PairChoice>& choice) {
  const Index d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Vector g = lambda * w;
  for (Index i = 0; i < x.rows(); ++i) {
    const auto [z, zp] = choice[static_cast<std::size_t>(i)];
    if (z == zp) continue;
    for (SparseMatrix::InnerIterator it(x, i); it; ++it) {
      g[zp * d + it.col()] += it.value() * inv_n;
      g[z * d + it.col()] -= it.value() * inv_n;
    }
  }
  return g;
}

template <typename Pairs>
LineSet<double> pair_lines(const Matrix& delta, const Matrix& s, const Matrix& dir, Index i,
                           const Pairs& pairs) {
  LineSet<double> lines;
  pairs(i, [&](Index z, Index zp) {
    lines.b.push_back((delta(zp, z) + s(i, zp)) - s(i, z));
    lines.a.push_back(dir(i, zp) - dir(i, z));
  });
  return lines;
}

}  // namespace

// ---------------------------------------------------------------- binary

BinaryHinge::BinaryHinge(SparseMatrix x, Vector z, double lambda, int threads)
    : x_(std::move(x)), z_(std::move(z)), lambda_(lambda), threads_(threads) {
  require_examples(x_);
  require_size(z_.size(), x_.rows(), "BinaryHinge labels");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("lambda must be positive");
  for (Index i = 0; i < z_.size(); ++i) {
    if (z_[i] != 1.0 && z_[i] != -1.0) {
      throw std::invalid_argument("binary labels must be -1 or +1");
    }
  }
  x_.makeCompressed();
}

Vector BinaryHinge::margins(const Vector& w) const {
  require_size(w.size(), dim(), "BinaryHinge");
  return z_.cwiseProduct(row_products(x_, w, threads_));
}

std::vector<Index> BinaryHinge::margin_set(const Vector& w) const {
  const Vector f = margins(w);
  std::vector<Index> m;
  for (Index i = 0; i < f.size(); ++i) {
    if (std::abs(1.0 - f[i]) <= kMarginTolerance) m.push_back(i);
  }
  return m;
}

double BinaryHinge::value(const Vector& w) const {
  const Vector f = margins(w);
  double loss = 0.0;
  for (Index i = 0; i < f.size(); ++i) loss += std::max(0.0, 1.0 - f[i]);
  return 0.5 * lambda_ * w.squaredNorm() + loss / static_cast<double>(f.size());
}

Vector BinaryHinge::base_gradient(const Vector& w, const Vector& f, Vector& coeffs) const {
  const double inv_n = 1.0 / static_cast<double>(f.size());
  coeffs = Vector::Zero(f.size());
  for (Index i = 0; i < f.size(); ++i) {
    if (1.0 - f[i] > kMarginTolerance) coeffs[i] = -z_[i] * inv_n;
  }
  return lambda_ * w;
}

Vector BinaryHinge::any_subgradient(const Vector& w, Rng& rng) const {
  const Vector f = margins(w);
  Vector coeffs;
  Vector g = base_gradient(w, f, coeffs);
  const double inv_n = 1.0 / static_cast<double>(f.size());
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < f.size(); ++i) {
    if (std::abs(1.0 - f[i]) <= kMarginTolerance && coin(rng)) coeffs[i] = -z_[i] * inv_n;
  }
  add_transpose_product(x_, coeffs, g);
  return g;
}

SupSubgradient BinaryHinge::sup_subgradient(const Vector& w, const Vector& p) const {
  require_size(p.size(), dim(), "BinaryHinge direction");
  const Vector f = margins(w);
  Vector coeffs;
  Vector g = base_gradient(w, f, coeffs);
  const double inv_n = 1.0 / static_cast<double>(f.size());
  bool any_margin = false;
  for (Index i = 0; i < f.size(); ++i) any_margin |= std::abs(1.0 - f[i]) <= kMarginTolerance;
  if (any_margin) {
    const Vector df = z_.cwiseProduct(row_products(x_, p, threads_));
    for (Index i = 0; i < f.size(); ++i) {
      if (std::abs(1.0 - f[i]) <= kMarginTolerance && df[i] < 0.0) coeffs[i] = -z_[i] * inv_n;
    }
  }
  add_transpose_product(x_, coeffs, g);
  const double value = g.dot(p);
  return {std::move(g), value};
}

BinaryLineRestriction BinaryHinge::line_restriction(const Vector& w, const Vector& p) const {
  require_size(p.size(), dim(), "BinaryHinge direction");
  return BinaryLineRestriction(margins(w), z_.cwiseProduct(row_products(x_, p, threads_)),
                               lambda_, w.squaredNorm(), w.dot(p), p.squaredNorm());
}

std::optional<LineSearchResult> BinaryHinge::exact_step(const Vector& w, const Vector& p) const {
  return binary_exact_search(line_restriction(w, p));
}

// ---------------------------------------------------------------- multiclass

Matrix uniform_label_loss(Index classes, double tau) {
  Matrix delta = Matrix::Constant(classes, classes, tau);
  delta.diagonal().setZero();
  return delta;
}

MulticlassHinge::MulticlassHinge(SparseMatrix x, std::vector<Index> labels, Index classes,
                                 double lambda, Matrix label_loss, int threads)
    : x_(std::move(x)),
      labels_(std::move(labels)),
      classes_(classes),
      lambda_(lambda),
      delta_(checked_label_loss(std::move(label_loss), classes)),
      threads_(threads) {
  require_examples(x_);
  require_size(static_cast<Index>(labels_.size()), x_.rows(), "MulticlassHinge labels");
  if (classes_ < 1) throw std::invalid_argument("need at least one class");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("lambda must be positive");
  for (Index z : labels_) {
    if (z < 0 || z >= classes_) throw std::invalid_argument("class id out of range");
  }
  x_.makeCompressed();
}

Matrix MulticlassHinge::scores(const Vector& w) const {
  return block_scores(x_, w, classes_, threads_);
}

namespace {

struct MulticlassPairs {
  const std::vector<Index>& labels;
  Index classes;

  template <typename Fn>
  void operator()(Index i, Fn&& fn) const {
    const Index zi = labels[static_cast<std::size_t>(i)];
    for (Index zp = 0; zp < classes; ++zp) fn(zi, zp);
  }
};

struct MultilabelPairs {
  const std::vector<std::vector<Index>>& sets;
  const std::vector<std::vector<char>>& member;
  Index classes;

  template <typename Fn>
  void operator()(Index i, Fn&& fn) const {
    const auto& in = member[static_cast<std::size_t>(i)];
    for (Index z : sets[static_cast<std::size_t>(i)]) {
      for (Index zp = 0; zp < classes; ++zp) {
        if (zp == z || !in[static_cast<std::size_t>(zp)]) fn(z, zp);
      }
    }
  }
};

}  // namespace

double MulticlassHinge::value(const Vector& w) const {
  return pair_value(w, lambda_, delta_, scores(w), MulticlassPairs{labels_, classes_});
}

Vector MulticlassHinge::any_subgradient(const Vector& w, Rng& rng) const {
  const Matrix s = scores(w);
  const MulticlassPairs pairs{labels_, classes_};
  std::vector<PairChoice> choice(static_cast<std::size_t>(x_.rows()));
  for (Index i = 0; i < x_.rows(); ++i) choice[i] = random_worst_pair(delta_, s, i, pairs, rng);
  return pair_gradient(x_, w, lambda_, choice);
}

SupSubgradient MulticlassHinge::sup_subgradient(const Vector& w, const Vector& p) const {
  const Matrix s = scores(w);
  const Matrix dir = block_scores(x_, p, classes_, threads_);
  const MulticlassPairs pairs{labels_, classes_};
  std::vector<PairChoice> choice(static_cast<std::size_t>(x_.rows()));
  for (Index i = 0; i < x_.rows(); ++i) choice[i] = steepest_pair(delta_, s, dir, i, pairs);
  Vector g = pair_gradient(x_, w, lambda_, choice);
  const double value = g.dot(p);
  return {std::move(g), value};
}

LineSet<double> MulticlassHinge::example_lines(const Matrix& s, const Matrix& dir,
                                               Index i) const {
  return pair_lines(delta_, s, dir, i, MulticlassPairs{labels_, classes_});
}

PiecewiseLineRestriction MulticlassHinge::line_restriction(const Vector& w,
                                                           const Vector& p) const {
  const Matrix s = scores(w);
  const Matrix dir = block_scores(x_, p, classes_, threads_);
  PiecewiseLineRestriction r(0.5 * lambda_ * w.squaredNorm(), lambda_ * w.dot(p),
                             lambda_ * p.squaredNorm());
  r.reserve(x_.rows(), x_.rows() * 2);
  const double inv_n = 1.0 / static_cast<double>(x_.rows());
  for (Index i = 0; i < x_.rows(); ++i) r.add_term(example_lines(s, dir, i), inv_n);
  return r;
}

std::optional<LineSearchResult> MulticlassHinge::exact_step(const Vector& w,
                                                            const Vector& p) const {
  return line_restriction(w, p).minimize();
}

// ---------------------------------------------------------------- multilabel

MultilabelHinge::MultilabelHinge(SparseMatrix x, std::vector<std::vector<Index>> label_sets,
                                 Index classes, double lambda, Matrix label_loss, int threads)
    : x_(std::move(x)),
      sets_(std::move(label_sets)),
      classes_(classes),
      lambda_(lambda),
      delta_(checked_label_loss(std::move(label_loss), classes)),
      threads_(threads) {
  require_examples(x_);
  require_size(static_cast<Index>(sets_.size()), x_.rows(), "MultilabelHinge label sets");
  if (classes_ < 1) throw std::invalid_argument("need at least one class");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("lambda must be positive");
  member_.reserve(sets_.size());
  for (auto& set : sets_) {
    if (set.empty()) throw std::invalid_argument("label sets must be nonempty");
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    std::vector<char> in(static_cast<std::size_t>(classes_), 0);
    for (Index z : set) {
      if (z < 0 || z >= classes_) throw std::invalid_argument("class id out of range");
      in[static_cast<std::size_t>(z)] = 1;
    }
    member_.push_back(std::move(in));
  }
  x_.makeCompressed();
}

Matrix MultilabelHinge::scores(const Vector& w) const {
  return block_scores(x_, w, classes_, threads_);
}

std::vector<std::pair<Index, Index>> MultilabelHinge::pairs(Index i) const {
  std::vector<std::pair<Index, Index>> out;
  MultilabelPairs{sets_, member_, classes_}(i, [&](Index z, Index zp) { out.emplace_back(z, zp); });
  return out;
}

double MultilabelHinge::value(const Vector& w) const {
  return pair_value(w, lambda_, delta_, scores(w), MultilabelPairs{sets_, member_, classes_});
}

Vector MultilabelHinge::any_subgradient(const Vector& w, Rng& rng) const {
  const Matrix s = scores(w);
  const MultilabelPairs pairs{sets_, member_, classes_};
  std::vector<PairChoice> choice(static_cast<std::size_t>(x_.rows()));
  for (Index i = 0; i < x_.rows(); ++i) choice[i] = random_worst_pair(delta_, s, i, pairs, rng);
  return pair_gradient(x_, w, lambda_, choice);
}

SupSubgradient MultilabelHinge::sup_subgradient(const Vector& w, const Vector& p) const {
  const Matrix s = scores(w);
  const Matrix dir = block_scores(x_, p, classes_, threads_);
  const MultilabelPairs pairs{sets_, member_, classes_};
  std::vector<PairChoice> choice(static_cast<std::size_t>(x_.rows()));
  for (Index i = 0; i < x_.rows(); ++i) choice[i] = steepest_pair(delta_, s, dir, i, pairs);
  Vector g = pair_gradient(x_, w, lambda_, choice);
  const double value = g.dot(p);
  return {std::move(g), value};
}

LineSet<double> MultilabelHinge::example_lines(const Matrix& s, const Matrix& dir,
                                               Index i) const {
  return pair_lines(delta_, s, dir, i, MultilabelPairs{sets_, member_, classes_});
}

PiecewiseLineRestriction MultilabelHinge::line_restriction(const Vector& w,
                                                           const Vector& p) const {
  const Matrix s = scores(w);
  const Matrix dir = block_scores(x_, p, classes_, threads_);
  PiecewiseLineRestriction r(0.5 * lambda_ * w.squaredNorm(), lambda_ * w.dot(p),
                             lambda_ * p.squaredNorm());
  r.reserve(x_.rows(), x_.rows() * 2);
  const double inv_n = 1.0 / static_cast<double>(x_.rows());
  for (Index i = 0; i < x_.rows(); ++i) r.add_term(example_lines(s, dir, i), inv_n);
  return r;
}

std::optional<LineSearchResult> MultilabelHinge::exact_step(const Vector& w,
                                                            const Vector& p) const {
  return line_restriction(w, p).minimize();
}

}  // namespace subbfgs
