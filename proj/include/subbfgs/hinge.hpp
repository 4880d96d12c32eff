#pragma once

// L2-regularized hinge-loss risk minimization objectives.

#include "subbfgs/line_search.hpp"
#include "subbfgs/objective.hpp"

#include <vector>

namespace subbfgs {

/// Examples with |1 - z w'x| at most this far from the hinge count as
/// lying on the margin.
inline constexpr double kMarginTolerance = 1e-12;
/// Labels whose loss is within this of the maximum share the argmax.
inline constexpr double kArgmaxTolerance = 1e-12;

/// J(w) = (lambda/2)|w|^2 + (1/n) sum_i max(0, 1 - z_i w'x_i), z_i in {-1,+1}.
class BinaryHinge final : public Objective {
 public:
  BinaryHinge(SparseMatrix x, Vector z, double lambda, int threads = 1);

  Index dim() const override { return x_.cols(); }
  double value(const Vector& w) const override;
  Vector any_subgradient(const Vector& w, Rng& rng) const override;
  SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const override;
  std::optional<LineSearchResult> exact_step(const Vector& w, const Vector& p) const override;
  bool has_exact_step() const override { return true; }

  /// z .* Xw.
  Vector margins(const Vector& w) const;
  BinaryLineRestriction line_restriction(const Vector& w, const Vector& p) const;

  /// Indices with 1 - z w'x within the margin tolerance.
  std::vector<Index> margin_set(const Vector& w) const;

  const SparseMatrix& design() const { return x_; }
  const Vector& labels() const { return z_; }
  double lambda() const { return lambda_; }

 private:
  // lambda w - (1/n) sum over strict violators of z_i x_i, i.e. the part of
  // every subgradient that does not depend on the margin coefficients.
  Vector base_gradient(const Vector& w, const Vector& f, Vector& coeffs) const;

  SparseMatrix x_;
  Vector z_;
  double lambda_;
  int threads_;
};

/// Label-loss matrix indexed as delta(candidate, truth) with a zero diagonal.
Matrix uniform_label_loss(Index classes, double tau = 1.0);

/// J(w) = (lambda/2)|w|^2 + (1/n) sum_i max_z [D(z, z_i) + w_z'x_i - w_{z_i}'x_i]
/// with w stored as `classes` consecutive blocks of length d.
class MulticlassHinge final : public Objective {
 public:
  MulticlassHinge(SparseMatrix x, std::vector<Index> labels, Index classes, double lambda,
                  Matrix label_loss = {}, int threads = 1);

  Index dim() const override { return x_.cols() * classes_; }
  double value(const Vector& w) const override;
  Vector any_subgradient(const Vector& w, Rng& rng) const override;
  SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const override;
  std::optional<LineSearchResult> exact_step(const Vector& w, const Vector& p) const override;
  bool has_exact_step() const override { return true; }

  PiecewiseLineRestriction line_restriction(const Vector& w, const Vector& p) const;
  /// Lines (one per label) whose maximum is example i's loss along w + eta p.
  LineSet<double> example_lines(const Matrix& scores, const Matrix& directional,
                                Index i) const;

  Index classes() const { return classes_; }
  Index features() const { return x_.cols(); }
  const SparseMatrix& design() const { return x_; }
  const std::vector<Index>& labels() const { return labels_; }
  const Matrix& label_loss() const { return delta_; }
  double lambda() const { return lambda_; }

  /// n x K matrix of w_z'x_i.
  Matrix scores(const Vector& w) const;

 private:
  SparseMatrix x_;
  std::vector<Index> labels_;
  Index classes_;
  double lambda_;
  Matrix delta_;
  int threads_;
};

/// Multilabel analogue: the loss of example i maximizes
/// D(z', z) + w_{z'}'x_i - w_z'x_i over z in Z_i and z' not in Z_i \ {z}.
class MultilabelHinge final : public Objective {
 public:
  MultilabelHinge(SparseMatrix x, std::vector<std::vector<Index>> label_sets, Index classes,
                  double lambda, Matrix label_loss = {}, int threads = 1);

  Index dim() const override { return x_.cols() * classes_; }
  double value(const Vector& w) const override;
  Vector any_subgradient(const Vector& w, Rng& rng) const override;
  SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const override;
  std::optional<LineSearchResult> exact_step(const Vector& w, const Vector& p) const override;
  bool has_exact_step() const override { return true; }

  PiecewiseLineRestriction line_restriction(const Vector& w, const Vector& p) const;
  /// One line per admissible label pair of example i, pairs ordered by z
  /// then z'.
  LineSet<double> example_lines(const Matrix& scores, const Matrix& directional,
                                Index i) const;

  /// Admissible (z, z') pairs of example i in the order used everywhere.
  std::vector<std::pair<Index, Index>> pairs(Index i) const;

  Index classes() const { return classes_; }
  Index features() const { return x_.cols(); }
  const SparseMatrix& design() const { return x_; }
  const std::vector<std::vector<Index>>& label_sets() const { return sets_; }
  const Matrix& label_loss() const { return delta_; }
  double lambda() const { return lambda_; }

  Matrix scores(const Vector& w) const;

 private:
  SparseMatrix x_;
  std::vector<std::vector<Index>> sets_;
  std::vector<std::vector<char>> member_;
  Index classes_;
  double lambda_;
  Matrix delta_;
  int threads_;
};

}  // namespace subbfgs
