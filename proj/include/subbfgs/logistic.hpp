#pragma once

#include "subbfgs/objective.hpp"

namespace subbfgs {

/// Coordinates with |w_j| at or below this are treated as sitting on the
/// kink of |w_j|.
inline constexpr double kL1KinkTolerance = 1e-12;

/// J(w) = lambda |w|_1 + (1/n) sum_i log(1 + exp(-z_i w'x_i)).
class L1Logistic final : public Objective {
 public:
  L1Logistic(SparseMatrix x, Vector z, double lambda, int threads = 1);

  Index dim() const override { return x_.cols(); }
  double value(const Vector& w) const override;
  Vector any_subgradient(const Vector& w, Rng& rng) const override;
  SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const override;

  /// Exact minimization along p: walks the kinks of the L1 term in order and
  /// bisects the smooth derivative inside the segment holding the minimum.
  std::optional<LineSearchResult> exact_step(const Vector& w, const Vector& p) const override;
  bool has_exact_step() const override { return true; }

  /// Gradient of the logistic part alone.
  Vector loss_gradient(const Vector& w) const;
  double loss_value(const Vector& w) const;

  const SparseMatrix& design() const { return x_; }
  const Vector& labels() const { return z_; }
  double lambda() const { return lambda_; }

 private:
  SparseMatrix x_;
  Vector z_;
  double lambda_;
  int threads_;
};

/// log(1 + exp(-m)) without overflow for large |m|.
double logistic_loss(double margin);
/// d/dm log(1 + exp(-m)) = -1 / (1 + exp(m)).
double logistic_loss_derivative(double margin);

}  // namespace subbfgs
