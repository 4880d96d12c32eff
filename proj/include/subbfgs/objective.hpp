#pragma once

#include "subbfgs/linalg.hpp"

#include <optional>
#include <random>
#include <string>

namespace subbfgs {

using Rng = std::mt19937_64;

/// A subgradient g attaining sup_{g in dJ(w)} g'p, together with g'p.
struct SupSubgradient {
  Vector g;
  double value = 0.0;
};

enum class StepStatus {
  ok,
  unbounded,    // the restriction decreases without bound along p
  not_descent,  // sup dPhi(0) >= 0, so no positive step decreases J
};

struct LineSearchResult {
  double step = 0.0;
  StepStatus status = StepStatus::ok;
};

/// Convex objective with value, arbitrary-subgradient and argsup oracles.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& w) const = 0;

  /// Some element of dJ(w); where the subdifferential is not a singleton
  /// the choice among extreme points is drawn from `rng`.
  virtual Vector any_subgradient(const Vector& w, Rng& rng) const = 0;

  virtual SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const = 0;

  /// Minimizer of J(w + eta p) over eta >= 0 when the objective provides an
  /// exact line search; nullopt otherwise.
  virtual std::optional<LineSearchResult> exact_step(const Vector& /*w*/,
                                                     const Vector& /*p*/) const {
    return std::nullopt;
  }

  virtual bool has_exact_step() const { return false; }
};

/// out += X' * coeffs, visiting rows in order so the sum is reproducible.
void add_transpose_product(const SparseMatrix& x, const Vector& coeffs, Vector& out);

}  // namespace subbfgs
