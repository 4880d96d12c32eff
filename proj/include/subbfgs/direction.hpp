#pragma once

// Bundle search for a quasi-Newton descent direction: minimizes the model
// (1/2) p'B^{-1}p + sup_{g in dJ(w)} g'p by repeatedly querying the argsup
// oracle and mixing the returned subgradient into an aggregate.

#include "subbfgs/objective.hpp"
#include "subbfgs/quasi_newton.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace subbfgs {

struct DirectionOptions {
  double eps = 1e-5;
  int k_max = 50;
  bool record_history = false;
};

struct Descent {
  Vector p;
  double model_value = 0.0;
  int inner_iterations = 0;
  Vector gbar;          // aggregate subgradient paired with p (p = -B gbar)
  double sup_value = 0; // sup_{g in dJ(w)} g'p
  std::vector<double> eps_history;
  std::vector<double> mu_history;
};

struct DirectionFailure {
  Vector p;             // best direction found; not a descent direction
  double sup_value = 0;
  int inner_iterations = 0;
  std::vector<double> eps_history;
  std::vector<double> mu_history;
};

using DirectionResult = std::variant<Descent, DirectionFailure>;

using SupOracle = std::function<SupSubgradient(const Vector& p)>;

/// Model value p'g_next - (1/2) p'gbar, which equals the pseudo-quadratic
/// model at p = -B gbar when g_next attains the sup along p.
double model_value(double sup_value, const Vector& p, const Vector& gbar);

DirectionResult descent_direction(const SupOracle& sup, const InverseHessian<double>& b,
                                  const Vector& g1, const DirectionOptions& options = {});

/// Convenience overload querying `obj` at w.
DirectionResult descent_direction(const Objective& obj, const Vector& w,
                                  const InverseHessian<double>& b, const Vector& g1,
                                  const DirectionOptions& options = {});

}  // namespace subbfgs
