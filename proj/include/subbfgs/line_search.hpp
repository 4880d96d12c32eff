#pragma once

// Step-size selection: subgradient Wolfe checks, a backtracking fallback,
// and exact searches for piecewise-quadratic restrictions of hinge losses.

#include "subbfgs/objective.hpp"
#include "subbfgs/segmentation.hpp"

#include <vector>

namespace subbfgs {

struct WolfeParams {
  double c1 = 1e-4;
  double c2 = 0.9;

  void validate() const;
};

struct WolfeCheck {
  bool sufficient_decrease = false;
  bool curvature = false;

  bool both() const { return sufficient_decrease && curvature; }
};

/// Wolfe conditions from already evaluated quantities: objective and sup
/// directional derivative before (j0, sup0) and after (j1, sup1) the step.
/// A few ulps of slack on the decrease test absorb rounding in J.
WolfeCheck wolfe_conditions(double j0, double sup0, double j1, double sup1, double eta,
                            const WolfeParams& params);

WolfeCheck check_wolfe(const Objective& obj, const Vector& w, const Vector& p, double eta,
                       const WolfeParams& params);

struct BacktrackingOptions {
  double initial_step = 1.0;
  double decay = 0.9;
  int max_trials = 100;
};

/// Grows the trial step until the curvature condition holds, then decays it
/// until both conditions hold. Returns status not_descent if p is not a
/// descent direction and throws LineSearchError when the budget runs out.
LineSearchResult backtracking_search(const Objective& obj, const Vector& w, const Vector& p,
                                     const WolfeParams& params,
                                     const BacktrackingOptions& options = {});

class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Restriction of the L2-regularized binary hinge objective to w + eta p,
/// built from cached margins f = z.Xw and their change df = z.Xp.
class BinaryLineRestriction {
 public:
  BinaryLineRestriction(Vector f, Vector df, double lambda, double w_sq, double w_dot_p,
                        double p_sq);

  double value(double eta) const;
  /// Largest and smallest element of dPhi(eta).
  double right_slope(double eta) const;
  double left_slope(double eta) const;

  Index examples() const { return f_.size(); }
  const Vector& margins() const { return f_; }
  const Vector& margin_changes() const { return df_; }
  double lambda() const { return lambda_; }
  double w_sq() const { return w_sq_; }
  double w_dot_p() const { return w_dot_p_; }
  double p_sq() const { return p_sq_; }

  /// Location where example i's hinge becomes nondifferentiable; only
  /// meaningful when df_i != 0.
  double hinge(Index i) const { return (1.0 - f_[i]) / df_[i]; }

 private:
  Vector f_;
  Vector df_;
  double lambda_;
  double w_sq_;
  double w_dot_p_;
  double p_sq_;
};

/// Walks the sorted hinge points updating the slope in O(1) per hinge.
LineSearchResult binary_exact_search(const BinaryLineRestriction& r);

/// Phi(eta) = c0 + c1 eta + (h/2) eta^2 + sum_t weight_t max_k (b_tk + eta a_tk)
/// over eta >= 0, with each max stored as its upper envelope on [0, inf).
class PiecewiseLineRestriction {
 public:
  PiecewiseLineRestriction(double constant, double linear, double quadratic);

  void add_term(const LineSet<double>& lines, double weight);
  void reserve(Index terms, Index segments);

  Index terms() const { return static_cast<Index>(weight_.size()); }
  Index segments(Index term) const { return start_[term + 1] - start_[term]; }
  double breakpoint(Index term, Index seg) const { return breaks_[start_[term] + seg]; }

  double value(double eta) const;
  double right_slope(double eta) const;
  double left_slope(double eta) const;

  double constant() const { return c0_; }
  double linear() const { return c1_; }
  double quadratic() const { return h_; }

  /// Merges the per-term breakpoint streams with a binary heap and returns
  /// the first breakpoint past the minimum or the interior stationary point
  /// before it.
  LineSearchResult minimize() const;

  /// Sequence of sup dPhi values at the breakpoints visited by minimize().
  std::vector<double> walk_slopes() const;

 private:
  Index segment_at(Index term, double eta, bool from_left) const;
  LineSearchResult walk(std::vector<double>* visited) const;

  double c0_;
  double c1_;
  double h_;
  std::vector<double> weight_;
  std::vector<Index> start_{0};
  std::vector<double> breaks_;
  std::vector<double> slopes_;
  std::vector<double> offsets_;
};

// Kept for callers that think of the restriction in multiclass terms.
using MulticlassLineRestriction = PiecewiseLineRestriction;

}  // namespace subbfgs
