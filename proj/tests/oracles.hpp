#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code under test except objective value evaluation where noted.

#include "subbfgs/linalg.hpp"
#include "subbfgs/objective.hpp"
#include "subbfgs/segmentation.hpp"

#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using subbfgs::Index;
using subbfgs::Matrix;
using subbfgs::SparseMatrix;
using subbfgs::Vector;

/// Symmetric positive definite Q diag(lambda) Q' with eigenvalues drawn
/// uniformly from [lo, hi].
Matrix random_spd(Index d, double lo, double hi, std::mt19937_64& rng);

Vector random_vector(Index d, double lo, double hi, std::mt19937_64& rng);

/// Upper envelope on [lower, upper] by starting from the top line at lower
/// and repeatedly jumping to the nearest crossing of a steeper line.
/// Quadratic in the number of lines.
struct NaiveSegment {
  double start;
  Index line;
};
std::vector<NaiveSegment> naive_envelope(const subbfgs::LineSet<double>& lines, double lower,
                                         double upper);

double direct_max(const subbfgs::LineSet<double>& lines, double eta);

/// Minimum of a convex function on [0, inf): brackets by doubling, scans a
/// grid of `grid` points, then refines the best cell by golden section.
struct GridMin {
  double eta;
  double value;
};
GridMin grid_minimize(const std::function<double(double)>& phi, int grid = 10000);

/// Dense copy of a sparse matrix.
Matrix dense(const SparseMatrix& x);

/// Sparse matrix with small integer entries so that margins are exact.
SparseMatrix random_integer_design(Index n, Index d, double density, int max_abs,
                                   std::mt19937_64& rng);

/// All extreme points of the binary hinge subdifferential: one per subset
/// of the margin set.
std::vector<Vector> binary_extreme_points(const Matrix& x, const Vector& z, double lambda,
                                          const Vector& w);

/// All extreme points for multiclass: every choice of worst label per
/// example.
std::vector<Vector> multiclass_extreme_points(const Matrix& x, const std::vector<Index>& labels,
                                              Index classes, double lambda, const Matrix& delta,
                                              const Vector& w);

/// All extreme points for multilabel: every choice of worst label pair per
/// example.
std::vector<Vector> multilabel_extreme_points(const Matrix& x,
                                              const std::vector<std::vector<Index>>& sets,
                                              Index classes, double lambda, const Matrix& delta,
                                              const Vector& w);

double multiclass_value(const Matrix& x, const std::vector<Index>& labels, Index classes,
                        double lambda, const Matrix& delta, const Vector& w);
double multilabel_value(const Matrix& x, const std::vector<std::vector<Index>>& sets,
                        Index classes, double lambda, const Matrix& delta, const Vector& w);

double max_dot(const std::vector<Vector>& points, const Vector& p);

/// Proximal gradient (ISTA) on lambda |w|_1 + mean logistic loss with a
/// fixed step 1/L, L = |X|_2^2 / (4n).
Vector ista_l1_logistic(const Matrix& x, const Vector& z, double lambda, int iterations);
double l1_logistic_value(const Matrix& x, const Vector& z, double lambda, const Vector& w);

/// Binary classification data: labels from a random hyperplane, with a
/// fraction of flipped labels.
struct Synthetic {
  SparseMatrix x;
  Vector z;
};
Synthetic synthetic_binary(Index n, Index d, double density, double flip, std::mt19937_64& rng);

/// Phi(eta) = c0 + c1 eta + (c2/2) eta^2 + weight * sum_t max_k (b_tk + eta a_tk),
/// assembled densely from the objective definition.
struct Restriction {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double weight = 1.0;
  std::vector<std::vector<std::pair<double, double>>> terms;  // (slope, offset)

  double value(double eta) const;
  /// Smallest and largest element of dPhi(eta); lines within `tol` of the
  /// maximum count as active.
  std::pair<double, double> slopes(double eta, double tol) const;
};

Restriction binary_restriction(const Matrix& x, const Vector& z, double lambda, const Vector& w,
                               const Vector& p);
Restriction multiclass_restriction(const Matrix& x, const std::vector<Index>& labels,
                                   Index classes, double lambda, const Matrix& delta,
                                   const Vector& w, const Vector& p);
Restriction multilabel_restriction(const Matrix& x, const std::vector<std::vector<Index>>& sets,
                                   Index classes, double lambda, const Matrix& delta,
                                   const Vector& w, const Vector& p);

/// Checks J(w') >= J(w) + (w' - w)'g at `probes` random points w' around w.
/// Returns the most negative slack seen.
double min_subgradient_slack(const subbfgs::Objective& obj, const Vector& w, const Vector& g,
                             int probes, double radius, std::mt19937_64& rng);

}  // namespace oracle
