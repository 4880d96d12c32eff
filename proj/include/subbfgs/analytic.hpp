#pragma once

// Two-dimensional nonsmooth test functions with closed-form subdifferentials.

#include "subbfgs/line_search.hpp"
#include "subbfgs/objective.hpp"

#include <memory>
#include <string>
#include <vector>

namespace subbfgs {

/// Relative band used to decide that a point sits on a kink: two pieces are
/// both active when they agree to this fraction of their magnitude.
inline constexpr double kAnalyticKinkTolerance = 1e-12;

/// f(x, y) = 10|x| + |y|.
class ToyAbs final : public Objective {
 public:
  Index dim() const override { return 2; }
  double value(const Vector& w) const override;
  Vector any_subgradient(const Vector& w, Rng& rng) const override;
  SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const override;
  std::optional<LineSearchResult> exact_step(const Vector& w, const Vector& p) const override;
  bool has_exact_step() const override { return true; }

  PiecewiseLineRestriction line_restriction(const Vector& w, const Vector& p) const;
};

/// f(x, y) = 5 sqrt(9x^2 + 16y^2) if x >= |y|, else 9x + 16|y|.
class Wolfe75 final : public Objective {
 public:
  Index dim() const override { return 2; }
  double value(const Vector& w) const override;
  Vector any_subgradient(const Vector& w, Rng& rng) const override;
  SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const override;
  std::optional<LineSearchResult> exact_step(const Vector& w, const Vector& p) const override;
  bool has_exact_step() const override { return true; }
};

/// f(w) = max_k (c_k'w + d_k) over a fixed list of affine pieces.
class PiecewiseMax final : public Objective {
 public:
  struct Piece {
    double gx;
    double gy;
    double offset;
  };

  explicit PiecewiseMax(std::vector<Piece> pieces);

  Index dim() const override { return 2; }
  double value(const Vector& w) const override;
  Vector any_subgradient(const Vector& w, Rng& rng) const override;
  SupSubgradient sup_subgradient(const Vector& w, const Vector& p) const override;
  std::optional<LineSearchResult> exact_step(const Vector& w, const Vector& p) const override;
  bool has_exact_step() const override { return true; }

  /// Pieces within the kink band of the maximum, in declaration order.
  std::vector<Index> active(const Vector& w) const;
  const std::vector<Piece>& pieces() const { return pieces_; }
  PiecewiseLineRestriction line_restriction(const Vector& w, const Vector& p) const;

 private:
  double piece_value(const Piece& c, const Vector& w) const;

  std::vector<Piece> pieces_;
};

/// max{-100, 2x + 3y, -2x + 3y, 5x + 2y, -5x + 2y}.
PiecewiseMax hul_counterexample();
/// max{2|x| + y, 3y}, unbounded below along y -> -inf.
PiecewiseMax lo_counterexample();

struct Counterexample {
  std::string name;
  std::unique_ptr<Objective> objective;
  Vector start;
};

/// Built-in test problems by name: toy, wolfe, hul, lo.
Counterexample make_counterexample(const std::string& name);
std::vector<std::string> counterexample_names();

}  // namespace subbfgs
