#pragma once

// subBFGS / subLBFGS driver and the GD / subGD reference solvers.

#include "subbfgs/direction.hpp"
#include "subbfgs/line_search.hpp"
#include "subbfgs/objective.hpp"
#include "subbfgs/quasi_newton.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace subbfgs {

enum class LineSearchMode { exact, backtracking };
enum class SubgradientChoice { sup, random };

struct SolverConfig {
  double eps = 1e-5;
  int k_max = 50;
  double h = 1e-8;
  double skip_ratio = 1e-12;
  WolfeParams wolfe{};
  Index buffer = 15;
  bool dense = false;
  int max_iterations = 1000;
  double max_seconds = 0.0;  // 0 disables the time budget
  double rel_tol = 1e-8;
  int window = 5;
  std::uint64_t seed = 0;
  LineSearchMode line_search = LineSearchMode::exact;
  // Direction tolerance used while w is exactly zero (e.g. 1.0 for the
  // multiclass and multilabel losses).
  std::optional<double> eps_at_origin;
  // How g_{t+1} is picked before falling back to the sup oracle.
  SubgradientChoice subgradient = SubgradientChoice::sup;
  // Length of the step taken when the objective is unbounded along p.
  double unbounded_step = 1e10;
  BacktrackingOptions backtracking{};
  // Keep every iterate w_t in SolverResult::iterates.
  bool record_iterates = false;

  void validate() const;
};

enum class Termination {
  no_descent,
  relative_improvement,
  max_iterations,
  max_seconds,
  unbounded,
  line_search_failure,
};

std::string to_string(Termination t);

enum class UpdateStatus { applied, skipped_low_curvature, skipped_degenerate, not_attempted };

struct TraceRecord {
  int iter = 0;
  double cpu_seconds = 0.0;
  double objective = 0.0;
  double step_size = 0.0;
  int dir_iters = 0;
  double gbar_norm = 0.0;

  // Audit data for the step that produced this record.
  double objective_before = 0.0;
  double sup_before = 0.0;  // sup_{g in dJ(w_t)} g'p_t
  double sup_after = 0.0;   // sup_{g in dJ(w_{t+1})} g'p_t
  double s_dot_y = 0.0;     // after the curvature safeguard
  double curvature_ratio = 0.0;  // s'y / y'y after the safeguard
  double secant_residual = 0.0;  // |B y - s| / |s| for the dense model
  double secant_scale = 0.0;     // |B|_F |y| / |s|, the roundoff scale of the residual
  UpdateStatus update = UpdateStatus::not_attempted;
  // False for steps not chosen by a line search: the fixed unit step of GD
  // at w = 0 and the probe taken along an unbounded direction.
  bool searched = true;
};

struct SolverTrace {
  std::vector<TraceRecord> records;  // records[0] describes w_0
  Termination reason = Termination::max_iterations;
  std::string message;
};

struct SolverResult {
  Vector w;
  SolverTrace trace;
  std::vector<Vector> iterates;  // filled when config.record_iterates is set
};

/// Algorithm with quasi-Newton directions; dense BFGS when config.dense,
/// otherwise LBFGS with config.buffer pairs.
SolverResult solve(const Objective& obj, const SolverConfig& config, const Vector& w0);

/// Steepest descent along the negative of a random subgradient.
SolverResult solve_gd(const Objective& obj, const SolverConfig& config, const Vector& w0);

/// Descent direction search with the identity in place of B.
SolverResult solve_subgd(const Objective& obj, const SolverConfig& config, const Vector& w0);

/// True iff every searched step satisfied both subgradient Wolfe conditions.
bool wolfe_certify(const SolverTrace& trace, const WolfeParams& params);

/// Process CPU time in seconds.
double cpu_seconds();

}  // namespace subbfgs
