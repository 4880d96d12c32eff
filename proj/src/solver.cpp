#include "subbfgs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <limits>
#include <stdexcept>

namespace subbfgs {

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

void SolverConfig::validate() const {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  if (k_max < 1) throw std::invalid_argument("k_max must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
  if (skip_ratio < 0.0) throw std::invalid_argument("skip ratio must be nonnegative");
  if (buffer < 1) throw std::invalid_argument("buffer size must be positive");
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be nonnegative");
  if (max_seconds < 0.0) throw std::invalid_argument("max_seconds must be nonnegative");
  if (rel_tol < 0.0) throw std::invalid_argument("relative tolerance must be nonnegative");
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  if (!(unbounded_step > 0.0)) throw std::invalid_argument("unbounded step must be positive");
  if (eps_at_origin && *eps_at_origin < 0.0) {
    throw std::invalid_argument("eps at origin must be nonnegative");
  }
  wolfe.validate();
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::no_descent: return "no_descent";
    case Termination::relative_improvement: return "relative_improvement";
    case Termination::max_iterations: return "max_iterations";
    case Termination::max_seconds: return "max_seconds";
    case Termination::unbounded: return "unbounded";
    case Termination::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

namespace {

enum class Method { quasi_newton, subgd, gd };

bool stalled(const std::vector<TraceRecord>& records, const SolverConfig& config) {
  const auto count = static_cast<int>(records.size());
  if (count <= config.window) return false;
  const double now = records.back().objective;
  const double then = records[static_cast<std::size_t>(count - 1 - config.window)].objective;
  const double scale =
      std::max({std::abs(now), std::abs(then), std::numeric_limits<double>::min()});
  return (then - now) / (config.window * scale) < config.rel_tol;
}

LineSearchResult choose_step(const Objective& obj, const SolverConfig& config, const Vector& w,
                             const Vector& p) {
  if (config.line_search == LineSearchMode::exact && obj.has_exact_step()) {
    if (auto r = obj.exact_step(w, p)) return *r;
  }
  return backtracking_search(obj, w, p, config.wolfe, config.backtracking);
}

SolverResult run(const Objective& obj, const SolverConfig& config, const Vector& w0,
                 Method method) {
  config.validate();
  require_size(w0.size(), obj.dim(), "solver start point");
  if (!w0.allFinite()) throw std::invalid_argument("start point must be finite");

  const double t_start = cpu_seconds();
  Rng rng(config.seed);
  InverseHessian<double> b =
      (config.dense && method == Method::quasi_newton)
          ? InverseHessian<double>::dense(obj.dim())
          : InverseHessian<double>::limited_memory(obj.dim(), config.buffer);

  SolverResult out;
  out.w = w0;
  Vector& w = out.w;
  auto& records = out.trace.records;

  Vector g = obj.any_subgradient(w, rng);
  double j = obj.value(w);
  {
    TraceRecord r0;
    r0.cpu_seconds = cpu_seconds() - t_start;
    r0.objective = j;
    r0.objective_before = j;
    records.push_back(r0);
  }
  if (config.record_iterates) out.iterates.push_back(w);

  out.trace.reason = Termination::max_iterations;
  for (int t = 1; t <= config.max_iterations; ++t) {
    if (config.max_seconds > 0.0 && cpu_seconds() - t_start > config.max_seconds) {
      out.trace.reason = Termination::max_seconds;
      break;
    }

    TraceRecord rec;
    rec.iter = t;
    rec.objective_before = j;

    Vector p;
    Vector gbar;
    if (method == Method::gd) {
      p = -obj.any_subgradient(w, rng);
      gbar = -p;
      rec.dir_iters = 0;
      rec.sup_before = obj.sup_subgradient(w, p).value;
      if (!(rec.sup_before < 0.0)) {
        out.trace.reason = Termination::no_descent;
        break;
      }
    } else {
      DirectionOptions opts;
      opts.eps = config.eps;
      opts.k_max = config.k_max;
      if (config.eps_at_origin && w.isZero(0.0)) opts.eps = *config.eps_at_origin;
      DirectionResult dir = descent_direction(obj, w, b, g, opts);
      if (std::holds_alternative<DirectionFailure>(dir)) {
        out.trace.reason = Termination::no_descent;
        break;
      }
      auto& d = std::get<Descent>(dir);
      p = std::move(d.p);
      gbar = std::move(d.gbar);
      rec.dir_iters = d.inner_iterations;
      rec.sup_before = d.sup_value;
    }
    rec.gbar_norm = gbar.norm();

    LineSearchResult step;
    if (method == Method::gd && t == 1 && w.isZero(0.0)) {
      step = {1.0, StepStatus::ok};
      rec.searched = false;
    } else {
      try {
        step = choose_step(obj, config, w, p);
      } catch (const LineSearchError& e) {
        out.trace.reason = Termination::line_search_failure;
        out.trace.message = e.what();
        break;
      }
    }
    if (step.status == StepStatus::not_descent) {
      out.trace.reason = Termination::no_descent;
      break;
    }
    if (step.status == StepStatus::unbounded) {
      const double eta = config.unbounded_step / p.norm();
      w += eta * p;
      rec.step_size = eta;
      rec.objective = obj.value(w);
      rec.sup_after = obj.sup_subgradient(w, p).value;
      rec.searched = false;
      rec.cpu_seconds = cpu_seconds() - t_start;
      records.push_back(rec);
      if (config.record_iterates) out.iterates.push_back(w);
      out.trace.reason = Termination::unbounded;
      break;
    }

    const double eta = step.step;
    const Vector s = eta * p;
    Vector w_new = w + s;
    const SupSubgradient after = obj.sup_subgradient(w_new, p);
    rec.sup_after = after.value;

    Vector g_new;
    if (config.subgradient == SubgradientChoice::random) {
      g_new = obj.any_subgradient(w_new, rng);
      // The sup subgradient along p maximizes s'g over dJ(w_new), so it is
      // the choice to fall back on when the random one has no curvature.
      if (!(s.dot(g_new - g) > 0.0)) g_new = after.g;
    } else {
      g_new = after.g;
    }

    if (method == Method::quasi_newton) {
      const Vector y = g_new - g;
      try {
        if (skip_update_test(s, y, config.skip_ratio)) {
          rec.update = UpdateStatus::skipped_low_curvature;
        } else {
          const Vector s_safe = curvature_safeguard(s, y, config.h);
          rec.s_dot_y = s_safe.dot(y);
          rec.curvature_ratio = rec.s_dot_y / y.squaredNorm();
          b.update(DisplacementPair<double>::make(s_safe, y));
          rec.update = UpdateStatus::applied;
          if (const auto* dense = b.as_dense()) {
            rec.secant_residual = (dense->apply(y) - s_safe).norm() / s_safe.norm();
            rec.secant_scale = dense->matrix().norm() * y.norm() / s_safe.norm();
          }
        }
      } catch (const DegenerateDisplacement&) {
        rec.update = UpdateStatus::skipped_degenerate;
      } catch (const CurvatureError&) {
        rec.update = UpdateStatus::skipped_degenerate;
      }
    }

    w = std::move(w_new);
    g = std::move(g_new);
    j = obj.value(w);
    rec.objective = j;
    rec.step_size = eta;
    rec.cpu_seconds = cpu_seconds() - t_start;
    records.push_back(rec);
    if (config.record_iterates) out.iterates.push_back(w);

    if (stalled(records, config)) {
      out.trace.reason = Termination::relative_improvement;
      break;
    }
  }
  return out;
}

}  // namespace

SolverResult solve(const Objective& obj, const SolverConfig& config, const Vector& w0) {
  return run(obj, config, w0, Method::quasi_newton);
}

SolverResult solve_gd(const Objective& obj, const SolverConfig& config, const Vector& w0) {
  return run(obj, config, w0, Method::gd);
}

SolverResult solve_subgd(const Objective& obj, const SolverConfig& config, const Vector& w0) {
  return run(obj, config, w0, Method::subgd);
}

bool wolfe_certify(const SolverTrace& trace, const WolfeParams& params) {
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    const TraceRecord& r = trace.records[k];
    if (!r.searched) continue;
    const WolfeCheck c = wolfe_conditions(r.objective_before, r.sup_before, r.objective,
                                          r.sup_after, r.step_size, params);
    if (!c.both()) return false;
  }
  return true;
}

}  // namespace subbfgs
