#include "subbfgs/direction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subbfgs {

double model_value(double sup_value, const Vector& p, const Vector& gbar) {
  return sup_value - 0.5 * p.dot(gbar);
}

DirectionResult descent_direction(const SupOracle& sup, const InverseHessian<double>& b,
                                  const Vector& g1, const DirectionOptions& options) {
  if (options.eps < 0.0) throw std::invalid_argument("direction tolerance must be nonnegative");
  if (options.k_max < 1) throw std::invalid_argument("direction iteration limit must be positive");
  require_size(g1.size(), b.dim(), "descent_direction");

  Vector gbar = g1;
  Vector p = -b.apply(g1);
  SupSubgradient next = sup(p);
  // The gap bound is nonnegative; rounding near convergence can push it just below 0.
  double eps = std::max(0.0, next.value - p.dot(gbar));
  // Running minimum of p_j'g_{j+1} - (1/2) p_j'gbar_j over past iterates.
  double min_term = model_value(next.value, p, gbar);

  std::vector<double> eps_history;
  std::vector<double> mu_history;
  if (options.record_history) eps_history.push_back(eps);

  Vector best_p = p;
  Vector best_gbar = gbar;
  double best_model = min_term;
  double best_sup = next.value;

  int i = 1;
  while ((next.value > 0.0 || eps > options.eps) && eps > 0.0 && i < options.k_max) {
    const Vector bg = b.apply(next.g);
    const Vector d = gbar - next.g;
    // B gbar = -p, so B d = -p - B g_next.
    const Vector bd = -p - bg;
    const double num = -d.dot(p);
    const double den = d.dot(bd);
    const double scale = std::max(-p.dot(gbar), next.g.dot(bg));
    if (!(den > 1e-15 * scale)) break;  // g_next coincides with gbar
    const double mu = std::clamp(num / den, 0.0, 1.0);
    if (options.record_history) mu_history.push_back(mu);

    gbar = (1.0 - mu) * gbar + mu * next.g;
    p = (1.0 - mu) * p - mu * bg;
    next = sup(p);
    const double m = model_value(next.value, p, gbar);
    min_term = std::min(min_term, m);
    eps = std::max(0.0, min_term - 0.5 * p.dot(gbar));
    if (options.record_history) eps_history.push_back(eps);
    ++i;

    if (m < best_model) {
      best_model = m;
      best_p = p;
      best_gbar = gbar;
      best_sup = next.value;
    }
  }

  if (!(best_sup < 0.0)) {
    return DirectionFailure{std::move(best_p), best_sup, i, std::move(eps_history),
                            std::move(mu_history)};
  }
  return Descent{std::move(best_p), best_model,          i,
                 std::move(best_gbar), best_sup, std::move(eps_history),
                 std::move(mu_history)};
}

DirectionResult descent_direction(const Objective& obj, const Vector& w,
                                  const InverseHessian<double>& b, const Vector& g1,
                                  const DirectionOptions& options) {
  return descent_direction([&](const Vector& p) { return obj.sup_subgradient(w, p); }, b, g1,
                           options);
}

}  // namespace subbfgs
