#include "subbfgs/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>

namespace subbfgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void WolfeParams::validate() const {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) {
    throw std::invalid_argument("Wolfe parameters require 0 < c1 < c2 < 1");
  }
}

WolfeCheck wolfe_conditions(double j0, double sup0, double j1, double sup1, double eta,
                            const WolfeParams& params) {
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() *
                       std::max(std::abs(j0), std::abs(j1));
  WolfeCheck out;
  out.sufficient_decrease = j1 <= j0 + params.c1 * eta * sup0 + slack;
  out.curvature = sup1 >= params.c2 * sup0;
  return out;
}

WolfeCheck check_wolfe(const Objective& obj, const Vector& w, const Vector& p, double eta,
                       const WolfeParams& params) {
  const Vector w1 = w + eta * p;
  return wolfe_conditions(obj.value(w), obj.sup_subgradient(w, p).value, obj.value(w1),
                          obj.sup_subgradient(w1, p).value, eta, params);
}

LineSearchResult backtracking_search(const Objective& obj, const Vector& w, const Vector& p,
                                     const WolfeParams& params,
                                     const BacktrackingOptions& options) {
  params.validate();
  const double j0 = obj.value(w);
  const double sup0 = obj.sup_subgradient(w, p).value;
  if (!(sup0 < 0.0)) return {0.0, StepStatus::not_descent};

  auto trial = [&](double eta) {
    const Vector w1 = w + eta * p;
    return wolfe_conditions(j0, sup0, obj.value(w1), obj.sup_subgradient(w1, p).value, eta,
                            params);
  };

  double eta = options.initial_step;
  double too_long = kInf;  // smallest step seen that failed sufficient decrease
  double too_short = 0.0;  // largest step seen that failed curvature
  for (int k = 0; k < options.max_trials; ++k) {
    const WolfeCheck c = trial(eta);
    if (c.both()) return {eta, StepStatus::ok};
    if (!c.sufficient_decrease) {
      too_long = std::min(too_long, eta);
    } else {
      too_short = std::max(too_short, eta);
    }
    if (too_long == kInf) {
      eta *= 2.0;
      if (!std::isfinite(eta)) break;
    } else if (too_short == 0.0) {
      eta *= options.decay;
    } else {
      eta = 0.5 * (too_short + too_long);
    }
  }
  if (too_long == kInf) return {eta, StepStatus::unbounded};
  throw LineSearchError("backtracking line search exhausted its trial budget");
}

BinaryLineRestriction::BinaryLineRestriction(Vector f, Vector df, double lambda, double w_sq,
                                             double w_dot_p, double p_sq)
    : f_(std::move(f)),
      df_(std::move(df)),
      lambda_(lambda),
      w_sq_(w_sq),
      w_dot_p_(w_dot_p),
      p_sq_(p_sq) {
  require_size(df_.size(), f_.size(), "BinaryLineRestriction");
}

double BinaryLineRestriction::value(double eta) const {
  double loss = 0.0;
  for (Index i = 0; i < f_.size(); ++i) loss += std::max(0.0, 1.0 - (f_[i] + eta * df_[i]));
  const double n = static_cast<double>(f_.size());
  const double reg = 0.5 * lambda_ * (w_sq_ + 2.0 * eta * w_dot_p_ + eta * eta * p_sq_);
  return n > 0 ? reg + loss / n : reg;
}

double BinaryLineRestriction::right_slope(double eta) const {
  double acc = 0.0;
  for (Index i = 0; i < f_.size(); ++i) {
    bool active;
    if (df_[i] == 0.0) {
      active = f_[i] < 1.0;
    } else if (df_[i] > 0.0) {
      active = eta < hinge(i);
    } else {
      active = eta >= hinge(i);
    }
    if (active) acc += df_[i];
  }
  const double n = static_cast<double>(f_.size());
  return lambda_ * (w_dot_p_ + eta * p_sq_) - (n > 0 ? acc / n : 0.0);
}

double BinaryLineRestriction::left_slope(double eta) const {
  double acc = 0.0;
  for (Index i = 0; i < f_.size(); ++i) {
    bool active;
    if (df_[i] == 0.0) {
      active = f_[i] < 1.0;
    } else if (df_[i] > 0.0) {
      active = eta <= hinge(i);
    } else {
      active = eta > hinge(i);
    }
    if (active) acc += df_[i];
  }
  const double n = static_cast<double>(f_.size());
  return lambda_ * (w_dot_p_ + eta * p_sq_) - (n > 0 ? acc / n : 0.0);
}

LineSearchResult binary_exact_search(const BinaryLineRestriction& r) {
  const Index n = r.examples();
  const Vector& f = r.margins();
  const Vector& df = r.margin_changes();
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  const double h = r.lambda() * r.p_sq();

  struct Hinge {
    double eta;
    Index i;
  };
  std::vector<Hinge> hinges;
  std::vector<char> delta(static_cast<std::size_t>(n));
  double rho = -r.lambda() * r.w_dot_p();
  for (Index i = 0; i < n; ++i) {
    bool active;
    if (df[i] == 0.0) {
      active = f[i] < 1.0;
    } else {
      const double eta_i = r.hinge(i);
      if (eta_i > 0.0) hinges.push_back({eta_i, i});
      // Indicator just to the right of eta = 0.
      active = df[i] > 0.0 ? eta_i > 0.0 : eta_i <= 0.0;
    }
    delta[i] = active;
    if (active) rho += df[i] * inv_n;
  }
  std::sort(hinges.begin(), hinges.end(), [](const Hinge& a, const Hinge& b) {
    return a.eta < b.eta || (a.eta == b.eta && a.i < b.i);
  });

  double g = -rho;
  if (!(g < 0.0)) return {0.0, StepStatus::not_descent};
  double eta = 0.0;
  double rho_prev = 0.0;
  std::size_t j = 0;
  while (g < 0.0) {
    rho_prev = rho;
    if (j == hinges.size()) {
      eta = kInf;
      break;
    }
    eta = hinges[j].eta;
    do {
      const Index i = hinges[j].i;
      if (delta[i]) {
        rho -= df[i] * inv_n;
        delta[i] = 0;
      } else {
        rho += df[i] * inv_n;
        delta[i] = 1;
      }
      ++j;
    } while (j < hinges.size() && hinges[j].eta == eta);
    g = eta * h - rho;
  }
  if (eta == kInf && h <= 0.0) return {kInf, StepStatus::unbounded};
  const double interior = h > 0.0 ? rho_prev / h : kInf;
  return {std::min(eta, interior), StepStatus::ok};
}

PiecewiseLineRestriction::PiecewiseLineRestriction(double constant, double linear,
                                                   double quadratic)
    : c0_(constant), c1_(linear), h_(quadratic) {
  if (quadratic < 0.0) throw std::invalid_argument("quadratic coefficient must be nonnegative");
}

void PiecewiseLineRestriction::reserve(Index terms, Index segments) {
  weight_.reserve(static_cast<std::size_t>(terms));
  start_.reserve(static_cast<std::size_t>(terms) + 1);
  breaks_.reserve(static_cast<std::size_t>(segments));
  slopes_.reserve(static_cast<std::size_t>(segments));
  offsets_.reserve(static_cast<std::size_t>(segments));
}

void PiecewiseLineRestriction::add_term(const LineSet<double>& lines, double weight) {
  const SegmentStack<double> stack = segment_max_lines(lines, 0.0);
  for (Index j = 0; j < stack.size(); ++j) {
    const Index k = stack.line[j];
    breaks_.push_back(stack.eta[j]);
    slopes_.push_back(lines.a[k]);
    offsets_.push_back(lines.b[k]);
  }
  weight_.push_back(weight);
  start_.push_back(static_cast<Index>(breaks_.size()));
}

Index PiecewiseLineRestriction::segment_at(Index term, double eta, bool from_left) const {
  const auto first = breaks_.begin() + start_[term];
  const auto last = breaks_.begin() + start_[term + 1];
  auto it = from_left ? std::lower_bound(first, last, eta) : std::upper_bound(first, last, eta);
  const Index seg = static_cast<Index>(it - first) - 1;
  return std::max<Index>(seg, 0);
}

double PiecewiseLineRestriction::value(double eta) const {
  double acc = c0_ + c1_ * eta + 0.5 * h_ * eta * eta;
  for (Index t = 0; t < terms(); ++t) {
    const Index k = start_[t] + segment_at(t, eta, false);
    acc += weight_[t] * (offsets_[k] + eta * slopes_[k]);
  }
  return acc;
}

double PiecewiseLineRestriction::right_slope(double eta) const {
  double acc = c1_ + h_ * eta;
  for (Index t = 0; t < terms(); ++t) acc += weight_[t] * slopes_[start_[t] + segment_at(t, eta, false)];
  return acc;
}

double PiecewiseLineRestriction::left_slope(double eta) const {
  double acc = c1_ + h_ * eta;
  for (Index t = 0; t < terms(); ++t) acc += weight_[t] * slopes_[start_[t] + segment_at(t, eta, true)];
  return acc;
}

LineSearchResult PiecewiseLineRestriction::minimize() const { return walk(nullptr); }

std::vector<double> PiecewiseLineRestriction::walk_slopes() const {
  std::vector<double> visited;
  walk(&visited);
  return visited;
}

LineSearchResult PiecewiseLineRestriction::walk(std::vector<double>* visited) const {
  using Entry = std::pair<double, Index>;  // (next breakpoint, term)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::vector<Index> pos(weight_.size());

  double rho = c1_;
  for (Index t = 0; t < terms(); ++t) {
    pos[t] = start_[t];
    rho += weight_[t] * slopes_[pos[t]];
    if (pos[t] + 1 < start_[t + 1]) heap.emplace(breaks_[pos[t] + 1], t);
  }
  double g = rho;
  if (visited) visited->push_back(g);
  if (!(g < 0.0)) return {0.0, StepStatus::not_descent};

  double eta = 0.0;
  double rho_prev = rho;
  while (g < 0.0) {
    rho_prev = rho;
    if (heap.empty()) {
      eta = kInf;
      break;
    }
    eta = heap.top().first;
    while (!heap.empty() && heap.top().first == eta) {
      const Index t = heap.top().second;
      heap.pop();
      const Index k = ++pos[t];
      rho += weight_[t] * (slopes_[k] - slopes_[k - 1]);
      if (k + 1 < start_[t + 1]) heap.emplace(breaks_[k + 1], t);
    }
    g = rho + eta * h_;
    if (visited) visited->push_back(g);
  }
  if (eta == kInf && h_ <= 0.0) return {kInf, StepStatus::unbounded};
  const double interior = h_ > 0.0 ? -rho_prev / h_ : kInf;
  return {std::min(eta, interior), StepStatus::ok};
}

}  // namespace subbfgs
