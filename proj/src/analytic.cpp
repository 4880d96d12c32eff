#include "subbfgs/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subbfgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign_or_up(double v) { return v < 0.0 ? -1.0 : 1.0; }

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

SupSubgradient with_value(Vector g, const Vector& p) {
  const double v = g.dot(p);
  return {std::move(g), v};
}

}  // namespace

// ---------------------------------------------------------------- toy

double ToyAbs::value(const Vector& w) const {
  require_size(w.size(), 2, "ToyAbs");
  return 10.0 * std::abs(w[0]) + std::abs(w[1]);
}

Vector ToyAbs::any_subgradient(const Vector& w, Rng& rng) const {
  const double f = value(w);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double gx = 10.0 * std::abs(w[0]) <= kAnalyticKinkTolerance * f ? 10.0 * unit(rng)
                                                                          : 10.0 * sign_or_up(w[0]);
  const double gy = std::abs(w[1]) <= kAnalyticKinkTolerance * f ? unit(rng) : sign_or_up(w[1]);
  return vec2(gx, gy);
}

SupSubgradient ToyAbs::sup_subgradient(const Vector& w, const Vector& p) const {
  require_size(p.size(), 2, "ToyAbs direction");
  const double f = value(w);
  const double sx = 10.0 * std::abs(w[0]) <= kAnalyticKinkTolerance * f ? sign_or_up(p[0])
                                                                          : sign_or_up(w[0]);
  const double sy = std::abs(w[1]) <= kAnalyticKinkTolerance * f ? sign_or_up(p[1])
                                                                   : sign_or_up(w[1]);
  return with_value(vec2(10.0 * sx, sy), p);
}

PiecewiseLineRestriction ToyAbs::line_restriction(const Vector& w, const Vector& p) const {
  require_size(w.size(), 2, "ToyAbs");
  require_size(p.size(), 2, "ToyAbs direction");
  PiecewiseLineRestriction r(0.0, 0.0, 0.0);
  r.add_term({{10.0 * p[0], -10.0 * p[0]}, {10.0 * w[0], -10.0 * w[0]}}, 1.0);
  r.add_term({{p[1], -p[1]}, {w[1], -w[1]}}, 1.0);
  return r;
}

std::optional<LineSearchResult> ToyAbs::exact_step(const Vector& w, const Vector& p) const {
  if (!(sup_subgradient(w, p).value < 0.0)) return LineSearchResult{0.0, StepStatus::not_descent};
  return line_restriction(w, p).minimize();
}

// ---------------------------------------------------------------- Wolfe

double Wolfe75::value(const Vector& w) const {
  require_size(w.size(), 2, "Wolfe75");
  const double x = w[0];
  const double y = w[1];
  if (x >= std::abs(y)) return 5.0 * std::hypot(3.0 * x, 4.0 * y);
  return 9.0 * x + 16.0 * std::abs(y);
}

namespace {

// The subdifferential at the origin is the part of the ellipse
// g1^2/225 + g2^2/400 <= 1 with g1 >= 9; its chord ends at (9, +-16).
Vector wolfe_origin_sup(const Vector& p) {
  const double norm = std::hypot(15.0 * p[0], 20.0 * p[1]);
  if (norm > 0.0) {
    const Vector g = vec2(225.0 * p[0] / norm, 400.0 * p[1] / norm);
    if (g[0] >= 9.0) return g;
  }
  return vec2(9.0, p[1] < 0.0 ? -16.0 : 16.0);
}

bool wolfe_on_y_kink(double x, double y) {
  return x < std::abs(y) && 16.0 * std::abs(y) <= kAnalyticKinkTolerance * 9.0 * std::abs(x);
}

Vector wolfe_smooth_gradient(double x, double y) {
  if (x >= std::abs(y)) {
    const double r = std::hypot(3.0 * x, 4.0 * y);
    return vec2(45.0 * x / r, 80.0 * y / r);
  }
  return vec2(9.0, 16.0 * sign_or_up(y));
}

}  // namespace

Vector Wolfe75::any_subgradient(const Vector& w, Rng& rng) const {
  require_size(w.size(), 2, "Wolfe75");
  const double x = w[0];
  const double y = w[1];
  if (x == 0.0 && y == 0.0) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    const double t = angle(rng);
    const Vector g = vec2(15.0 * std::cos(t), 20.0 * std::sin(t));
    if (g[0] >= 9.0) return g;
    return vec2(9.0, g[1] < 0.0 ? -16.0 : 16.0);
  }
  if (wolfe_on_y_kink(x, y)) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    return vec2(9.0, 16.0 * unit(rng));
  }
  return wolfe_smooth_gradient(x, y);
}

SupSubgradient Wolfe75::sup_subgradient(const Vector& w, const Vector& p) const {
  require_size(w.size(), 2, "Wolfe75");
  require_size(p.size(), 2, "Wolfe75 direction");
  const double x = w[0];
  const double y = w[1];
  if (x == 0.0 && y == 0.0) return with_value(wolfe_origin_sup(p), p);
  if (wolfe_on_y_kink(x, y)) return with_value(vec2(9.0, 16.0 * sign_or_up(p[1])), p);
  return with_value(wolfe_smooth_gradient(x, y), p);
}

// The restriction is convex and splits into pieces at the crossings of
// x = y, x = -y and y = 0. On pieces inside x >= |y| it is the square root
// of a quadratic, minimized where the quadratic is; elsewhere it is linear.
std::optional<LineSearchResult> Wolfe75::exact_step(const Vector& w, const Vector& p) const {
  require_size(w.size(), 2, "Wolfe75");
  require_size(p.size(), 2, "Wolfe75 direction");
  if (!(sup_subgradient(w, p).value < 0.0)) return LineSearchResult{0.0, StepStatus::not_descent};
  const double x = w[0], y = w[1], px = p[0], py = p[1];

  std::vector<double> cuts{0.0};
  auto add_root = [&](double c0, double c1) {
    if (c1 == 0.0) return;
    const double t = -c0 / c1;
    if (t > 0.0 && std::isfinite(t)) cuts.push_back(t);
  };
  add_root(x - y, px - py);
  add_root(x + y, px + py);
  add_root(y, py);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(kInf);

  const double qa = 9.0 * px * px + 16.0 * py * py;
  const double q_min = qa > 0.0 ? -(9.0 * x * px + 16.0 * y * py) / qa : kInf;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    const double mid = std::isfinite(b) ? 0.5 * (a + b) : a + std::max(1.0, a);
    const double xm = x + mid * px;
    const double ym = y + mid * py;
    if (xm >= std::abs(ym)) {
      if (q_min < b) return LineSearchResult{std::max(q_min, a), StepStatus::ok};
    } else {
      const double slope = 9.0 * px + 16.0 * sign_or_up(ym) * py;
      if (slope >= 0.0) return LineSearchResult{a, a > 0.0 ? StepStatus::ok : StepStatus::not_descent};
    }
  }
  return LineSearchResult{kInf, StepStatus::unbounded};
}

// ---------------------------------------------------------------- piecewise max

PiecewiseMax::PiecewiseMax(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("PiecewiseMax needs at least one piece");
}

double PiecewiseMax::piece_value(const Piece& c, const Vector& w) const {
  return c.gx * w[0] + c.gy * w[1] + c.offset;
}

double PiecewiseMax::value(const Vector& w) const {
  require_size(w.size(), 2, "PiecewiseMax");
  double best = -kInf;
  for (const auto& c : pieces_) best = std::max(best, piece_value(c, w));
  return best;
}

std::vector<Index> PiecewiseMax::active(const Vector& w) const {
  const double best = value(w);
  std::vector<Index> out;
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const double v = piece_value(pieces_[k], w);
    if (best - v <= kAnalyticKinkTolerance * std::max(std::abs(best), std::abs(v))) {
      out.push_back(static_cast<Index>(k));
    }
  }
  return out;
}

Vector PiecewiseMax::any_subgradient(const Vector& w, Rng& rng) const {
  const std::vector<Index> act = active(w);
  std::uniform_int_distribution<std::size_t> pick(0, act.size() - 1);
  const Piece& c = pieces_[static_cast<std::size_t>(act[pick(rng)])];
  return vec2(c.gx, c.gy);
}

SupSubgradient PiecewiseMax::sup_subgradient(const Vector& w, const Vector& p) const {
  require_size(p.size(), 2, "PiecewiseMax direction");
  double best = -kInf;
  Index arg = -1;
  for (Index k : active(w)) {
    const Piece& c = pieces_[static_cast<std::size_t>(k)];
    const double v = c.gx * p[0] + c.gy * p[1];
    if (v > best) {
      best = v;
      arg = k;
    }
  }
  const Piece& c = pieces_[static_cast<std::size_t>(arg)];
  return with_value(vec2(c.gx, c.gy), p);
}

PiecewiseLineRestriction PiecewiseMax::line_restriction(const Vector& w, const Vector& p) const {
  require_size(w.size(), 2, "PiecewiseMax");
  require_size(p.size(), 2, "PiecewiseMax direction");
  LineSet<double> lines;
  for (const auto& c : pieces_) {
    lines.a.push_back(c.gx * p[0] + c.gy * p[1]);
    lines.b.push_back(piece_value(c, w));
  }
  PiecewiseLineRestriction r(0.0, 0.0, 0.0);
  r.add_term(lines, 1.0);
  return r;
}

std::optional<LineSearchResult> PiecewiseMax::exact_step(const Vector& w, const Vector& p) const {
  if (!(sup_subgradient(w, p).value < 0.0)) return LineSearchResult{0.0, StepStatus::not_descent};
  return line_restriction(w, p).minimize();
}

PiecewiseMax hul_counterexample() {
  return PiecewiseMax({{0.0, 0.0, -100.0},
                       {2.0, 3.0, 0.0},
                       {-2.0, 3.0, 0.0},
                       {5.0, 2.0, 0.0},
                       {-5.0, 2.0, 0.0}});
}

PiecewiseMax lo_counterexample() {
  return PiecewiseMax({{2.0, 1.0, 0.0}, {-2.0, 1.0, 0.0}, {0.0, 3.0, 0.0}});
}

std::vector<std::string> counterexample_names() { return {"toy", "wolfe", "hul", "lo"}; }

Counterexample make_counterexample(const std::string& name) {
  if (name == "toy") return {name, std::make_unique<ToyAbs>(), vec2(1.0, 1.0)};
  if (name == "wolfe") return {name, std::make_unique<Wolfe75>(), vec2(2.0, 1.0)};
  // On the ridge y = 3x, where 2x + 3y and 5x + 2y tie.
  if (name == "hul") return {name, std::make_unique<PiecewiseMax>(hul_counterexample()), vec2(1.0, 3.0)};
  if (name == "lo") {
    return {name, std::make_unique<PiecewiseMax>(lo_counterexample()), vec2(2.0, 0.5)};
  }
  throw std::invalid_argument("unknown counterexample: " + name);
}

}  // namespace subbfgs
