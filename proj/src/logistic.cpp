#include "subbfgs/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace subbfgs {

double logistic_loss(double margin) {
  if (margin > 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

double logistic_loss_derivative(double margin) {
  if (margin >= 0.0) {
    const double e = std::exp(-margin);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(margin));
}

L1Logistic::L1Logistic(SparseMatrix x, Vector z, double lambda, int threads)
    : x_(std::move(x)), z_(std::move(z)), lambda_(lambda), threads_(threads) {
  if (x_.rows() < 1) throw std::invalid_argument("objective needs at least one example");
  require_size(z_.size(), x_.rows(), "L1Logistic labels");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("lambda must be positive");
  for (Index i = 0; i < z_.size(); ++i) {
    if (z_[i] != 1.0 && z_[i] != -1.0) {
      throw std::invalid_argument("binary labels must be -1 or +1");
    }
  }
  x_.makeCompressed();
}

double L1Logistic::loss_value(const Vector& w) const {
  require_size(w.size(), dim(), "L1Logistic");
  const Vector m = z_.cwiseProduct(row_products(x_, w, threads_));
  double acc = 0.0;
  for (Index i = 0; i < m.size(); ++i) acc += logistic_loss(m[i]);
  return acc / static_cast<double>(m.size());
}

double L1Logistic::value(const Vector& w) const {
  return lambda_ * w.lpNorm<1>() + loss_value(w);
}

Vector L1Logistic::loss_gradient(const Vector& w) const {
  require_size(w.size(), dim(), "L1Logistic");
  const Vector m = z_.cwiseProduct(row_products(x_, w, threads_));
  const double inv_n = 1.0 / static_cast<double>(m.size());
  Vector coeffs(m.size());
  for (Index i = 0; i < m.size(); ++i) coeffs[i] = logistic_loss_derivative(m[i]) * z_[i] * inv_n;
  Vector g = Vector::Zero(dim());
  add_transpose_product(x_, coeffs, g);
  return g;
}

Vector L1Logistic::any_subgradient(const Vector& w, Rng& rng) const {
  Vector g = loss_gradient(w);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Index j = 0; j < w.size(); ++j) {
    if (std::abs(w[j]) <= kL1KinkTolerance) {
      g[j] += lambda_ * unit(rng);
    } else {
      g[j] += lambda_ * (w[j] > 0.0 ? 1.0 : -1.0);
    }
  }
  return g;
}

SupSubgradient L1Logistic::sup_subgradient(const Vector& w, const Vector& p) const {
  require_size(p.size(), dim(), "L1Logistic direction");
  Vector g = loss_gradient(w);
  for (Index j = 0; j < w.size(); ++j) {
    double sign;
    if (std::abs(w[j]) > kL1KinkTolerance) {
      sign = w[j] > 0.0 ? 1.0 : -1.0;
    } else {
      sign = p[j] > 0.0 ? 1.0 : (p[j] < 0.0 ? -1.0 : 0.0);
    }
    g[j] += lambda_ * sign;
  }
  const double value = g.dot(p);
  return {std::move(g), value};
}

std::optional<LineSearchResult> L1Logistic::exact_step(const Vector& w, const Vector& p) const {
  require_size(w.size(), dim(), "L1Logistic");
  require_size(p.size(), dim(), "L1Logistic direction");
  const Vector m = z_.cwiseProduct(row_products(x_, w, threads_));
  const Vector dm = z_.cwiseProduct(row_products(x_, p, threads_));
  const double inv_n = 1.0 / static_cast<double>(m.size());
  auto smooth_slope = [&](double eta) {
    double acc = 0.0;
    for (Index i = 0; i < m.size(); ++i) {
      if (dm[i] != 0.0) acc += logistic_loss_derivative(m[i] + eta * dm[i]) * dm[i];
    }
    return acc * inv_n;
  };

  // Slope of the L1 term just right of eta = 0, and the kinks further out
  // where a coordinate crosses zero and its slope contribution flips.
  struct Kink {
    double eta;
    double jump;
  };
  std::vector<Kink> kinks;
  double l1 = 0.0;
  for (Index j = 0; j < w.size(); ++j) {
    if (p[j] == 0.0) continue;
    const double sp = p[j] > 0.0 ? 1.0 : -1.0;
    if (std::abs(w[j]) <= kL1KinkTolerance) {
      l1 += lambda_ * sp * p[j];
      continue;
    }
    const double sw = w[j] > 0.0 ? 1.0 : -1.0;
    l1 += lambda_ * sw * p[j];
    if (sw != sp) kinks.push_back({-w[j] / p[j], 2.0 * lambda_ * std::abs(p[j])});
  }
  std::sort(kinks.begin(), kinks.end(), [](const Kink& a, const Kink& b) { return a.eta < b.eta; });

  if (!(l1 + smooth_slope(0.0) < 0.0)) return LineSearchResult{0.0, StepStatus::not_descent};

  // Root of l1 + smooth_slope in (lo, hi] given a negative slope at lo and a
  // nonnegative one at hi; the upper end keeps the curvature condition.
  auto bisect = [&](double lo, double hi) {
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (l1 + smooth_slope(mid) < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return hi;
  };

  double a = 0.0;
  std::size_t k = 0;
  while (k < kinks.size()) {
    const double b = kinks[k].eta;
    if (l1 + smooth_slope(b) >= 0.0) return LineSearchResult{bisect(a, b), StepStatus::ok};
    while (k < kinks.size() && kinks[k].eta == b) l1 += kinks[k++].jump;
    if (l1 + smooth_slope(b) >= 0.0) return LineSearchResult{b, StepStatus::ok};
    a = b;
  }
  double width = std::max(1.0, a);
  for (int doubling = 0; doubling < 200; ++doubling) {
    const double b = a + width;
    if (l1 + smooth_slope(b) >= 0.0) return LineSearchResult{bisect(a, b), StepStatus::ok};
    width *= 2.0;
  }
  return LineSearchResult{std::numeric_limits<double>::infinity(), StepStatus::unbounded};
}

}  // namespace subbfgs
