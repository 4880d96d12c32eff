#pragma once

// Upper envelope of a set of lines b_k + eta * a_k over an interval [L, U],
// computed with a sort followed by a single stack sweep.

#include "subbfgs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace subbfgs {

template <typename Scalar = double>
struct LineSet {
  std::vector<Scalar> a;  // slopes
  std::vector<Scalar> b;  // offsets

  Index size() const { return static_cast<Index>(a.size()); }
  Scalar value(Index k, Scalar eta) const { return b[k] + eta * a[k]; }
};

/// Breakpoints eta_j (ascending, eta_0 = L) and the line active on
/// [eta_j, eta_{j+1}].
template <typename Scalar = double>
struct SegmentStack {
  std::vector<Scalar> eta;
  std::vector<Index> line;
  Scalar lower{};
  Scalar upper{};

  Index size() const { return static_cast<Index>(eta.size()); }
};

template <typename Scalar>
SegmentStack<Scalar> segment_max_lines(const LineSet<Scalar>& lines, Scalar lower,
                                       Scalar upper = std::numeric_limits<Scalar>::infinity()) {
  const Index r = lines.size();
  if (r == 0) throw std::invalid_argument("segment_max_lines: empty line set");
  if (static_cast<Index>(lines.b.size()) != r) {
    throw DimensionError("segment_max_lines: slope and offset counts differ");
  }
  if (!(lower < upper)) throw std::invalid_argument("segment_max_lines: requires L < U");

  std::vector<Scalar> y(static_cast<std::size_t>(r));
  for (Index k = 0; k < r; ++k) y[k] = lines.value(k, lower);
  std::vector<Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index i, Index j) {
    if (y[i] != y[j]) return y[i] > y[j];
    if (lines.a[i] != lines.a[j]) return lines.a[i] > lines.a[j];
    return i < j;
  });

  SegmentStack<Scalar> s;
  s.lower = lower;
  s.upper = upper;
  s.eta.reserve(static_cast<std::size_t>(r));
  s.line.reserve(static_cast<std::size_t>(r));
  s.eta.push_back(lower);
  s.line.push_back(order[0]);

  for (Index q = 1; q < r; ++q) {
    const Index cand = order[q];
    const Scalar a_new = lines.a[cand];
    Scalar crossing = std::numeric_limits<Scalar>::quiet_NaN();
    Index top = -1;
    while (!s.eta.empty()) {
      top = s.line.back();
      const Scalar slope_gap = lines.a[top] - a_new;
      if (slope_gap == Scalar(0)) {
        // Parallel to the top line and not above it at L: never on the envelope.
        crossing = std::numeric_limits<Scalar>::quiet_NaN();
        break;
      }
      crossing = (lines.b[cand] - lines.b[top]) / slope_gap;
      const bool steeper_tie = crossing == lower && a_new > lines.a[top];
      if ((lower < crossing && crossing <= s.eta.back()) || steeper_tie) {
        s.eta.pop_back();
        s.line.pop_back();
      } else {
        break;
      }
    }
    if (std::isnan(crossing)) continue;
    const bool steeper_tie = crossing == lower && a_new > lines.a[top];
    if ((lower < crossing && crossing <= upper) || steeper_tie) {
      s.eta.push_back(s.eta.empty() ? lower : crossing);
      s.line.push_back(cand);
    }
  }
  return s;
}

template <typename Scalar>
struct EnvelopePoint {
  Scalar value;
  Index line;
};

/// Looks up the active line at eta by binary search over the breakpoints.
template <typename Scalar>
EnvelopePoint<Scalar> envelope_value(const SegmentStack<Scalar>& stack,
                                     const LineSet<Scalar>& lines, Scalar eta) {
  if (stack.eta.empty()) throw std::invalid_argument("envelope_value: empty stack");
  if (!(eta >= stack.lower && eta <= stack.upper)) {
    throw std::out_of_range("envelope_value: eta outside [L, U]");
  }
  auto it = std::upper_bound(stack.eta.begin(), stack.eta.end(), eta);
  const auto j = static_cast<std::size_t>(std::distance(stack.eta.begin(), it)) - 1;
  const Index k = stack.line[j];
  return {lines.value(k, eta), k};
}

}  // namespace subbfgs
