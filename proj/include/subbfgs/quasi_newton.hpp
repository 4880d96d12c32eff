#pragma once

// BFGS and limited-memory BFGS approximations of the inverse Hessian, plus
// the curvature safeguards that keep their spectrum bounded on nonsmooth
// objectives.

#include "subbfgs/linalg.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <utility>
#include <variant>

namespace subbfgs {

/// Raised when a displacement pair would destroy positive definiteness.
class CurvatureError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a displacement vector that must be nonzero is zero.
class DegenerateDisplacement : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameter displacement s, gradient displacement y and rho = 1 / (y's).
template <typename Scalar = double>
struct DisplacementPair {
  VectorX<Scalar> s;
  VectorX<Scalar> y;
  Scalar rho{};

  /// Validates s'y > 0 (strict) and finiteness before building the pair.
  static DisplacementPair make(VectorX<Scalar> s, VectorX<Scalar> y) {
    require_size(y.size(), s.size(), "DisplacementPair");
    const Scalar sy = s.dot(y);
    if (!(sy > Scalar(0)) || !std::isfinite(static_cast<double>(sy))) {
      throw CurvatureError("displacement pair requires s'y > 0");
    }
    if (!s.allFinite() || !y.allFinite()) {
      throw CurvatureError("displacement pair has non-finite entries");
    }
    DisplacementPair pair;
    pair.rho = Scalar(1) / sy;
    pair.s = std::move(s);
    pair.y = std::move(y);
    return pair;
  }
};

/// Full d x d inverse Hessian estimate, starting from the identity.
template <typename Scalar = double>
class DenseInverseHessian {
 public:
  using VectorType = VectorX<Scalar>;
  using MatrixType = MatrixX<Scalar>;

  explicit DenseInverseHessian(Index dim) : b_(MatrixType::Identity(dim, dim)) {}

  explicit DenseInverseHessian(MatrixType b) : b_(std::move(b)) {
    if (b_.rows() != b_.cols()) throw DimensionError("inverse Hessian must be square");
  }

  Index dim() const { return b_.rows(); }
  const MatrixType& matrix() const { return b_; }

  VectorType apply(const Eigen::Ref<const VectorType>& v) const {
    require_size(v.size(), dim(), "DenseInverseHessian::apply");
    return b_ * v;
  }

  // B <- (I - rho s y') B (I - rho y s') + rho s s', expanded so that only
  // one matrix-vector product is needed.
  void update(const DisplacementPair<Scalar>& pair) {
    require_size(pair.s.size(), dim(), "DenseInverseHessian::update");
    const VectorType by = b_ * pair.y;
    const Scalar ybyr = pair.rho * pair.y.dot(by);
    b_.noalias() -= pair.rho * (pair.s * by.transpose() + by * pair.s.transpose());
    b_.noalias() += (pair.rho * ybyr + pair.rho) * (pair.s * pair.s.transpose());
    // Roundoff drift makes B slightly asymmetric over many updates.
    b_ = (Scalar(0.5) * (b_ + b_.transpose())).eval();
  }

  void reset() { b_.setIdentity(); }

 private:
  MatrixType b_;
};

/// Ring buffer of at most m displacement pairs applied with the two-loop
/// recursion. The initial matrix is the identity unless `scale_initial` is
/// set, in which case it is (s'y / y'y) I from the newest pair.
template <typename Scalar = double>
class LbfgsInverseHessian {
 public:
  using VectorType = VectorX<Scalar>;

  LbfgsInverseHessian(Index dim, Index memory, bool scale_initial = false)
      : dim_(dim), memory_(memory), scale_initial_(scale_initial) {
    if (memory < 1) throw std::invalid_argument("LBFGS memory must be positive");
  }

  Index dim() const { return dim_; }
  Index memory() const { return memory_; }
  Index size() const { return static_cast<Index>(pairs_.size()); }
  const std::deque<DisplacementPair<Scalar>>& pairs() const { return pairs_; }

  VectorType apply(const Eigen::Ref<const VectorType>& v) const {
    require_size(v.size(), dim_, "LbfgsInverseHessian::apply");
    VectorType q = v;
    const std::size_t k = pairs_.size();
    alpha_.resize(static_cast<Index>(k));
    for (std::size_t j = k; j-- > 0;) {
      const auto& p = pairs_[j];
      alpha_[static_cast<Index>(j)] = p.rho * p.s.dot(q);
      q.noalias() -= alpha_[static_cast<Index>(j)] * p.y;
    }
    if (scale_initial_ && k > 0) {
      const auto& newest = pairs_.back();
      q *= newest.s.dot(newest.y) / newest.y.squaredNorm();
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto& p = pairs_[j];
      const Scalar beta = p.rho * p.y.dot(q);
      q.noalias() += (alpha_[static_cast<Index>(j)] - beta) * p.s;
    }
    return q;
  }

  void update(DisplacementPair<Scalar> pair) {
    require_size(pair.s.size(), dim_, "LbfgsInverseHessian::update");
    if (static_cast<Index>(pairs_.size()) == memory_) pairs_.pop_front();
    pairs_.push_back(std::move(pair));
  }

  void reset() { pairs_.clear(); }

 private:
  Index dim_;
  Index memory_;
  bool scale_initial_;
  std::deque<DisplacementPair<Scalar>> pairs_;
  mutable VectorType alpha_;
};

/// Either a dense BFGS matrix or an LBFGS buffer behind one interface.
template <typename Scalar = double>
class InverseHessian {
 public:
  using VectorType = VectorX<Scalar>;
  using Dense = DenseInverseHessian<Scalar>;
  using LimitedMemory = LbfgsInverseHessian<Scalar>;

  static InverseHessian dense(Index dim) { return InverseHessian(Dense(dim)); }
  static InverseHessian dense(MatrixX<Scalar> b) { return InverseHessian(Dense(std::move(b))); }
  static InverseHessian limited_memory(Index dim, Index memory, bool scale_initial = false) {
    return InverseHessian(LimitedMemory(dim, memory, scale_initial));
  }

  explicit InverseHessian(Dense d) : model_(std::move(d)) {}
  explicit InverseHessian(LimitedMemory l) : model_(std::move(l)) {}

  Index dim() const {
    return std::visit([](const auto& m) { return m.dim(); }, model_);
  }
  bool is_dense() const { return std::holds_alternative<Dense>(model_); }
  const Dense* as_dense() const { return std::get_if<Dense>(&model_); }
  const LimitedMemory* as_limited_memory() const { return std::get_if<LimitedMemory>(&model_); }

  VectorType apply(const Eigen::Ref<const VectorType>& v) const {
    return std::visit([&](const auto& m) { return m.apply(v); }, model_);
  }

  void update(const DisplacementPair<Scalar>& pair) {
    std::visit([&](auto& m) { m.update(pair); }, model_);
  }

  void reset() {
    std::visit([](auto& m) { m.reset(); }, model_);
  }

 private:
  std::variant<Dense, LimitedMemory> model_;
};

/// Returns s + max(0, h - s'y / y'y) y, which satisfies s'y / y'y >= h.
template <typename Derived1, typename Derived2>
auto curvature_safeguard(const Eigen::MatrixBase<Derived1>& s,
                         const Eigen::MatrixBase<Derived2>& y,
                         typename Derived1::Scalar h) {
  using Scalar = typename Derived1::Scalar;
  require_size(y.size(), s.size(), "curvature_safeguard");
  const Scalar yy = y.squaredNorm();
  if (!(yy > Scalar(0))) throw DegenerateDisplacement("gradient displacement y is zero");
  const Scalar shift = std::max(Scalar(0), h - s.dot(y) / yy);
  VectorX<Scalar> out = s;
  if (shift > Scalar(0)) {
    out.noalias() += shift * y;
    // Rounding in the shifted product can land a few ulps below h. The
    // correction must be large enough not to vanish when added to out.
    Scalar bump = std::numeric_limits<Scalar>::epsilon() * out.norm() / std::sqrt(yy);
    for (int k = 0; k < 8; ++k) {
      const Scalar ratio = out.dot(y) / yy;
      if (ratio >= h) break;
      out.noalias() += std::max(h - ratio, bump) * y;
      bump *= Scalar(2);
    }
  }
  return out;
}

/// True when s'y / s's falls below `min_ratio`, i.e. the step carries too
/// little curvature information to keep the spectrum bounded above.
template <typename Derived1, typename Derived2>
bool skip_update_test(const Eigen::MatrixBase<Derived1>& s,
                      const Eigen::MatrixBase<Derived2>& y,
                      typename Derived1::Scalar min_ratio) {
  using Scalar = typename Derived1::Scalar;
  require_size(y.size(), s.size(), "skip_update_test");
  const Scalar ss = s.squaredNorm();
  if (!(ss > Scalar(0))) throw DegenerateDisplacement("parameter displacement s is zero");
  return s.dot(y) / ss < min_ratio;
}

extern template struct DisplacementPair<double>;
extern template class DenseInverseHessian<double>;
extern template class LbfgsInverseHessian<double>;
extern template class InverseHessian<double>;

}  // namespace subbfgs
