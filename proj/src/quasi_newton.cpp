#include "subbfgs/quasi_newton.hpp"

namespace subbfgs {

template struct DisplacementPair<double>;
template class DenseInverseHessian<double>;
template class LbfgsInverseHessian<double>;
template class InverseHessian<double>;

}  // namespace subbfgs
