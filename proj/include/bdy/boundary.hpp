#pragma once

#include "bdy/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace bdy {

/// f(0) from the first two cell averages, (3 f_0 - f_1)/2. Exact for linears.
template <typename Scalar, typename Derived>
Scalar extrapolate_to_origin(const Eigen::MatrixBase<Derived>& values) {
  if (values.size() < 2) throw std::invalid_argument("boundary extrapolation needs two cells");
  return (3 * values[0] - values[1]) / 2;
}

/// Estimate of the density at v = 0, floored at zero.
template <typename Scalar>
Scalar boundary_value(const GridFunction<Scalar>& f) {
  return std::max(Scalar(0), extrapolate_to_origin<Scalar>(f.values()));
}

/// Second-order derivative of cell data: centered inside, one-sided at both ends.
template <typename Scalar, typename Derived>
Vector<Scalar> cell_derivative(const Eigen::MatrixBase<Derived>& u, Scalar h) {
  const Eigen::Index n = u.size();
  if (n < 3) throw std::invalid_argument("cell_derivative needs three cells");
  Vector<Scalar> d(n);
  d.segment(1, n - 2) = (u.tail(n - 2) - u.head(n - 2)) / (2 * h);
  d[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h);
  d[n - 1] = (3 * u[n - 1] - 4 * u[n - 2] + u[n - 3]) / (2 * h);
  return d;
}

}  // namespace bdy
