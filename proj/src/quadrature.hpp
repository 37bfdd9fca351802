#pragma once

// Adaptive Gauss-Kronrod quadrature shared by the nonlinearity and
// asymptotics modules. Infinite limits are handled by Boost's interval
// mapping.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "nlci/errors.hpp"

namespace nlci::detail {

inline constexpr double kQuadTolerance = 1e-13;
inline constexpr unsigned kQuadMaxDepth = 20;

template <class F>
double integrate(F&& f, double lo, double hi) {
  if (lo == hi) return 0.0;
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, kQuadMaxDepth, kQuadTolerance, &error);
  if (!std::isfinite(value)) {
    throw NumericError("quadrature produced a non-finite value on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  }
  return value;
}

}  // namespace nlci::detail
