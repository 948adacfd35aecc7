#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "relaydetect/errors.hpp"

namespace relaydetect::detail {

/// Adaptive Gauss-Kronrod (15/31) integral of f over [a, b] with its error estimate.
template <class F>
double integrate_estimate(F&& f, double a, double b, double& error, double rel_tol = 1e-13,
                          unsigned max_depth = 20) {
  error = 0.0;
  if (a == b) return 0.0;
  double l1 = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth,
                                                                         rel_tol, &error, &l1);
}

/// Adaptive Gauss-Kronrod (15/31) integral of f over [a, b]; either bound may
/// be infinite. Throws NumericError if the error estimate exceeds abs_tol.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol, const char* what = "integral",
                 double rel_tol = 1e-13, unsigned max_depth = 20) {
  // Boost terminates on a relative criterion; ask for far less than abs_tol
  // and verify the absolute error afterwards.
  double error = 0.0;
  const double result = integrate_estimate(f, a, b, error, rel_tol, max_depth);
  if (!std::isfinite(result) || error > abs_tol) {
    throw NumericError(std::string("quadrature did not converge for ") + what +
                       " (error estimate " + std::to_string(error) + ")");
  }
  return result;
}

/// Integral over the whole real line of a function concentrated near
/// `center` with scale `spread`: splits into a core and two tails.
template <class F>
double integrate_real_line(F&& f, double center, double spread, double abs_tol,
                           const char* what = "integral", double rel_tol = 1e-13,
                           unsigned max_depth = 20) {
  const double inf = std::numeric_limits<double>::infinity();
  const double lo = center - 12.0 * spread;
  const double hi = center + 12.0 * spread;
  return integrate(f, -inf, lo, abs_tol / 3, what, rel_tol, max_depth) +
         integrate(f, lo, hi, abs_tol / 3, what, rel_tol, max_depth) +
         integrate(f, hi, inf, abs_tol / 3, what, rel_tol, max_depth);
}

}  // namespace relaydetect::detail
