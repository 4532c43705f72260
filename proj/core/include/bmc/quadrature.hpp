#pragma once

#include <functional>
#include <stdexcept>

namespace bmc {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance
/// `abs_tol` (Richardson-corrected). Throws QuadratureError when the
/// recursion depth is exhausted before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 50);

}  // namespace bmc
