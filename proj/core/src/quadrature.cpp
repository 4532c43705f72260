#include "bmc/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace bmc {

namespace {

struct Simpson {
  const std::function<double(double)>& f;
  int max_depth;
  double worst_a = 0, worst_b = 0;
  bool failed = false;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double h = (b - a) / 12.0;
    const double left = h * (fa + 4 * flm + fm);
    const double right = h * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15 * tol) return left + right + delta / 15;
    if (depth >= max_depth || m <= a || m >= b) {
      if (!failed) worst_a = a, worst_b = b;
      failed = true;
      return left + right + delta / 15;
    }
    return recurse(a, m, fa, flm, fm, left, tol / 2, depth + 1) +
           recurse(m, b, fm, frm, fb, right, tol / 2, depth + 1);
  }
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_simpson(f, b, a, abs_tol, max_depth);
  Simpson s{f, max_depth};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  const double result = s.recurse(a, b, fa, fm, fb, whole, abs_tol, 0);
  if (s.failed || !std::isfinite(result)) {
    std::ostringstream msg;
    msg << "adaptive Simpson failed to reach tolerance " << abs_tol << " on [" << a << ", " << b
        << "]; first unresolved subinterval [" << s.worst_a << ", " << s.worst_b << "]";
    throw QuadratureError(msg.str());
  }
  return result;
}

}  // namespace bmc
