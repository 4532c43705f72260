#include "bmc/trial_rate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bmc {

double tent(double x) noexcept {
  if (x >= -1.0 && x < 0.0) return 1.0 + x;
  if (x >= 0.0 && x <= 1.0) return 1.0 - x;
  return 0.0;
}

std::string TrialRate::name() const {
  if (*this == large_spike()) return "large";
  if (*this == high_spike()) return "high";
  if (is_baseline()) return "baseline";
  std::ostringstream s;
  s << "spike(" << amplitude << "," << scale << ")";
  return s.str();
}

double TrialRate::operator()(double x) const {
  if (!(x > 0.0 && x < 5.0)) throw std::domain_error("trial rate evaluated outside (0, 5)");
  return x / (5.0 - x) + amplitude * tent(std::ldexp(x - 3.5, scale));
}

Interval TrialRate::spike_support() const noexcept {
  const double half = std::ldexp(1.0, -scale);
  return {3.5 - half, 3.5 + half};
}

double TrialRate::log_integral(double a, double b) const {
  // Baseline: B~(2z)/z = 2/(5-2z).
  double total = std::log(5.0 - 2.0 * a) - std::log(5.0 - 2.0 * b);
  if (amplitude == 0.0) return total;
  // Spike part: tent(2^scale (2z - 7/2)) is affine in z on two pieces,
  // alpha + beta z, and the integral of (alpha + beta z)/z is alpha ln z + beta z.
  const double half = std::ldexp(1.0, -scale) / 2.0;  // half-width in z
  const double centre = 1.75;
  const double slope = std::ldexp(2.0, scale);
  auto piece = [&](double lo, double hi, double alpha, double beta) {
    lo = std::max(lo, a);
    hi = std::min(hi, b);
    if (hi <= lo) return 0.0;
    return alpha * std::log(hi / lo) + beta * (hi - lo);
  };
  const double left = piece(centre - half, centre, 1.0 - 1.75 * slope, slope);
  const double right = piece(centre, centre + half, 1.0 + 1.75 * slope, -slope);
  return total + amplitude * (left + right);
}

SplittingRate TrialRate::splitting_rate() const {
  const TrialRate self = *this;
  SplittingRate r;
  r.rate = [self](double x) { return self(x); };
  r.log_integral = [self](double a, double b) { return self.log_integral(a, b); };
  r.is_baseline = is_baseline();
  r.name = name();
  return r;
}

}  // namespace bmc
