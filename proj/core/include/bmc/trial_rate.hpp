#pragma once

#include <string>

#include "bmc/kernels.hpp"

namespace bmc {

/// Tent function: (1+x) on [-1,0), (1-x) on [0,1], zero elsewhere.
double tent(double x) noexcept;

/// Trial splitting rate on S = (0,5): the baseline x/(5-x) plus a tent spike
/// of amplitude `amplitude` and scale 2^-scale centred at 7/2.
struct TrialRate {
  double amplitude = 0.0;  // 0 gives the baseline
  int scale = 0;

  static TrialRate baseline() { return {0.0, 0}; }
  static TrialRate large_spike() { return {3.0, 1}; }
  static TrialRate high_spike() { return {9.0, 4}; }

  bool is_baseline() const noexcept { return amplitude == 0.0; }
  std::string name() const;

  /// B(x); throws std::domain_error outside (0,5).
  double operator()(double x) const;
  /// Closed form of the integral of B(2z)/z over [a,b], 0 < a <= b < 5/2.
  double log_integral(double a, double b) const;
  /// Support of the spike in x: [7/2 - 2^-scale, 7/2 + 2^-scale].
  Interval spike_support() const noexcept;

  SplittingRate splitting_rate() const;

  friend bool operator==(const TrialRate&, const TrialRate&) = default;
};

}  // namespace bmc
