#pragma once

#include <stdexcept>
#include <string>

namespace bmc {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  bool contains_open(double x) const noexcept { return x > lo && x < hi; }
  double mid() const noexcept { return 0.5 * (lo + hi); }

  void validate(const char* what) const {
    if (!(lo < hi)) throw std::invalid_argument(std::string(what) + ": interval must satisfy lo < hi");
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace bmc
