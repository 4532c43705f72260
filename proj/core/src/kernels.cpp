#include "bmc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bmc/quadrature.hpp"

namespace bmc {

namespace {

constexpr double kSupHalf = 2.5;  // sup S / 2: daughters are born below 5/2
constexpr int kEnvelopeGrid = 480;

}  // namespace

GrowthFragModel::GrowthFragModel(double tau, SplittingRate rate) : tau_(tau), rate_(std::move(rate)) {
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw std::invalid_argument("tau must be positive");
  if (!rate_.rate) throw std::invalid_argument("splitting rate function is empty");
  envelope_ = rate_.is_baseline ? 1.0 : compute_envelope();
}

double GrowthFragModel::hazard(double x, double y) const {
  const double a = x / 2.0;
  if (y <= a) return 0.0;
  if (rate_.log_integral) return rate_.log_integral(a, y) / tau_;
  const auto integrand = [this](double z) { return rate_.rate(2.0 * z) / (tau_ * z); };
  return adaptive_simpson(integrand, a, y, kHazardTolerance);
}

double GrowthFragModel::gf_q_density(double x, double y) const {
  if (!kStateSpace.contains_open(x)) throw std::domain_error("parent trait outside S = (0, 5)");
  if (!kStateSpace.contains_open(y)) throw std::domain_error("child trait outside S = (0, 5)");
  if (y < x / 2.0 || y >= kSupHalf) return 0.0;
  const double h = hazard(x, y);
  return rate_.rate(2.0 * y) / (tau_ * y) * std::exp(-h);
}

std::optional<double> GrowthFragModel::q_cdf(double x, double y) const {
  if (y <= x / 2.0) return 0.0;
  if (y >= kSupHalf) return 1.0;
  return -std::expm1(-hazard(x, y));
}

double GrowthFragModel::proposal_density(double x, double y) const {
  if (y < x / 2.0 || y >= kSupHalf) return 0.0;
  return 2.0 / (tau_ * (5.0 - 2.0 * y)) * std::pow((5.0 - 2.0 * y) / (5.0 - x), 1.0 / tau_);
}

double GrowthFragModel::proposal_cdf(double x, double y) const {
  if (y <= x / 2.0) return 0.0;
  if (y >= kSupHalf) return 1.0;
  return 1.0 - std::pow((5.0 - 2.0 * y) / (5.0 - x), 1.0 / tau_);
}

double GrowthFragModel::proposal_quantile(double x, double u) const {
  return (5.0 - (5.0 - x) * std::pow(1.0 - u, tau_)) / 2.0;
}

double GrowthFragModel::acceptance_ratio(double x, double y) const {
  if (rate_.is_baseline) return 1.0;
  const double baseline = 2.0 * y / (5.0 - 2.0 * y);
  const double baseline_hazard = (std::log(5.0 - x) - std::log(5.0 - 2.0 * y)) / tau_;
  return rate_.rate(2.0 * y) / baseline * std::exp(baseline_hazard - hazard(x, y));
}

double GrowthFragModel::compute_envelope() const {
  double worst = 0.0;
  for (int i = 0; i < kEnvelopeGrid; ++i) {
    const double x = kStateSpace.hi * (i + 0.5) / kEnvelopeGrid;
    for (int k = 0; k < kEnvelopeGrid; ++k) {
      const double y = x / 2.0 + (kSupHalf - x / 2.0) * (k + 0.5) / kEnvelopeGrid;
      worst = std::max(worst, acceptance_ratio(x, y));
    }
  }
  return 1.05 * worst;
}

double GrowthFragModel::gf_sample_child(double x, Rng& rng, std::size_t* trials) const {
  if (!kStateSpace.contains_open(x)) throw std::domain_error("parent trait outside S = (0, 5)");
  std::size_t count = 0;
  for (;;) {
    ++count;
    const double y = proposal_quantile(x, rng.uniform());
    if (!(y < kSupHalf)) continue;  // rounding at u -> 1
    if (rate_.is_baseline) {
      if (trials) *trials = count;
      return y;
    }
    const double ratio = acceptance_ratio(x, y) / envelope_;
    if (ratio > 1.0) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "envelope too small: ratio " << ratio * envelope_ << " exceeds M = " << envelope_
          << " at (x, y) = (" << x << ", " << y << ")";
      throw SamplingError(msg.str());
    }
    if (rng.uniform() < ratio) {
      if (trials) *trials = count;
      return y;
    }
  }
}

std::pair<double, double> GrowthFragModel::gf_pair(double x, Rng& rng) const {
  const double y = gf_sample_child(x, rng);
  return {y, y};
}

ClassCheck GrowthFragModel::check_class(double r, double L, double delta) const {
  ClassCheck c;
  c.r = r;
  c.L = L;
  const auto over_x = [this](double x) { return rate_.rate(x) / x; };
  c.lower_integral = adaptive_simpson(over_x, 1e-12, r, 1e-10);
  c.lower_ok = c.lower_integral <= L;
  // With x = sup S - e^t the integral of B(x)/x over [sup S - d, sup S - d^2]
  // becomes a smooth integral in t over [2 ln d, ln d].
  const auto divergence = [&](double d) {
    const auto f = [&](double t) {
      const double x = kStateSpace.hi - std::exp(t);
      return rate_.rate(x) / x * std::exp(t);
    };
    return adaptive_simpson(f, 2.0 * std::log(d), std::log(d), 1e-9);
  };
  // A logarithmic blow-up is all a rate with a simple pole can show: require
  // the tail integral to grow as d shrinks and to be at least (1/2) ln(1/d).
  const double coarse = divergence(std::sqrt(delta));
  c.divergence_integral = divergence(delta);
  c.diverges = c.divergence_integral > coarse && c.divergence_integral >= 0.5 * std::log(1.0 / delta);
  return c;
}

ClassCheck GrowthFragModel::check_class() const {
  return check_class(kStateSpace.mid(), 0.9 * tau_ * std::log(2.0));
}

BarModel::BarModel(Params params) : p_(std::move(params)) {
  if (!p_.f0 || !p_.f1 || !p_.sigma0 || !p_.sigma1 || !p_.noise) {
    throw std::invalid_argument("BAR model needs f0, f1, sigma0, sigma1 and a noise sampler");
  }
  if (static_cast<bool>(p_.g0) != static_cast<bool>(p_.g1)) {
    throw std::invalid_argument("BAR marginal densities must be given together");
  }
}

std::pair<double, double> BarModel::bar_pair(double x, Rng& rng) const {
  const auto [e0, e1] = p_.noise(rng);
  return {p_.f0(x) + p_.sigma0(x) * e0, p_.f1(x) + p_.sigma1(x) * e1};
}

std::optional<double> BarModel::bar_q_density(double x, double y) const {
  if (!p_.g0) return std::nullopt;
  const double s0 = p_.sigma0(x), s1 = p_.sigma1(x);
  return 0.5 * (p_.g0((y - p_.f0(x)) / s0) / s0 + p_.g1((y - p_.f1(x)) / s1) / s1);
}

Interval BarModel::support() const {
  return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
}

BarBounds BarModel::check_bounds(const std::vector<double>& grid) const {
  BarBounds b;
  b.sigma_min = std::numeric_limits<double>::infinity();
  for (double x : grid) {
    b.ell = std::max({b.ell, std::abs(p_.f0(x)), std::abs(p_.f1(x))});
    b.sigma_min = std::min({b.sigma_min, p_.sigma0(x), p_.sigma1(x)});
  }
  return b;
}

}  // namespace bmc
