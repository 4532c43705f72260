#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bmc/interval.hpp"
#include "bmc/rng.hpp"

namespace bmc {

/// Offspring law of a bifurcating Markov chain: given the parent trait x,
/// draws the pair (X_u0, X_u1). The mean transition Q = (P0 + P1)/2 is
/// optionally available as a density.
class TransitionKernel {
 public:
  virtual ~TransitionKernel() = default;

  virtual std::pair<double, double> sample_pair(double x, Rng& rng) const = 0;
  /// Density of Q(x, dy); nullopt when the model cannot evaluate it.
  virtual std::optional<double> q_density(double x, double y) const = 0;
  /// Q(x, (-inf, y]) when available in closed or quadrature form.
  virtual std::optional<double> q_cdf(double, double) const { return std::nullopt; }
  /// Rectangle of admissible traits.
  virtual Interval support() const = 0;
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splitting rate B on S = (0, 5).
struct SplittingRate {
  std::function<double(double)> rate;
  /// Optional closed form of the integral of B(2z)/z over [a, b]; when empty
  /// the growth-fragmentation kernel integrates numerically.
  std::function<double(double, double)> log_integral;
  /// True when B equals the baseline x/(5-x), i.e. the proposal is exact.
  bool is_baseline = false;
  std::string name = "custom";
};

struct ClassCheck {
  double r = 0, L = 0;
  double lower_integral = 0;     // integral of B(x)/x over (0, r]
  double divergence_integral = 0;  // integral of B(x)/x over [5 - d, 5 - d^2]
  bool lower_ok = false;
  bool diverges = false;
  bool member() const noexcept { return lower_ok && diverges; }
};

/// Size-at-birth chain of the binary growth-fragmentation model with
/// exponential growth rate tau and splitting rate B. Both daughters receive
/// the same size, so sample_pair returns (y, y) with y ~ Q_B(x, .).
class GrowthFragModel final : public TransitionKernel {
 public:
  static constexpr Interval kStateSpace{0.0, 5.0};
  static constexpr double kHazardTolerance = 1e-10;

  GrowthFragModel(double tau, SplittingRate rate);

  double tau() const noexcept { return tau_; }
  const SplittingRate& rate() const noexcept { return rate_; }
  double splitting_rate(double x) const { return rate_.rate(x); }

  /// Q_B(x, y). The integral in the exponent is computed by adaptive Simpson
  /// quadrature (absolute tolerance 1e-10). Throws std::domain_error when x or
  /// y lies outside S and QuadratureError when the integral fails to converge.
  double gf_q_density(double x, double y) const;
  std::optional<double> q_density(double x, double y) const override { return gf_q_density(x, y); }
  std::optional<double> q_cdf(double x, double y) const override;

  /// Integral of B(2z)/(tau z) over [x/2, y], closed form when available.
  double hazard(double x, double y) const;

  /// Density and inverse-CDF sampler of the baseline proposal Q_{B~}(x, .).
  double proposal_density(double x, double y) const;
  double proposal_cdf(double x, double y) const;
  double proposal_quantile(double x, double u) const;

  /// Q_B(x, y) / Q_{B~}(x, y) for x/2 <= y < 5/2.
  double acceptance_ratio(double x, double y) const;
  /// Envelope constant M with Q_B <= M Q_{B~}.
  double envelope() const noexcept { return envelope_; }

  /// Rejection sampler for Q_B(x, .). `trials`, when given, receives the
  /// number of proposals drawn. Throws SamplingError("envelope too small")
  /// if a proposal violates the envelope.
  double gf_sample_child(double x, Rng& rng, std::size_t* trials = nullptr) const;
  std::pair<double, double> gf_pair(double x, Rng& rng) const;
  std::pair<double, double> sample_pair(double x, Rng& rng) const override { return gf_pair(x, rng); }

  Interval support() const override { return kStateSpace; }

  /// Numerical membership check of the admissibility class C(r, L).
  ClassCheck check_class(double r, double L, double delta = 1e-4) const;
  /// r = midpoint of S, L = 0.9 tau log 2.
  ClassCheck check_class() const;

 private:
  double compute_envelope() const;

  double tau_;
  SplittingRate rate_;
  double envelope_ = 1.0;
};

struct BarBounds {
  double ell = 0;        // max sup |f_i| on the grid
  double sigma_min = 0;  // min inf sigma_i on the grid
  bool ok() const noexcept { return ell < 1e300 && sigma_min > 0; }
};

/// Bifurcating autoregressive kernel:
///   X_u0 = f0(X_u) + sigma0(X_u) e0,  X_u1 = f1(X_u) + sigma1(X_u) e1.
class BarModel final : public TransitionKernel {
 public:
  using Fn = std::function<double(double)>;
  using NoiseSampler = std::function<std::pair<double, double>(Rng&)>;

  struct Params {
    Fn f0, f1;
    Fn sigma0, sigma1;
    NoiseSampler noise;
    Fn g0, g1;  // marginal noise densities; may be empty
  };

  explicit BarModel(Params params);

  std::pair<double, double> bar_pair(double x, Rng& rng) const;
  std::pair<double, double> sample_pair(double x, Rng& rng) const override { return bar_pair(x, rng); }

  /// 1/2 [ G0((y - f0)/s0)/s0 + G1((y - f1)/s1)/s1 ]; nullopt without marginals.
  std::optional<double> bar_q_density(double x, double y) const;
  std::optional<double> q_density(double x, double y) const override { return bar_q_density(x, y); }

  Interval support() const override;

  /// Bounds on |f_i| and sigma_i evaluated on a grid.
  BarBounds check_bounds(const std::vector<double>& grid) const;

  const Params& params() const noexcept { return p_; }

 private:
  Params p_;
};

}  // namespace bmc
