#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bmc/interval.hpp"
#include "bmc/tree.hpp"
#include "bmc/wavelet.hpp"

namespace bmc {

enum class Target { nu, q, p, b };
enum class IndexSet { tree, generation };

Target parse_target(const std::string& s);
std::string to_string(Target t);
IndexSet parse_index_set(const std::string& s);
std::string to_string(IndexSet s);

struct EstimatorConfig {
  Target target = Target::nu;
  double c = 10.0;
  double varpi = 1e-3;
  Interval domain{1.5, 4.8};
  /// Domain of the invariant-density estimate inside B-hat; defaults to domain / 2.
  std::optional<Interval> nu_domain;
  WaveletSpec wavelet = make_wavelet();
  std::optional<int> J_override;
  IndexSet index = IndexSet::tree;
  double tau = 2.0;

  void validate() const;
};

/// floor((1/d) log2(N / ln N)).
int theorem_level(double N, int d);
/// Threshold of the estimator of the given target from N observations.
double theorem_threshold(Target target, double c, double N);

/// The observations entering each estimator, with N the normalising count.
std::vector<double> index_sample(const TreeSample& tree, IndexSet index);
/// (X_parent(u), X_u) for u in T_n minus the root (tree) or in G_n (generation).
std::vector<double> pair_sample(const TreeSample& tree, IndexSet index);
/// (X_u, X_u0, X_u1) for u in T_{n-1} (tree) or in G_{n-1} (generation).
std::vector<double> triplet_sample(const TreeSample& tree, IndexSet index);

DensityEstimate estimate_nu(const TreeSample& tree, const EstimatorConfig& cfg);
DensityEstimate estimate_fq(const TreeSample& tree, const EstimatorConfig& cfg);
DensityEstimate estimate_q(const TreeSample& tree, const EstimatorConfig& cfg);
DensityEstimate estimate_fp(const TreeSample& tree, const EstimatorConfig& cfg);
DensityEstimate estimate_p(const TreeSample& tree, const EstimatorConfig& cfg);

/// Wavelet estimate of a density from raw d-tuples, with the level and
/// threshold given explicitly (the building block of all estimators).
DensityEstimate threshold_estimate(std::span<const double> points, const Box& domain, int J, double eta,
                                   const WaveletSpec& wavelet);

struct RateEstimate {
  std::vector<double> x;       // regular grid of the domain, mesh N^(-1/2)
  std::vector<double> values;  // B-hat(x)
  DensityEstimate nu;          // invariant-density estimate on domain / 2, at the sampling level
  int J = 0;                   // maximal resolution level of nu-hat
  double kept_fraction = 1.0;  // nonzero detail coefficients / all detail coefficients
  double compression = 0.0;    // zero coefficients / all coefficients at the sampling level
};

/// Regular grid lo, lo + dx, ... not exceeding hi, with dx = N^(-1/2).
std::vector<double> rate_grid(const Interval& domain, double N);

/// Level at which nu-hat is sampled inside B-hat: fine enough that its bins are
/// no wider than half the mesh N^(-1/2), and at least J.
int sampling_level(const Interval& nu_domain, double N, int J);

/// Splitting-rate estimator (tau x / 2) nu-hat(x/2) / max(mass of [x/2, x), varpi).
/// nu-hat is the level-J wavelet projection of the traits, computed from a
/// histogram at sampling_level and thresholded at c sqrt(log N / N) measured
/// on the sampled-value scale (coefficients of the vector of nu-hat values on
/// the sampling grid). `J_override`, when set, fixes J; c = 0 disables
/// thresholding.
RateEstimate estimate_b(const TreeSample& tree, const EstimatorConfig& cfg);

struct OracleResult {
  RateEstimate estimate;
  int J_star = 0;
  double error = 0.0;
  std::vector<double> errors_by_level;  // index J - (j0 + 1)
};

/// Un-thresholded splitting-rate estimates for J in [j0 + 1, J_max]; returns
/// the one closest to `truth` (values on rate_grid) in relative discrete L2.
OracleResult oracle_estimate(const TreeSample& tree, const std::vector<double>& truth, const EstimatorConfig& cfg,
                             int J_max);

struct RateSpec {
  double s = 1.0;
  double pi = 2.0;  // may be +infinity
  double p = 2.0;
  int d = 1;
  void validate() const;
};

double rate_exponent(const RateSpec& spec);

}  // namespace bmc
