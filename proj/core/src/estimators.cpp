#include "bmc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmc {

namespace {

void require_points(std::span<const double> points, const Box& domain, const char* what) {
  const auto d = static_cast<std::size_t>(domain.dim());
  std::size_t inside = 0;
  for (std::size_t i = 0; i + d <= points.size() && inside < 2; i += d)
    if (domain.contains(points.subspan(i, d))) ++inside;
  if (inside < 2) throw std::invalid_argument(std::string(what) + ": fewer than 2 observations inside the domain");
}

double l2_relative(const std::vector<double>& est, const std::vector<double>& truth) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    num += (est[i] - truth[i]) * (est[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  return std::sqrt(num) / std::sqrt(den);
}

// Divides every value of a (d >= 2)-dimensional estimate by max(nu(x), varpi),
// where x is the axis-0 coordinate and nu lives on the same axis-0 bins.
void divide_by_marginal(DensityEstimate& joint, const DensityEstimate& nu, double varpi) {
  const std::size_t side = joint.side();
  const std::size_t block = joint.values.size() / side;
  for (std::size_t i = 0; i < side; ++i) {
    const double den = std::max(nu.values[i], varpi);
    for (std::size_t k = 0; k < block; ++k) joint.values[i * block + k] /= den;
  }
}

DensityEstimate joint_estimate(std::span<const double> points, std::size_t N, int d, const EstimatorConfig& cfg,
                               Target target, const char* what) {
  cfg.validate();
  const Box box = Box::cube(cfg.domain, d);
  require_points(points, box, what);
  const int J = cfg.J_override.value_or(theorem_level(static_cast<double>(N), d));
  return threshold_estimate(points, box, J, theorem_threshold(target, cfg.c, static_cast<double>(N)), cfg.wavelet);
}

std::size_t observed_count(const TreeSample& tree, IndexSet index) {
  const int n = tree.generations();
  return index == IndexSet::tree ? tree_size(n) : generation_size(n);
}

}  // namespace

Target parse_target(const std::string& s) {
  if (s == "nu") return Target::nu;
  if (s == "q") return Target::q;
  if (s == "p") return Target::p;
  if (s == "b") return Target::b;
  throw std::invalid_argument("unknown estimator target '" + s + "' (expected nu, q, p or b)");
}

std::string to_string(Target t) {
  switch (t) {
    case Target::nu: return "nu";
    case Target::q: return "q";
    case Target::p: return "p";
    case Target::b: return "b";
  }
  return "?";
}

IndexSet parse_index_set(const std::string& s) {
  if (s == "tree") return IndexSet::tree;
  if (s == "gen" || s == "generation") return IndexSet::generation;
  throw std::invalid_argument("unknown index set '" + s + "' (expected tree or gen)");
}

std::string to_string(IndexSet s) { return s == IndexSet::tree ? "tree" : "gen"; }

void EstimatorConfig::validate() const {
  if (!(c >= 0.0)) throw std::invalid_argument("threshold constant c must be non-negative");
  if (target != Target::nu && !(varpi > 0.0)) throw std::invalid_argument("varpi must be positive for quotient targets");
  domain.validate("estimation domain");
  if (nu_domain) nu_domain->validate("nu domain");
  if (J_override && *J_override < wavelet.j0)
    throw std::invalid_argument("J_override must be at least the coarsest level " + std::to_string(wavelet.j0));
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

int theorem_level(double N, int d) {
  if (!(N > 1.0)) throw std::invalid_argument("theorem_level needs N > 1");
  return static_cast<int>(std::floor(std::log2(N / std::log(N)) / d));
}

double theorem_threshold(Target target, double c, double N) {
  const double L = std::log(N);
  switch (target) {
    case Target::nu:
    case Target::b:
      return c * std::sqrt(L / N);
    case Target::q:
    case Target::p:
      return c * L / std::sqrt(N);
  }
  return 0.0;
}

std::vector<double> index_sample(const TreeSample& tree, IndexSet index) {
  const auto s = index == IndexSet::tree ? tree.traits() : tree.generation_traits(tree.generations());
  return {s.begin(), s.end()};
}

std::vector<double> pair_sample(const TreeSample& tree, IndexSet index) {
  if (tree.generations() < 1) throw std::invalid_argument("pairs need a tree with n >= 1");
  const std::uint64_t first = index == IndexSet::tree ? 1 : generation_size(tree.generations()) - 1;
  std::vector<double> out;
  out.reserve(2 * (tree.size() - first));
  for (std::uint64_t u = first; u < tree.size(); ++u) {
    out.push_back(tree[parent(NodeId{u})]);
    out.push_back(tree[NodeId{u}]);
  }
  return out;
}

std::vector<double> triplet_sample(const TreeSample& tree, IndexSet index) {
  const int n = tree.generations();
  if (n < 1) throw std::invalid_argument("triplets need a tree with n >= 1");
  const std::uint64_t first = index == IndexSet::tree ? 0 : generation_size(n - 1) - 1;
  const std::uint64_t last = tree_size(n - 1);
  std::vector<double> out;
  out.reserve(3 * (last - first));
  for (std::uint64_t u = first; u < last; ++u) {
    const auto [c0, c1] = children(NodeId{u});
    out.push_back(tree[NodeId{u}]);
    out.push_back(tree[c0]);
    out.push_back(tree[c1]);
  }
  return out;
}

DensityEstimate threshold_estimate(std::span<const double> points, const Box& domain, int J, double eta,
                                   const WaveletSpec& wavelet) {
  const auto binned = bin_empirical(points, domain, J);
  auto pyramid = dwt_forward(binned, wavelet);
  pyramid = hard_threshold(std::move(pyramid), eta);
  return evaluate_on_grid(pyramid, wavelet);
}

DensityEstimate estimate_nu(const TreeSample& tree, const EstimatorConfig& cfg) {
  const auto sample = index_sample(tree, cfg.index);
  return joint_estimate(sample, sample.size(), 1, cfg, Target::nu, "estimate_nu");
}

DensityEstimate estimate_fq(const TreeSample& tree, const EstimatorConfig& cfg) {
  // J and eta are driven by the size of the observed index set, not the pair count.
  const auto pairs = pair_sample(tree, cfg.index);
  return joint_estimate(pairs, observed_count(tree, cfg.index), 2, cfg, Target::q, "estimate_fq");
}

DensityEstimate estimate_q(const TreeSample& tree, const EstimatorConfig& cfg) {
  auto f = estimate_fq(tree, cfg);
  EstimatorConfig nu_cfg = cfg;
  nu_cfg.J_override = f.J;
  const auto nu = estimate_nu(tree, nu_cfg);
  divide_by_marginal(f, nu, cfg.varpi);
  return f;
}

DensityEstimate estimate_fp(const TreeSample& tree, const EstimatorConfig& cfg) {
  const auto triplets = triplet_sample(tree, cfg.index);
  return joint_estimate(triplets, observed_count(tree, cfg.index), 3, cfg, Target::p, "estimate_fp");
}

DensityEstimate estimate_p(const TreeSample& tree, const EstimatorConfig& cfg) {
  auto f = estimate_fp(tree, cfg);
  EstimatorConfig nu_cfg = cfg;
  nu_cfg.J_override = f.J;
  const auto nu = estimate_nu(tree, nu_cfg);
  divide_by_marginal(f, nu, cfg.varpi);
  return f;
}

std::vector<double> rate_grid(const Interval& domain, double N) {
  domain.validate("rate grid");
  const double dx = 1.0 / std::sqrt(N);
  const auto count = static_cast<std::size_t>(std::floor(domain.length() / dx + 1e-9)) + 1;
  std::vector<double> x(count);
  for (std::size_t i = 0; i < count; ++i) x[i] = domain.lo + static_cast<double>(i) * dx;
  return x;
}

int sampling_level(const Interval& nu_domain, double N, int J) {
  const double bins = nu_domain.length() * 2.0 * std::sqrt(N);
  return std::max(J, static_cast<int>(std::ceil(std::log2(bins) - 1e-12)));
}

RateEstimate estimate_b(const TreeSample& tree, const EstimatorConfig& cfg) {
  cfg.validate();
  if (!(cfg.varpi > 0.0)) throw std::invalid_argument("varpi must be positive");
  auto sample = index_sample(tree, cfg.index);
  const double N = static_cast<double>(sample.size());
  const Interval nu_dom = cfg.nu_domain.value_or(Interval{cfg.domain.lo / 2, cfg.domain.hi / 2});
  const int J = cfg.J_override.value_or(theorem_level(N, 2));
  const int J_fine = sampling_level(nu_dom, N, J);
  const Box box({nu_dom});
  require_points(sample, box, "estimate_b");

  // Even extension of the histogram to [lo, 2 hi - lo]: the periodised
  // transform of the mirrored signal has no wrap-around jump at the edges.
  const auto binned = bin_empirical(sample, box, J_fine);
  std::vector<double> mirrored(binned.coeffs);
  mirrored.insert(mirrored.end(), binned.coeffs.rbegin(), binned.coeffs.rend());
  const Box extended({Interval{nu_dom.lo, 2 * nu_dom.hi - nu_dom.lo}});

  // Coefficients of sampled values exceed the L2-normalised ones by h^(-1/2).
  const double h = nu_dom.length() / std::ldexp(1.0, J_fine);
  const double eta = theorem_threshold(Target::b, cfg.c, N) * std::sqrt(h);
  auto pyramid = dwt_forward(mirrored, extended, cfg.wavelet);
  pyramid = hard_threshold(truncate_levels(std::move(pyramid), J + 1), eta);

  RateEstimate out;
  out.J = J;
  out.compression = pyramid.zero_fraction();
  {
    std::size_t details = 0, kept = 0;
    for (std::size_t i = 0; i < pyramid.values.size(); ++i) {
      const int level = coeff_position(pyramid, i).level;
      if (level < 0 || level > J) continue;
      ++details;
      if (pyramid.values[i] != 0.0) ++kept;
    }
    out.kept_fraction = details ? static_cast<double>(kept) / static_cast<double>(details) : 1.0;
  }
  auto full = evaluate_on_grid(pyramid, cfg.wavelet);
  out.nu.dim = 1;
  out.nu.J = J_fine;
  out.nu.domain = box;
  out.nu.values.assign(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(binned.coeffs.size()));
  out.nu.kept_fraction = out.kept_fraction;
  out.nu.pyramid = std::move(pyramid);
  out.x = rate_grid(cfg.domain, N);
  std::sort(sample.begin(), sample.end());
  out.values.resize(out.x.size());
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    const double x = out.x[i];
    const auto count = std::lower_bound(sample.begin(), sample.end(), x) -
                       std::lower_bound(sample.begin(), sample.end(), x / 2);
    const double mass = static_cast<double>(count) / N;
    out.values[i] = cfg.tau * x / 2 * out.nu.value_at(x / 2) / std::max(mass, cfg.varpi);
  }
  return out;
}

OracleResult oracle_estimate(const TreeSample& tree, const std::vector<double>& truth, const EstimatorConfig& cfg,
                             int J_max) {
  if (J_max <= cfg.wavelet.j0) throw std::invalid_argument("oracle J_max must exceed j0");
  EstimatorConfig c = cfg;
  c.c = 0.0;
  OracleResult best;
  best.error = std::numeric_limits<double>::infinity();
  for (int J = cfg.wavelet.j0 + 1; J <= J_max; ++J) {
    c.J_override = J;
    auto est = estimate_b(tree, c);
    if (est.values.size() != truth.size()) throw std::invalid_argument("oracle truth does not match the rate grid");
    const double e = l2_relative(est.values, truth);
    best.errors_by_level.push_back(e);
    if (e < best.error) {
      best.error = e;
      best.J_star = J;
      best.estimate = std::move(est);
    }
  }
  return best;
}

void RateSpec::validate() const {
  if (d < 1 || d > 3) throw std::invalid_argument("rate dimension must be 1, 2 or 3");
  if (!(p >= 1.0)) throw std::invalid_argument("loss exponent p must be at least 1");
  if (!(pi > 0.0)) throw std::invalid_argument("Besov index pi must be positive");
  if (!(s > d / pi)) throw std::invalid_argument("smoothness must exceed d / pi");
}

double rate_exponent(const RateSpec& spec) {
  spec.validate();
  const double s = spec.s, ip = 1.0 / spec.p, ipi = std::isinf(spec.pi) ? 0.0 : 1.0 / spec.pi;
  switch (spec.d) {
    case 1: return std::min(s / (2 * s + 1), (s + ip - ipi) / (2 * s + 1 - 2 * ipi));
    case 2: return std::min(s / (2 * s + 2), (s / 2 + ip - ipi) / (s + 1 - 2 * ipi));
    default: return std::min(s / (2 * s + 3), (s / 3 + ip - ipi) / (2 * s / 3 + 1 - 2 * ipi));
  }
}

}  // namespace bmc
