#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmc/interval.hpp"
#include "bmc/kernels.hpp"
#include "bmc/simulate.hpp"

namespace bmc {

/// Constants of the uniform geometric ergodicity assumption together with
/// qd = sup of the mean-transition density over S x D.
struct ErgodicityParams {
  double R = 1.0;
  double rho = 0.25;
  double qd = 1.0;
  void validate() const;
};

struct KappaSet {
  double k1, k2, k3, k4, k5;
};

KappaSet kappas(const ErgodicityParams& p);

/// Norms of a test function on S^d w.r.t. Lebesgue measure. For triplet
/// functions the norms of Pg and Pg^2 are needed; for pair functions
/// |h|_{inf,1} = integral over y of sup_x |h(x, y)|.
struct TestFunction {
  std::function<double(std::span<const double>)> eval;
  int arity = 1;  // 1: g(x); 2: h(x, y); 3: g(x, y, z)
  double l1 = 0, l2sq = 0, linf = 0;
  std::optional<double> pg_l1, pg_linf, pg2_l1;
  std::optional<double> linf1;
  std::string name;
};

/// g = 1_[a,b].
TestFunction indicator_1d(Interval A);
/// h(x, y) = 1_A(x) 1_A(y).
TestFunction indicator_pair(Interval A);
/// g(x, y, z) = (1_A(y) + 1_A(z)) / 2, so Pg(x) = Q(x, A). The kernel norms
/// are computed by quadrature of the kernel density; |Pg^2|_1 is bounded by
/// |Pg|_1 (equality when both children coincide, as in growth-fragmentation).
TestFunction indicator_children(Interval A, const TransitionKernel& kernel);

double sigma1n(const TestFunction& g, int n);
double sigma2n(const TestFunction& g, int n);
double sigma3n(const TestFunction& h, int n);

enum class BoundVariant { thm1_gn, thm1_tn, thm2_gn, thm2_tn, pairs };
inline constexpr BoundVariant kAllVariants[] = {BoundVariant::thm1_gn, BoundVariant::thm1_tn, BoundVariant::thm2_gn,
                                                BoundVariant::thm2_tn, BoundVariant::pairs};
std::string to_string(BoundVariant v);

class BoundError : public std::invalid_argument {
 public:
  BoundError(const std::string& what, double bar) : std::invalid_argument(what), bar_(bar) {}
  double bar() const noexcept { return bar_; }

 private:
  double bar_;
};

/// Smallest delta for which the variant's bound is asserted.
double validity_bar(BoundVariant v, const TestFunction& g, int n, const ErgodicityParams& p);
/// The displayed exponential bound clipped to [0, 1]. Throws BoundError
/// ("delta below validity threshold") when delta < validity_bar.
double deviation_bound(BoundVariant v, const TestFunction& g, int n, double delta, const ErgodicityParams& p);
/// Same without the validity check (used for reporting).
double deviation_bound_unchecked(BoundVariant v, const TestFunction& g, int n, double delta,
                                 const ErgodicityParams& p);

enum class Theorem { thm1, thm2, pairs };
double bound_gn(const TestFunction& g, int n, double delta, const ErgodicityParams& p, Theorem which);
double bound_tn(const TestFunction& g, int n, double delta, const ErgodicityParams& p, Theorem which);

/// Empirical mean of the variant's statistic on one tree with at least n + 1 generations.
double variant_statistic(BoundVariant v, const TestFunction& f, const TreeSample& tree, int n);

struct ReferenceValue {
  double value = 0;
  double mc_halfwidth = 0;  // two batch-means standard errors
};

/// Integral of the variant's function against the invariant law, from one
/// tagged-branch run of `steps` transitions after a short burn-in.
ReferenceValue reference_value(BoundVariant v, const TestFunction& f, const TransitionKernel& kernel, double x0,
                               std::size_t steps, std::uint64_t seed);

struct DeviationRow {
  double delta, empirical, bound;
  bool valid, dominated;
};

struct VariantReport {
  BoundVariant variant;
  double bar = 0;
  ReferenceValue reference;
  std::vector<DeviationRow> rows;
  bool all_dominated() const noexcept;
};

struct DeviationReport {
  int n = 0;
  std::size_t replicates = 0;
  ErgodicityParams params;
  std::vector<VariantReport> variants;
};

struct DeviationSetup {
  int n = 10;
  std::size_t replicates = 500;
  std::vector<double> delta_grid;
  ErgodicityParams params;
  Interval indicator{1.5, 2.0};
  std::size_t reference_steps = 1'000'000;
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

/// 30 equispaced deltas 0.01, 0.02, ..., 0.30.
std::vector<double> default_delta_grid();

/// Dominance slack 2 sqrt(b (1 - b) / M) + 0.02.
double dominance_slack(double bound, std::size_t M);

DeviationReport validate_bounds(const TransitionKernel& kernel, const RootLaw& root_law, const DeviationSetup& setup);

void write_deviation_csv(std::ostream& out, const VariantReport& report);

struct ErgodicityInspection {
  ErgodicityParams params;
  std::vector<double> tv_decay;  // sup_x TV(Q^m(x, .), nu), m = 0, 1, ...
};

/// Heuristic (R, rho, qd): discretises Q on a grid of the kernel support,
/// fits the geometric decay of the total-variation distance to stationarity
/// and takes qd as the grid maximum of the density over S x D.
ErgodicityInspection inspect_ergodicity(const TransitionKernel& kernel, Interval D, std::size_t grid = 400,
                                        int max_power = 12);

}  // namespace bmc
