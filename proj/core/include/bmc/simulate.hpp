#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bmc/kernels.hpp"
#include "bmc/rng.hpp"
#include "bmc/tree.hpp"

namespace bmc {

/// Law of the root trait X_root.
class RootLaw {
 public:
  struct Uniform { double a, b; };
  struct Point { double x; };
  struct Empirical { std::vector<double> values; };

  static RootLaw uniform(double a, double b);
  static RootLaw point(double x);
  static RootLaw empirical(std::vector<double> values);
  /// One value per line (a header line is skipped if it does not parse).
  static RootLaw empirical_file(const std::string& path);
  /// "uniform:a:b", "point:x" or "empirical:<path>".
  static RootLaw parse(const std::string& spec);

  double sample(Rng& rng) const;
  std::string describe() const;
  void check_support(const Interval& support) const;

 private:
  explicit RootLaw(std::variant<Uniform, Point, Empirical> law) : law_(std::move(law)) {}
  std::variant<Uniform, Point, Empirical> law_;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::uint64_t node) : std::runtime_error(what), node_(node) {}
  std::uint64_t node() const noexcept { return node_; }

 private:
  std::uint64_t node_;
};

/// Simulates (X_u, u in T_n). The offspring of node u are drawn from the
/// random stream keyed by (seed, u + 1) and the root from stream 0, so the
/// result depends only on the arguments.
TreeSample simulate_tree(const TransitionKernel& kernel, const RootLaw& root_law, int n,
                         std::uint64_t seed);

/// Tagged-branch chain Y_0 = x0, Y_{k+1} = one child of a fresh offspring
/// pair drawn from Y_k, chosen by a fair coin. Returns m + 1 traits.
std::vector<double> tagged_branch(const TransitionKernel& kernel, double x0, std::size_t m,
                                  std::uint64_t seed);

struct AutocorrPoint {
  int lag;
  double rho;
};

/// Sample autocorrelation of a series at lags 0..max_lag.
std::vector<AutocorrPoint> sample_autocorr(std::span<const double> series, int max_lag);

/// Autocorrelation of (X_u0, u in G_{n-1}) taken in node-id order.
std::vector<AutocorrPoint> generation_autocorr(const TreeSample& tree, int max_lag);

}  // namespace bmc
