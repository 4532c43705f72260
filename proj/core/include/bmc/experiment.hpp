#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bmc/estimators.hpp"
#include "bmc/simulate.hpp"
#include "bmc/trial_rate.hpp"

namespace bmc {

/// sqrt(sum (est - truth)^2) / sqrt(sum truth^2). Throws when the truth has zero norm.
double relative_error(const std::vector<double>& estimate, const std::vector<double>& truth);

enum class EstimatorKind { threshold, oracle };
std::string to_string(EstimatorKind k);
EstimatorKind parse_estimator_kind(const std::string& s);

struct ErrorStats {
  std::vector<double> errors;
  double mean = 0;
  double sd = 0;           // population standard deviation (1/M)
  double compression = 0;  // mean fraction of zeroed detail coefficients
  int J_star = -1;         // oracle only
  std::size_t failures = 0;

  static ErrorStats from_errors(std::vector<double> errors);
};

/// Calibrated threshold constants: 10 for the large spike, 15 for the high one.
double default_threshold_constant(const TrialRate& rate);

struct TableConfig {
  TrialRate spike = TrialRate::large_spike();
  std::vector<int> n_list{12, 15};
  std::size_t replicates = 100;
  std::optional<double> c;  // default_threshold_constant when empty
  double varpi = 1e-3;
  double tau = 2.0;
  std::vector<IndexSet> indices{IndexSet::tree};
  std::vector<EstimatorKind> estimators{EstimatorKind::threshold};
  int wavelet_order = 8;
  int j0 = 2;
  int oracle_J_max = 10;
  Interval domain{1.5, 4.8};
  RootLaw root_law = RootLaw::uniform(1.25, 2.25);
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct ReplicateRecord {
  std::size_t replicate;
  std::uint64_t seed;
  double error;
  double compression;
  int J;
};

struct TableCell {
  std::string spike;
  int n;
  IndexSet index;
  EstimatorKind estimator;
  ErrorStats stats;
  std::vector<ReplicateRecord> replicates;
};

/// Replicate i uses seed + i; every (n, index, estimator) cell of one replicate
/// shares the same simulated tree.
std::vector<TableCell> run_table(const TableConfig& cfg);

void write_table_csv(std::ostream& out, const std::vector<TableCell>& cells);
void write_replicates_csv(std::ostream& out, const std::vector<TableCell>& cells);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RateSweepConfig {
  Target target = Target::b;  // b: growth-fragmentation spike; nu: i.i.d. uniform synthetic traits
  TrialRate spike = TrialRate::large_spike();
  std::vector<int> n_list{10, 12, 14};
  std::size_t replicates = 20;
  std::optional<double> c;
  double varpi = 1e-3;
  Interval domain{1.5, 4.8};
  std::uint64_t seed = 42;
  unsigned threads = 1;
};

struct RateSweepResult {
  std::vector<int> n;
  std::vector<double> tree_size;
  std::vector<double> mean_error;
  double slope = 0;
};

RateSweepResult rate_sweep(const RateSweepConfig& cfg);
void write_rate_sweep_csv(std::ostream& out, const RateSweepResult& r);

}  // namespace bmc
