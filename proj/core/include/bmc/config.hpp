#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "bmc/deviation.hpp"
#include "bmc/estimators.hpp"
#include "bmc/kernels.hpp"
#include "bmc/trial_rate.hpp"

namespace bmc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelConfig {
  std::string kind = "gf";  // gf | bar
  double tau = 2.0;
  TrialRate spike = TrialRate::large_spike();
  // BAR presets, see make_bar_model.
  std::string bar_f0 = "linear:0.5";
  std::string bar_f1 = "linear:0.5";
  std::string bar_sigma0 = "const:1";
  std::string bar_sigma1 = "const:1";
  std::string bar_noise = "gaussian";
};

struct RunConfig {
  ModelConfig model;
  std::optional<double> c;  // threshold constant; 10 when unset (15 for the high spike)
  double varpi = 1e-3;
  Interval domain{1.5, 4.8};
  int wavelet_order = 8;
  int j0 = 2;
  IndexSet index = IndexSet::tree;
  Target target = Target::b;
  std::string root = "uniform:1.25:2.25";
  int n = 15;
  std::size_t reps = 100;
  ErgodicityParams ergodicity{};
  Interval indicator{1.5, 2.0};
  std::uint64_t seed = 42;
  std::optional<unsigned> threads;
  std::string out_dir = ".";

  double effective_c() const { return c.value_or(model.spike.scale >= 4 ? 15.0 : 10.0); }
  EstimatorConfig estimator_config() const;
};

/// Reads `key = value` lines (# comments). Every key must be one of the
/// documented RunConfig fields; values are range-checked.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::string& path);
/// Applies one key/value pair, with the same validation as the file loader.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Documented conservative (R, rho, qd) for the growth-fragmentation demo.
ErgodicityParams default_gf_ergodicity();

/// BAR presets. f: zero | const:a | linear:a[:b] (a x + b) | tanh:a (a tanh x);
/// sigma: const:s | bump:s0:s1 (s0 + s1 exp(-x^2)); noise: gaussian |
/// gaussian_corr:r (standard normal marginals with correlation r).
std::unique_ptr<BarModel> make_bar_model(const ModelConfig& m);
std::unique_ptr<TransitionKernel> make_kernel(const ModelConfig& m);

}  // namespace bmc
