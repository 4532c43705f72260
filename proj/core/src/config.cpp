#include "bmc/config.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <numbers>

#include "bmc/csv.hpp"

namespace bmc {

namespace {

double as_double(const std::string& key, const std::string& v) {
  try {
    return csv::parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
}

long long as_int(const std::string& key, const std::string& v) {
  try {
    return csv::parse_int(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not an integer");
  }
}

double in_range(const std::string& key, double v, double lo, double hi, bool open_lo = false, bool open_hi = false) {
  const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
  if (!ok) {
    throw ConfigError(key + " must lie in " + (open_lo ? "(" : "[") + csv::format_double(lo) + ", " +
                      csv::format_double(hi) + (open_hi ? ")" : "]") + ", got " + csv::format_double(v));
  }
  return v;
}

std::vector<double> preset_args(const std::string& spec, const std::string& kind, std::size_t min_args,
                                std::size_t max_args) {
  const auto parts = csv::split(spec, ':');
  if (parts.size() - 1 < min_args || parts.size() - 1 > max_args)
    throw ConfigError("preset '" + spec + "' has the wrong number of arguments for " + kind);
  std::vector<double> out;
  for (std::size_t i = 1; i < parts.size(); ++i) out.push_back(as_double(spec, parts[i]));
  return out;
}

BarModel::Fn make_mean(const std::string& spec) {
  const std::string kind = csv::split(spec, ':').front();
  if (kind == "zero") return [](double) { return 0.0; };
  if (kind == "const") {
    const double a = preset_args(spec, kind, 1, 1)[0];
    return [a](double) { return a; };
  }
  if (kind == "linear") {
    const auto a = preset_args(spec, kind, 1, 2);
    const double slope = a[0], icpt = a.size() > 1 ? a[1] : 0.0;
    return [slope, icpt](double x) { return slope * x + icpt; };
  }
  if (kind == "tanh") {
    const double a = preset_args(spec, kind, 1, 1)[0];
    return [a](double x) { return a * std::tanh(x); };
  }
  throw ConfigError("unknown BAR mean preset '" + spec + "'");
}

BarModel::Fn make_sigma(const std::string& spec) {
  const std::string kind = csv::split(spec, ':').front();
  if (kind == "const") {
    const double s = preset_args(spec, kind, 1, 1)[0];
    if (!(s > 0.0)) throw ConfigError("BAR volatility must be positive");
    return [s](double) { return s; };
  }
  if (kind == "bump") {
    const auto a = preset_args(spec, kind, 2, 2);
    if (!(a[0] > 0.0) || a[1] < 0.0) throw ConfigError("BAR bump volatility needs s0 > 0 and s1 >= 0");
    return [s0 = a[0], s1 = a[1]](double x) { return s0 + s1 * std::exp(-x * x); };
  }
  throw ConfigError("unknown BAR volatility preset '" + spec + "'");
}

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

std::pair<double, double> normal_pair(Rng& rng) {
  // Box-Muller on two open-interval uniforms.
  const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
  const double t = 2.0 * std::numbers::pi * rng.uniform();
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace

EstimatorConfig RunConfig::estimator_config() const {
  EstimatorConfig e;
  e.target = target;
  e.c = effective_c();
  e.varpi = varpi;
  e.domain = domain;
  e.wavelet = make_wavelet(wavelet_order, j0);
  e.index = index;
  e.tau = model.tau;
  return e;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "model") {
    if (value != "gf" && value != "bar") throw ConfigError("model must be gf or bar, got '" + value + "'");
    cfg.model.kind = value;
  } else if (key == "tau") {
    cfg.model.tau = in_range(key, as_double(key, value), 0.0, 1e6, true);
  } else if (key == "spike_c") {
    cfg.model.spike.amplitude = in_range(key, as_double(key, value), 0.0, 1e6);
  } else if (key == "spike_j") {
    cfg.model.spike.scale = static_cast<int>(in_range(key, static_cast<double>(as_int(key, value)), 0, 20));
  } else if (key == "bar.f0") {
    make_mean(value);
    cfg.model.bar_f0 = value;
  } else if (key == "bar.f1") {
    make_mean(value);
    cfg.model.bar_f1 = value;
  } else if (key == "bar.sigma0") {
    make_sigma(value);
    cfg.model.bar_sigma0 = value;
  } else if (key == "bar.sigma1") {
    make_sigma(value);
    cfg.model.bar_sigma1 = value;
  } else if (key == "bar.noise") {
    if (value != "gaussian" && value.rfind("gaussian_corr:", 0) != 0)
      throw ConfigError("bar.noise must be gaussian or gaussian_corr:r");
    if (value != "gaussian") in_range(key, preset_args(value, "gaussian_corr", 1, 1)[0], -1.0, 1.0, true, true);
    cfg.model.bar_noise = value;
  } else if (key == "c") {
    cfg.c = in_range(key, as_double(key, value), 0.0, 1e6);
  } else if (key == "varpi") {
    cfg.varpi = in_range(key, as_double(key, value), 0.0, 1e6, true);
  } else if (key == "domain_lo") {
    cfg.domain.lo = as_double(key, value);
  } else if (key == "domain_hi") {
    cfg.domain.hi = as_double(key, value);
  } else if (key == "wavelet_order") {
    cfg.wavelet_order = static_cast<int>(in_range(key, static_cast<double>(as_int(key, value)), 1, 10));
  } else if (key == "j0") {
    cfg.j0 = static_cast<int>(in_range(key, static_cast<double>(as_int(key, value)), 0, 10));
  } else if (key == "index") {
    try {
      cfg.index = parse_index_set(value);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "target") {
    try {
      cfg.target = parse_target(value);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "root") {
    cfg.root = value;
  } else if (key == "n") {
    cfg.n = static_cast<int>(in_range(key, static_cast<double>(as_int(key, value)), 0, 24));
  } else if (key == "reps") {
    cfg.reps = static_cast<std::size_t>(in_range(key, static_cast<double>(as_int(key, value)), 1, 1e7));
  } else if (key == "R") {
    cfg.ergodicity.R = in_range(key, as_double(key, value), 0.0, 1e12, true);
  } else if (key == "rho") {
    const double v = as_double(key, value);
    if (!(v > 0.0 && v < 0.5)) throw ConfigError("rho must lie in (0, 0.5)");
    cfg.ergodicity.rho = v;
  } else if (key == "qd") {
    cfg.ergodicity.qd = in_range(key, as_double(key, value), 0.0, 1e12);
  } else if (key == "indicator_lo") {
    cfg.indicator.lo = as_double(key, value);
  } else if (key == "indicator_hi") {
    cfg.indicator.hi = as_double(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(as_int(key, value));
  } else if (key == "threads") {
    cfg.threads = static_cast<unsigned>(in_range(key, static_cast<double>(as_int(key, value)), 1, 1024));
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  cfg.ergodicity = default_gf_ergodicity();
  CLI::ConfigINI ini;
  std::vector<CLI::ConfigItem> items;
  try {
    items = ini.from_config(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "--") continue;  // section markers
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    apply_config_value(cfg, item.fullname(), value);
  }
  if (!(cfg.domain.lo < cfg.domain.hi)) throw ConfigError("domain_lo must be below domain_hi");
  if (!(cfg.indicator.lo < cfg.indicator.hi)) throw ConfigError("indicator_lo must be below indicator_hi");
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  return parse_config(in);
}

// Heuristic: inspect_ergodicity on the baseline and both spikes with D = [1.5, 2]
// gives R <= 12.3, rho <= 0.16 and qd <= 3.21; each is rounded up.
ErgodicityParams default_gf_ergodicity() { return {13.0, 0.2, 3.5}; }

std::unique_ptr<BarModel> make_bar_model(const ModelConfig& m) {
  BarModel::Params p;
  p.f0 = make_mean(m.bar_f0);
  p.f1 = make_mean(m.bar_f1);
  p.sigma0 = make_sigma(m.bar_sigma0);
  p.sigma1 = make_sigma(m.bar_sigma1);
  if (m.bar_noise == "gaussian") {
    p.noise = normal_pair;
  } else {
    const double r = preset_args(m.bar_noise, "gaussian_corr", 1, 1)[0];
    const double s = std::sqrt(1.0 - r * r);
    p.noise = [r, s](Rng& rng) {
      const auto [a, b] = normal_pair(rng);
      return std::pair{a, r * a + s * b};
    };
  }
  p.g0 = std_normal_pdf;
  p.g1 = std_normal_pdf;
  return std::make_unique<BarModel>(std::move(p));
}

std::unique_ptr<TransitionKernel> make_kernel(const ModelConfig& m) {
  if (m.kind == "gf") return std::make_unique<GrowthFragModel>(m.tau, m.spike.splitting_rate());
  if (m.kind == "bar") return make_bar_model(m);
  throw ConfigError("unknown model '" + m.kind + "'");
}

}  // namespace bmc
