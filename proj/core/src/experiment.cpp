#include "bmc/experiment.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "bmc/csv.hpp"
#include "bmc/parallel.hpp"

namespace bmc {

double relative_error(const std::vector<double>& estimate, const std::vector<double>& truth) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("relative_error: grids differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    num += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  if (!(den > 0.0)) throw std::invalid_argument("relative_error: truth has zero norm");
  return std::sqrt(num) / std::sqrt(den);
}

std::string to_string(EstimatorKind k) { return k == EstimatorKind::threshold ? "threshold" : "oracle"; }

EstimatorKind parse_estimator_kind(const std::string& s) {
  if (s == "threshold") return EstimatorKind::threshold;
  if (s == "oracle") return EstimatorKind::oracle;
  throw std::invalid_argument("unknown estimator '" + s + "' (expected threshold or oracle)");
}

ErrorStats ErrorStats::from_errors(std::vector<double> errors) {
  ErrorStats s;
  s.errors = std::move(errors);
  if (s.errors.empty()) return s;
  double sum = 0.0;
  for (double e : s.errors) sum += e;
  s.mean = sum / static_cast<double>(s.errors.size());
  double var = 0.0;
  for (double e : s.errors) var += (e - s.mean) * (e - s.mean);
  s.sd = std::sqrt(var / static_cast<double>(s.errors.size()));
  return s;
}

double default_threshold_constant(const TrialRate& rate) { return rate.scale >= 4 ? 15.0 : 10.0; }

namespace {

struct CellKey {
  int n;
  IndexSet index;
  EstimatorKind estimator;
};

struct CellResult {
  bool ok = false;
  double error = 0, compression = 0;
  int J = 0;
  std::vector<double> errors_by_level;
};

std::vector<double> truth_on(const TrialRate& rate, const std::vector<double>& x) {
  std::vector<double> t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = rate(x[i]);
  return t;
}

}  // namespace

std::vector<TableCell> run_table(const TableConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("run_table needs at least one replicate");
  if (cfg.n_list.empty()) throw std::invalid_argument("run_table needs at least one n");
  int n_max = 0;
  for (int n : cfg.n_list) {
    if (n < 1) throw std::invalid_argument("run_table needs n >= 1");
    n_max = std::max(n_max, n);
  }

  std::vector<CellKey> keys;
  for (int n : cfg.n_list)
    for (IndexSet idx : cfg.indices)
      for (EstimatorKind est : cfg.estimators) keys.push_back({n, idx, est});

  const GrowthFragModel model(cfg.tau, cfg.spike.splitting_rate());
  EstimatorConfig est_cfg;
  est_cfg.target = Target::b;
  est_cfg.c = cfg.c.value_or(default_threshold_constant(cfg.spike));
  est_cfg.varpi = cfg.varpi;
  est_cfg.domain = cfg.domain;
  est_cfg.wavelet = make_wavelet(cfg.wavelet_order, cfg.j0);
  est_cfg.tau = cfg.tau;
  est_cfg.validate();

  std::vector<std::vector<CellResult>> results(cfg.replicates, std::vector<CellResult>(keys.size()));
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    try {
      const auto full = simulate_tree(model, cfg.root_law, n_max, cfg.seed + r);
      for (std::size_t k = 0; k < keys.size(); ++k) {
        const auto& key = keys[k];
        const auto prefix = full.tree_traits(key.n);
        const TreeSample tree(key.n, std::vector<double>(prefix.begin(), prefix.end()));
        EstimatorConfig c = est_cfg;
        c.index = key.index;
        const double N = static_cast<double>(index_sample(tree, key.index).size());
        const auto truth = truth_on(cfg.spike, rate_grid(c.domain, N));
        CellResult& out = results[r][k];
        if (key.estimator == EstimatorKind::threshold) {
          const auto est = estimate_b(tree, c);
          out.error = relative_error(est.values, truth);
          out.compression = est.compression;
          out.J = est.J;
        } else {
          const auto oracle = oracle_estimate(tree, truth, c, cfg.oracle_J_max);
          out.error = oracle.error;
          out.J = oracle.J_star;
          out.errors_by_level = oracle.errors_by_level;
        }
        out.ok = true;
      }
    } catch (const std::exception&) {
      // counted as a failure below
    }
  });

  std::vector<TableCell> cells;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    TableCell cell{cfg.spike.name(), keys[k].n, keys[k].index, keys[k].estimator, {}, {}};
    std::size_t failures = 0;
    std::vector<std::size_t> ok;
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      if (results[r][k].ok) {
        ok.push_back(r);
      } else {
        ++failures;
      }
    }
    int J_star = -1;
    if (keys[k].estimator == EstimatorKind::oracle && !ok.empty()) {
      // One level for the whole cell: the minimiser of the mean error.
      const std::size_t levels = results[ok.front()][k].errors_by_level.size();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < levels; ++l) {
        double m = 0.0;
        for (std::size_t r : ok) m += results[r][k].errors_by_level[l];
        if (m < best) {
          best = m;
          J_star = est_cfg.wavelet.j0 + 1 + static_cast<int>(l);
        }
      }
      for (std::size_t r : ok) {
        auto& res = results[r][k];
        res.error = res.errors_by_level[static_cast<std::size_t>(J_star - est_cfg.wavelet.j0 - 1)];
        res.J = J_star;
      }
    }
    std::vector<double> errors;
    double compression = 0.0;
    for (std::size_t r : ok) {
      const auto& res = results[r][k];
      errors.push_back(res.error);
      compression += res.compression;
      cell.replicates.push_back({r, cfg.seed + r, res.error, res.compression, res.J});
    }
    cell.stats = ErrorStats::from_errors(std::move(errors));
    cell.stats.compression = ok.empty() ? 0.0 : compression / static_cast<double>(ok.size());
    cell.stats.J_star = J_star;
    cell.stats.failures = failures;
    cells.push_back(std::move(cell));
  }
  return cells;
}

void write_table_csv(std::ostream& out, const std::vector<TableCell>& cells) {
  out << "spike,n,index,estimator,mean_err,sd_err,compression,J_star\n";
  for (const auto& c : cells) {
    out << c.spike << ',' << c.n << ',' << to_string(c.index) << ',' << to_string(c.estimator) << ','
        << csv::format_double(c.stats.mean) << ',' << csv::format_double(c.stats.sd) << ','
        << csv::format_double(c.stats.compression) << ',' << c.stats.J_star << '\n';
  }
}

void write_replicates_csv(std::ostream& out, const std::vector<TableCell>& cells) {
  out << "spike,n,index,estimator,replicate,seed,error,compression,J\n";
  for (const auto& c : cells) {
    for (const auto& r : c.replicates) {
      out << c.spike << ',' << c.n << ',' << to_string(c.index) << ',' << to_string(c.estimator) << ','
          << r.replicate << ',' << r.seed << ',' << csv::format_double(r.error) << ','
          << csv::format_double(r.compression) << ',' << r.J << '\n';
    }
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

RateSweepResult rate_sweep(const RateSweepConfig& cfg) {
  if (cfg.n_list.size() < 3) throw std::invalid_argument("rate_sweep needs at least three values of n");
  if (cfg.target != Target::b && cfg.target != Target::nu)
    throw std::invalid_argument("rate_sweep supports targets b and nu");
  RateSweepResult out;
  if (cfg.target == Target::b) {
    TableConfig t;
    t.spike = cfg.spike;
    t.n_list = cfg.n_list;
    t.replicates = cfg.replicates;
    t.c = cfg.c;
    t.varpi = cfg.varpi;
    t.domain = cfg.domain;
    t.seed = cfg.seed;
    t.threads = cfg.threads;
    for (const auto& cell : run_table(t)) {
      out.n.push_back(cell.n);
      out.tree_size.push_back(static_cast<double>(tree_size(cell.n)));
      out.mean_error.push_back(cell.stats.mean);
    }
  } else {
    EstimatorConfig ec;
    ec.target = Target::nu;
    ec.c = cfg.c.value_or(10.0);
    ec.domain = cfg.domain;
    const double level = 1.0 / cfg.domain.length();
    for (int n : cfg.n_list) {
      std::vector<double> errs(cfg.replicates);
      parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
        Rng rng(cfg.seed + r, static_cast<std::uint64_t>(n));
        std::vector<double> traits(tree_size(n));
        for (auto& v : traits) v = cfg.domain.lo + cfg.domain.length() * rng.uniform();
        const auto est = estimate_nu(TreeSample(n, std::move(traits)), ec);
        errs[r] = relative_error(est.values, std::vector<double>(est.values.size(), level));
      });
      double m = 0.0;
      for (double e : errs) m += e;
      out.n.push_back(n);
      out.tree_size.push_back(static_cast<double>(tree_size(n)));
      out.mean_error.push_back(m / static_cast<double>(cfg.replicates));
    }
  }
  out.slope = loglog_slope(out.tree_size, out.mean_error);
  return out;
}

void write_rate_sweep_csv(std::ostream& out, const RateSweepResult& r) {
  out << "n,tree_size,mean_err\n";
  for (std::size_t i = 0; i < r.n.size(); ++i)
    out << r.n[i] << ',' << csv::format_double(r.tree_size[i]) << ',' << csv::format_double(r.mean_error[i]) << '\n';
}

}  // namespace bmc
