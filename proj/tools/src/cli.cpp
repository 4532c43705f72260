#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <bmc/config.hpp>
#include <bmc/csv.hpp>
#include <bmc/deviation.hpp>
#include <bmc/estimators.hpp>
#include <bmc/experiment.hpp>
#include <bmc/parallel.hpp>
#include <bmc/simulate.hpp>
#include <bmc/tree.hpp>

namespace bmc::cli {

namespace {

using Writer = std::function<void(std::ostream&)>;

void write_output(const std::string& path, std::ostream& out, const Writer& write) {
  if (path == "-") {
    write(out);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  write(f);
  if (!f) throw std::runtime_error("failed writing " + path);
}

TreeSample load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tree file " + path);
  return read_tree_csv(in);
}

TrialRate parse_spike(const std::string& s) {
  if (s == "large") return TrialRate::large_spike();
  if (s == "high") return TrialRate::high_spike();
  if (s == "baseline") return TrialRate::baseline();
  throw std::invalid_argument("unknown spike '" + s + "' (expected large, high or baseline)");
}

Interval parse_interval_list(const std::string& s, const std::string& what) {
  const auto parts = csv::split(s, ',');
  if (parts.size() != 2) throw std::invalid_argument(what + " expects lo,hi");
  Interval iv{csv::parse_double(parts[0]), csv::parse_double(parts[1])};
  iv.validate(what.c_str());
  return iv;
}

Interval parse_indicator(const std::string& s) {
  const auto parts = csv::split(s, ':');
  if (parts.size() != 3 || parts[0] != "indicator")
    throw std::invalid_argument("test function must be indicator:a:b, got '" + s + "'");
  Interval iv{csv::parse_double(parts[1]), csv::parse_double(parts[2])};
  iv.validate("indicator");
  return iv;
}

std::string describe_model(const ModelConfig& m) {
  std::ostringstream s;
  if (m.kind == "gf") {
    s << "gf(tau=" << m.tau << ", rate=" << m.spike.name() << ")";
  } else {
    s << "bar(f0=" << m.bar_f0 << ", f1=" << m.bar_f1 << ", sigma0=" << m.bar_sigma0 << ", sigma1=" << m.bar_sigma1
      << ", noise=" << m.bar_noise << ")";
  }
  return s.str();
}

// Options shared by several subcommands, recorded so that only flags given
// on the command line override the configuration file.
struct Overrides {
  std::string model, spike, root, index, target, out;
  double tau = 0, spike_c = 0, c = 0, varpi = 0, R = 0, rho = 0, qd = 0;
  int spike_j = 0, n = 0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and wavelet estimation for bifurcating Markov chains", "bmc"};
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  app.require_subcommand(1);

  std::string config_path;
  unsigned threads = 0;
  bool dry_run = false;
  app.add_option("--config", config_path, "Key = value configuration file")->check(CLI::ExistingFile);
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (default: machine parallelism)")
                          ->check(CLI::Range(1u, 1024u));
  app.add_flag("--dry-run", dry_run, "Print the resolved plan without running it");

  Overrides ov;
  std::map<std::string, std::vector<CLI::Option*>> given;
  auto common_model = [&](CLI::App* sub) {
    given["model"].push_back(sub->add_option("--model", ov.model, "gf or bar"));
    given["tau"].push_back(sub->add_option("--tau", ov.tau, "Growth rate"));
    given["spike"].push_back(sub->add_option("--spike", ov.spike, "large, high or baseline"));
    given["spike_c"].push_back(sub->add_option("--spike-c", ov.spike_c, "Spike amplitude"));
    given["spike_j"].push_back(sub->add_option("--spike-j", ov.spike_j, "Spike scale"));
    given["root"].push_back(sub->add_option("--root", ov.root, "Root law: uniform:a:b, point:x or empirical:file"));
  };
  auto seed_opt = [&](CLI::App* sub) { given["seed"].push_back(sub->add_option("--seed", ov.seed, "Base seed")); };

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a trait tree and write it as CSV");
  common_model(sim);
  seed_opt(sim);
  given["sim_n"].push_back(sim->add_option("--n", ov.n, "Number of generations"));
  std::string sim_out = "tree.csv";
  sim->add_option("--out", sim_out, "Output CSV ('-' for stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "Wavelet estimate from a tree CSV");
  std::string est_in, est_out = "estimate.csv", est_pyramid, est_domain;
  int est_J = -1;
  est->add_option("--in", est_in, "Tree CSV")->required();
  given["target"].push_back(est->add_option("--target", ov.target, "nu, q, p or b"));
  given["c"].push_back(est->add_option("--c", ov.c, "Threshold constant"));
  given["varpi"].push_back(est->add_option("--varpi", ov.varpi, "Quotient floor"));
  given["index"].push_back(est->add_option("--index", ov.index, "tree or gen"));
  given["est_tau"].push_back(est->add_option("--tau", ov.tau, "Growth rate (target b)"));
  auto* est_J_opt = est->add_option("--J", est_J, "Resolution level override");
  auto* est_domain_opt = est->add_option("--domain", est_domain, "Domain lo,hi");
  est->add_option("--out", est_out, "Grid CSV ('-' for stdout)");
  est->add_option("--pyramid-out", est_pyramid, "Optional coefficient pyramid CSV");

  // deviation
  auto* dev = app.add_subcommand("deviation", "Monte Carlo check of the deviation bounds");
  common_model(dev);
  seed_opt(dev);
  int dev_n = 10;
  std::size_t dev_reps = 500;
  dev->add_option("--n", dev_n, "Generation index n")->capture_default_str()->check(CLI::Range(2, 20));
  dev->add_option("--reps", dev_reps, "Replicates M")->capture_default_str();
  given["R"].push_back(dev->add_option("--R", ov.R, "Ergodicity constant R"));
  given["rho"].push_back(dev->add_option("--rho", ov.rho, "Ergodicity rate rho in (0, 0.5)"));
  given["qd"].push_back(dev->add_option("--qd", ov.qd, "Sup of the mean-transition density on S x D"));
  std::string dev_g = "indicator:1.5:2.0", dev_out = "deviation.csv", dev_variant = "all";
  std::size_t dev_ref_steps = 1'000'000;
  bool dev_inspect = false;
  dev->add_option("--g", dev_g, "Test function indicator:a:b");
  dev->add_option("--variant", dev_variant, "all, thm1_gn, thm1_tn, thm2_gn, thm2_tn or pairs");
  dev->add_option("--reference-steps", dev_ref_steps, "Length of the tagged-branch reference run");
  dev->add_flag("--inspect", dev_inspect, "Print the heuristic (R, rho, qd) of the kernel and exit");
  dev->add_option("--out", dev_out, "Report CSV; with --variant all, one file per variant (<stem>_<variant>.csv)");

  // table1
  auto* tab = app.add_subcommand("table1", "Monte Carlo error table of the splitting-rate estimator");
  seed_opt(tab);
  given["tab_spike"].push_back(tab->add_option("--spike", ov.spike, "large or high"));
  given["tab_reps"].push_back(tab->add_option("--reps", ov.reps, "Replicates M"));
  given["tab_c"].push_back(tab->add_option("--c", ov.c, "Threshold constant (default 10 large, 15 high)"));
  given["tab_varpi"].push_back(tab->add_option("--varpi", ov.varpi, "Quotient floor"));
  std::vector<int> tab_n{12, 15};
  std::vector<std::string> tab_index{"tree"}, tab_est{"threshold"};
  std::string tab_out = "table.csv", tab_reps_out;
  tab->add_option("--n", tab_n, "Generations, comma separated")->delimiter(',');
  tab->add_option("--index", tab_index, "tree and/or gen, comma separated")->delimiter(',');
  tab->add_option("--estimator", tab_est, "threshold and/or oracle, comma separated")->delimiter(',');
  tab->add_option("--out", tab_out, "Table CSV ('-' for stdout)");
  tab->add_option("--replicates-out", tab_reps_out, "Optional per-replicate CSV");

  // ratesweep
  auto* sweep = app.add_subcommand("ratesweep", "Mean error against tree size and log-log slope");
  seed_opt(sweep);
  given["sw_spike"].push_back(sweep->add_option("--spike", ov.spike, "large or high (target b)"));
  given["sw_target"].push_back(sweep->add_option("--target", ov.target, "b (growth-fragmentation) or nu (i.i.d. uniform)"));
  given["sw_reps"].push_back(sweep->add_option("--reps", ov.reps, "Replicates per n"));
  given["sw_c"].push_back(sweep->add_option("--c", ov.c, "Threshold constant"));
  std::vector<int> sweep_n{10, 12, 14};
  std::string sweep_out = "ratesweep.csv";
  sweep->add_option("--n", sweep_n, "Generations, comma separated")->delimiter(',');
  sweep->add_option("--out", sweep_out, "CSV ('-' for stdout)");

  // autocorr
  auto* ac = app.add_subcommand("autocorr", "Autocorrelation of the 0-children of the last parent generation");
  common_model(ac);
  seed_opt(ac);
  given["ac_n"].push_back(ac->add_option("--n", ov.n, "Generations when simulating"));
  std::string ac_in, ac_out = "autocorr.csv";
  int max_lag = 20;
  ac->add_option("--in", ac_in, "Tree CSV (simulated when omitted)");
  ac->add_option("--max-lag", max_lag, "Largest lag")->check(CLI::NonNegativeNumber);
  ac->add_option("--out", ac_out, "CSV ('-' for stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config(config_path);
    if (config_path.empty()) cfg.ergodicity = default_gf_ergodicity();
    if (const char* env = std::getenv("BMC_SEED"); env && *env) apply_config_value(cfg, "seed", env);

    auto set = [&](const std::string& name) {
      for (const auto* o : given[name])
        if (o->count() > 0) return true;
      return false;
    };
    if (set("model")) apply_config_value(cfg, "model", ov.model);
    if (set("tau") || set("est_tau")) apply_config_value(cfg, "tau", csv::format_double(ov.tau));
    if (set("spike") || set("tab_spike") || set("sw_spike")) cfg.model.spike = parse_spike(ov.spike);
    if (set("spike_c")) apply_config_value(cfg, "spike_c", csv::format_double(ov.spike_c));
    if (set("spike_j")) apply_config_value(cfg, "spike_j", std::to_string(ov.spike_j));
    if (set("root")) cfg.root = ov.root;
    if (set("seed")) cfg.seed = ov.seed;
    if (set("sim_n") || set("ac_n")) apply_config_value(cfg, "n", std::to_string(ov.n));
    if (set("tab_reps") || set("sw_reps")) apply_config_value(cfg, "reps", std::to_string(ov.reps));
    if (set("c") || set("tab_c") || set("sw_c")) apply_config_value(cfg, "c", csv::format_double(ov.c));
    if (set("varpi") || set("tab_varpi")) apply_config_value(cfg, "varpi", csv::format_double(ov.varpi));
    if (set("index")) apply_config_value(cfg, "index", ov.index);
    if (set("target") || set("sw_target")) apply_config_value(cfg, "target", ov.target);
    if (set("R")) apply_config_value(cfg, "R", csv::format_double(ov.R));
    if (set("rho")) apply_config_value(cfg, "rho", csv::format_double(ov.rho));
    if (set("qd")) apply_config_value(cfg, "qd", csv::format_double(ov.qd));
    if (threads_opt->count() > 0) cfg.threads = threads;
    const unsigned workers = cfg.threads.value_or(default_threads());

    if (sim->parsed()) {
      if (dry_run) {
        out << "plan: simulate model=" << describe_model(cfg.model) << " n=" << cfg.n << " seed=" << cfg.seed
            << " root=" << cfg.root << " out=" << sim_out << "\n";
        return 0;
      }
      const auto kernel = make_kernel(cfg.model);
      const auto root = RootLaw::parse(cfg.root);
      root.check_support(kernel->support());
      const auto tree = simulate_tree(*kernel, root, cfg.n, cfg.seed);
      write_output(sim_out, out, [&](std::ostream& o) { write_tree_csv(o, tree); });
      return 0;
    }

    if (est->parsed()) {
      EstimatorConfig ec = cfg.estimator_config();
      if (est_J_opt->count() > 0) ec.J_override = est_J;
      if (est_domain_opt->count() > 0) ec.domain = parse_interval_list(est_domain, "--domain");
      if (dry_run) {
        out << "plan: estimate target=" << to_string(ec.target) << " in=" << est_in << " c=" << ec.c
            << " varpi=" << ec.varpi << " index=" << to_string(ec.index) << " domain=[" << ec.domain.lo << ","
            << ec.domain.hi << "] out=" << est_out << "\n";
        return 0;
      }
      const auto tree = load_tree(est_in);
      if (ec.target == Target::b) {
        const auto b = estimate_b(tree, ec);
        write_output(est_out, out, [&](std::ostream& o) {
          o << "x,value\n";
          for (std::size_t i = 0; i < b.x.size(); ++i)
            o << csv::format_double(b.x[i]) << ',' << csv::format_double(b.values[i]) << '\n';
        });
        if (!est_pyramid.empty())
          write_output(est_pyramid, out, [&](std::ostream& o) { write_pyramid_csv(o, b.nu.pyramid); });
        err << "estimate b: J=" << b.J << " grid=" << b.x.size() << " compression=" << b.compression << "\n";
        return 0;
      }
      DensityEstimate d;
      switch (ec.target) {
        case Target::nu: d = estimate_nu(tree, ec); break;
        case Target::q: d = estimate_q(tree, ec); break;
        case Target::p: d = estimate_p(tree, ec); break;
        case Target::b: break;
      }
      write_output(est_out, out, [&](std::ostream& o) { write_grid_csv(o, d); });
      if (!est_pyramid.empty()) write_output(est_pyramid, out, [&](std::ostream& o) { write_pyramid_csv(o, d.pyramid); });
      err << "estimate " << to_string(ec.target) << ": J=" << d.J << " kept=" << d.kept_fraction << "\n";
      return 0;
    }

    if (dev->parsed()) {
      const auto kernel = make_kernel(cfg.model);
      const Interval A = parse_indicator(dev_g);
      if (dev_inspect) {
        if (dry_run) {
          out << "plan: inspect ergodicity of " << describe_model(cfg.model) << "\n";
          return 0;
        }
        const auto insp = inspect_ergodicity(*kernel, A);
        out << "R=" << csv::format_double(insp.params.R) << " rho=" << csv::format_double(insp.params.rho)
            << " qd=" << csv::format_double(insp.params.qd) << "\n";
        return 0;
      }
      DeviationSetup setup;
      setup.n = dev_n;
      setup.replicates = dev_reps;
      setup.params = cfg.ergodicity;
      setup.indicator = A;
      setup.reference_steps = dev_ref_steps;
      setup.seed = cfg.seed;
      setup.threads = workers;
      if (dry_run) {
        out << "plan: deviation model=" << describe_model(cfg.model) << " n=" << setup.n << " reps=" << setup.replicates
            << " g=" << dev_g << " R=" << setup.params.R << " rho=" << setup.params.rho << " qd=" << setup.params.qd
            << " variant=" << dev_variant << " out=" << dev_out << "\n";
        return 0;
      }
      const auto report = validate_bounds(*kernel, RootLaw::parse(cfg.root), setup);
      bool found = false;
      for (const auto& v : report.variants) {
        const std::string name = to_string(v.variant);
        if (dev_variant != "all" && dev_variant != name) continue;
        found = true;
        std::string path = dev_out;
        if (dev_variant == "all" && dev_out != "-") {
          const auto dot = dev_out.rfind('.');
          path = dot == std::string::npos ? dev_out + "_" + name : dev_out.substr(0, dot) + "_" + name + dev_out.substr(dot);
        }
        write_output(path, out, [&](std::ostream& o) { write_deviation_csv(o, v); });
        err << name << ": bar=" << csv::format_double(v.bar) << " reference=" << csv::format_double(v.reference.value)
            << " +- " << csv::format_double(v.reference.mc_halfwidth) << " dominated=" << (v.all_dominated() ? "yes" : "no")
            << "\n";
      }
      if (!found) throw std::invalid_argument("unknown bound variant '" + dev_variant + "'");
      return 0;
    }

    if (tab->parsed()) {
      TableConfig t;
      t.spike = cfg.model.spike;
      t.n_list = tab_n;
      t.replicates = cfg.reps;
      t.c = cfg.c;
      t.varpi = cfg.varpi;
      t.tau = cfg.model.tau;
      t.indices.clear();
      for (const auto& s : tab_index) t.indices.push_back(parse_index_set(s));
      t.estimators.clear();
      for (const auto& s : tab_est) t.estimators.push_back(parse_estimator_kind(s));
      t.wavelet_order = cfg.wavelet_order;
      t.j0 = cfg.j0;
      t.domain = cfg.domain;
      t.root_law = RootLaw::parse(cfg.root);
      t.seed = cfg.seed;
      t.threads = workers;
      if (dry_run) {
        out << "plan: table1 spike=" << t.spike.name() << " n=";
        for (std::size_t i = 0; i < t.n_list.size(); ++i) out << (i ? "," : "") << t.n_list[i];
        out << " reps=" << t.replicates << " c=" << t.c.value_or(default_threshold_constant(t.spike))
            << " seed=" << t.seed << " out=" << tab_out << "\n";
        return 0;
      }
      const auto cells = run_table(t);
      write_output(tab_out, out, [&](std::ostream& o) { write_table_csv(o, cells); });
      if (!tab_reps_out.empty()) write_output(tab_reps_out, out, [&](std::ostream& o) { write_replicates_csv(o, cells); });
      std::size_t failures = 0;
      for (const auto& c : cells) failures += c.stats.failures;
      if (failures > 0) {
        err << "error: " << failures << " replicate failures\n";
        return 1;
      }
      return 0;
    }

    if (sweep->parsed()) {
      RateSweepConfig r;
      r.target = cfg.target;
      r.spike = cfg.model.spike;
      r.n_list = sweep_n;
      r.replicates = cfg.reps;
      r.c = cfg.c;
      r.varpi = cfg.varpi;
      r.domain = cfg.domain;
      r.seed = cfg.seed;
      r.threads = workers;
      if (dry_run) {
        out << "plan: ratesweep target=" << to_string(r.target) << " reps=" << r.replicates << " seed=" << r.seed
            << " out=" << sweep_out << "\n";
        return 0;
      }
      const auto res = rate_sweep(r);
      write_output(sweep_out, out, [&](std::ostream& o) { write_rate_sweep_csv(o, res); });
      err << "slope=" << csv::format_double(res.slope) << "\n";
      return 0;
    }

    if (ac->parsed()) {
      if (dry_run) {
        out << "plan: autocorr " << (ac_in.empty() ? "simulate " + describe_model(cfg.model) : "in=" + ac_in)
            << " max_lag=" << max_lag << " out=" << ac_out << "\n";
        return 0;
      }
      std::optional<TreeSample> tree;
      if (ac_in.empty()) {
        const auto kernel = make_kernel(cfg.model);
        tree = simulate_tree(*kernel, RootLaw::parse(cfg.root), cfg.n, cfg.seed);
      } else {
        tree = load_tree(ac_in);
      }
      const auto rho = generation_autocorr(*tree, max_lag);
      write_output(ac_out, out, [&](std::ostream& o) {
        o << "lag,rho\n";
        for (const auto& p : rho) o << p.lag << ',' << csv::format_double(p.rho) << '\n';
      });
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace bmc::cli
