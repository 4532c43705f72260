#include "bmc/deviation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include "bmc/csv.hpp"
#include "bmc/parallel.hpp"
#include "bmc/quadrature.hpp"

namespace bmc {

namespace {

double min_enumeration(double base, double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("variance proxy needs n >= 1");
  if (n == 1) return base;
  double best = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= n - 1; ++l) best = std::min(best, a * a * std::ldexp(1.0, l) + b * b * std::ldexp(1.0, -l));
  return base + best;
}

double exponential_bound(double count, double delta, double var_term, double lin_coeff) {
  const double b = std::exp(-count * delta * delta / (var_term + lin_coeff * delta));
  return std::clamp(b, 0.0, 1.0);
}

double pg_linf(const TestFunction& g) {
  if (!g.pg_linf) throw std::invalid_argument("supply kernel norms (|Pg|_inf)");
  return *g.pg_linf;
}

}  // namespace

void ErgodicityParams::validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("R must be positive");
  if (!(rho > 0.0 && rho < 0.5)) throw std::invalid_argument("rho must lie in (0, 0.5)");
  if (!(qd >= 0.0) || !std::isfinite(qd)) throw std::invalid_argument("qd must be non-negative");
}

KappaSet kappas(const ErgodicityParams& p) {
  p.validate();
  const double R = p.R, r = p.rho, q = p.qd;
  const double a = 4 * R * R * (1 + r) * (1 + r);
  const double inv = 1.0 / (1 - 2 * r);
  KappaSet k{};
  k.k1 = 32 * std::max({q, 4 * q * q, a});
  k.k2 = 16.0 / 3.0 * std::max(1 + R * r, R * (1 + r));
  k.k3 = 96 * std::max({q, 16 * q * q, a * inv * inv});
  k.k4 = 16.0 / 3.0 * std::max(1 + R * r, R * (1 + r) * inv);
  k.k5 = std::max(q, q * q) * k.k1;
  return k;
}

TestFunction indicator_1d(Interval A) {
  A.validate("indicator");
  TestFunction g;
  g.arity = 1;
  g.eval = [A](std::span<const double> x) { return A.contains(x[0]) ? 1.0 : 0.0; };
  g.l1 = g.l2sq = A.length();
  g.linf = 1.0;
  g.name = "indicator";
  return g;
}

TestFunction indicator_pair(Interval A) {
  A.validate("indicator");
  TestFunction h;
  h.arity = 2;
  h.eval = [A](std::span<const double> x) { return A.contains(x[0]) && A.contains(x[1]) ? 1.0 : 0.0; };
  h.l1 = h.l2sq = A.length() * A.length();
  h.linf = 1.0;
  h.linf1 = A.length();
  h.name = "indicator_pair";
  return h;
}

TestFunction indicator_children(Interval A, const TransitionKernel& kernel) {
  A.validate("indicator");
  TestFunction g;
  g.arity = 3;
  g.eval = [A](std::span<const double> x) {
    return 0.5 * ((A.contains(x[1]) ? 1.0 : 0.0) + (A.contains(x[2]) ? 1.0 : 0.0));
  };
  const Interval S = kernel.support();
  g.l1 = A.length() * S.length() * S.length();
  g.l2sq = 0.5 * A.length() * S.length() * S.length() + 0.5 * A.length() * A.length() * S.length();
  g.linf = 1.0;
  g.name = "indicator_children";
  if (!std::isfinite(S.length())) return g;
  if (!kernel.q_density(S.mid(), A.mid())) return g;

  // Pg(x) = Q(x, A) on a grid of S, integrated by the midpoint rule.
  constexpr int kGrid = 250;
  const double dx = S.length() / kGrid;
  double l1 = 0.0, sup = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double x = S.lo + (i + 0.5) * dx;
    const auto hi = kernel.q_cdf(x, A.hi), lo = kernel.q_cdf(x, A.lo);
    const double mass = hi && lo ? *hi - *lo
                                 : adaptive_simpson([&](double y) { return *kernel.q_density(x, y); },
                                                    A.lo, A.hi, 1e-8);
    l1 += std::abs(mass) * dx;
    sup = std::max(sup, std::abs(mass));
  }
  g.pg_l1 = l1;
  g.pg_linf = sup;
  g.pg2_l1 = l1;
  return g;
}

double sigma1n(const TestFunction& g, int n) { return min_enumeration(g.l2sq, g.l1, g.linf, n); }

double sigma2n(const TestFunction& g, int n) {
  if (!g.pg_l1 || !g.pg_linf || !g.pg2_l1) throw std::invalid_argument("supply kernel norms");
  return min_enumeration(*g.pg2_l1, *g.pg_l1, *g.pg_linf, n);
}

double sigma3n(const TestFunction& h, int n) {
  if (!h.linf1) throw std::invalid_argument("supply |h|_{inf,1}");
  return min_enumeration(h.l2sq, h.l1, *h.linf1, n);
}

std::string to_string(BoundVariant v) {
  switch (v) {
    case BoundVariant::thm1_gn: return "thm1_gn";
    case BoundVariant::thm1_tn: return "thm1_tn";
    case BoundVariant::thm2_gn: return "thm2_gn";
    case BoundVariant::thm2_tn: return "thm2_tn";
    case BoundVariant::pairs: return "pairs";
  }
  return "?";
}

double validity_bar(BoundVariant v, const TestFunction& g, int n, const ErgodicityParams& p) {
  p.validate();
  const double R = p.R;
  switch (v) {
    case BoundVariant::thm1_gn:
      return 4 * R * g.linf / static_cast<double>(generation_size(n));
    case BoundVariant::thm1_tn:
      return 4 * R / (1 - 2 * p.rho) * g.linf / static_cast<double>(tree_size(n));
    case BoundVariant::thm2_gn:
      return 4 * R * pg_linf(g) / static_cast<double>(generation_size(n));
    case BoundVariant::thm2_tn:
      if (n < 2) throw std::invalid_argument("the T_{n-1} triplet bound needs n >= 2");
      return 4 * (n * R * pg_linf(g) + g.linf) / static_cast<double>(tree_size(n - 1));
    case BoundVariant::pairs:
      return 4 * g.linf * (R * n + 1) / static_cast<double>(tree_size(n) - 1);
  }
  return 0.0;
}

double deviation_bound_unchecked(BoundVariant v, const TestFunction& g, int n, double delta,
                                 const ErgodicityParams& p) {
  const KappaSet k = kappas(p);
  switch (v) {
    case BoundVariant::thm1_gn:
      return exponential_bound(static_cast<double>(generation_size(n)), delta, k.k1 * sigma1n(g, n), k.k2 * g.linf);
    case BoundVariant::thm1_tn:
      return exponential_bound(static_cast<double>(tree_size(n)), delta, k.k3 * sigma1n(g, n), k.k4 * g.linf);
    case BoundVariant::thm2_gn:
      return exponential_bound(static_cast<double>(generation_size(n)), delta, k.k1 * sigma2n(g, n), k.k2 * g.linf);
    case BoundVariant::thm2_tn:
      if (n < 2) throw std::invalid_argument("the T_{n-1} triplet bound needs n >= 2");
      return exponential_bound(static_cast<double>(tree_size(n - 1)) / n, delta, k.k1 * sigma2n(g, n - 1),
                               k.k2 * g.linf);
    case BoundVariant::pairs:
      return exponential_bound(static_cast<double>(tree_size(n) - 1) / n, delta, k.k5 * sigma3n(g, n), k.k2 * g.linf);
  }
  return 1.0;
}

double deviation_bound(BoundVariant v, const TestFunction& g, int n, double delta, const ErgodicityParams& p) {
  const double bar = validity_bar(v, g, n, p);
  if (!(delta >= bar)) {
    throw BoundError("delta below validity threshold " + csv::format_double(bar) + " for " + to_string(v), bar);
  }
  return deviation_bound_unchecked(v, g, n, delta, p);
}

double bound_gn(const TestFunction& g, int n, double delta, const ErgodicityParams& p, Theorem which) {
  switch (which) {
    case Theorem::thm1: return deviation_bound(BoundVariant::thm1_gn, g, n, delta, p);
    case Theorem::thm2: return deviation_bound(BoundVariant::thm2_gn, g, n, delta, p);
    case Theorem::pairs: break;
  }
  throw std::invalid_argument("the pairs bound is a whole-tree bound");
}

double bound_tn(const TestFunction& g, int n, double delta, const ErgodicityParams& p, Theorem which) {
  switch (which) {
    case Theorem::thm1: return deviation_bound(BoundVariant::thm1_tn, g, n, delta, p);
    case Theorem::thm2: return deviation_bound(BoundVariant::thm2_tn, g, n, delta, p);
    case Theorem::pairs: return deviation_bound(BoundVariant::pairs, g, n, delta, p);
  }
  return 1.0;
}

double variant_statistic(BoundVariant v, const TestFunction& f, const TreeSample& tree, int n) {
  const bool triplets = v == BoundVariant::thm2_gn;
  if (tree.generations() < n + (triplets ? 1 : 0)) throw std::invalid_argument("tree too shallow for the statistic");
  double sum = 0.0;
  std::uint64_t first = 0, last = 0;
  switch (v) {
    case BoundVariant::thm1_gn:
    case BoundVariant::thm1_tn: {
      first = v == BoundVariant::thm1_gn ? generation_size(n) - 1 : 0;
      last = tree_size(n);
      for (std::uint64_t u = first; u < last; ++u) {
        const double x = tree[NodeId{u}];
        sum += f.eval(std::span<const double>(&x, 1));
      }
      break;
    }
    case BoundVariant::thm2_gn:
    case BoundVariant::thm2_tn: {
      first = v == BoundVariant::thm2_gn ? generation_size(n) - 1 : 0;
      last = v == BoundVariant::thm2_gn ? tree_size(n) : tree_size(n - 1);
      for (std::uint64_t u = first; u < last; ++u) {
        const auto [c0, c1] = children(NodeId{u});
        const double t[3] = {tree[NodeId{u}], tree[c0], tree[c1]};
        sum += f.eval(t);
      }
      break;
    }
    case BoundVariant::pairs: {
      first = 1;
      last = tree_size(n);
      for (std::uint64_t u = first; u < last; ++u) {
        const double t[2] = {tree[parent(NodeId{u})], tree[NodeId{u}]};
        sum += f.eval(t);
      }
      break;
    }
  }
  return sum / static_cast<double>(last - first);
}

ReferenceValue reference_value(BoundVariant v, const TestFunction& f, const TransitionKernel& kernel, double x0,
                               std::size_t steps, std::uint64_t seed) {
  if (steps < 100) throw std::invalid_argument("reference run needs at least 100 steps");
  constexpr std::size_t kBurnIn = 1000;
  constexpr std::size_t kBatches = 100;
  const std::uint64_t key = stream_key(seed, 0x5eedf00dULL);
  double y = x0;
  std::vector<double> batch(kBatches, 0.0);
  const std::size_t per_batch = steps / kBatches;
  const std::size_t total = per_batch * kBatches;
  for (std::size_t k = 0; k < kBurnIn + total; ++k) {
    Rng rng(key, k);
    const auto [c0, c1] = kernel.sample_pair(y, rng);
    const double next = rng.coin() ? c1 : c0;
    if (k >= kBurnIn) {
      double val = 0.0;
      switch (v) {
        case BoundVariant::thm1_gn:
        case BoundVariant::thm1_tn:
          val = f.eval(std::span<const double>(&y, 1));
          break;
        case BoundVariant::thm2_gn:
        case BoundVariant::thm2_tn: {
          const double t[3] = {y, c0, c1};
          val = f.eval(t);
          break;
        }
        case BoundVariant::pairs: {
          const double t[2] = {y, next};
          val = f.eval(t);
          break;
        }
      }
      batch[(k - kBurnIn) / per_batch] += val;
    }
    y = next;
  }
  double mean = 0.0;
  for (auto& b : batch) {
    b /= static_cast<double>(per_batch);
    mean += b;
  }
  mean /= kBatches;
  double var = 0.0;
  for (double b : batch) var += (b - mean) * (b - mean);
  var /= kBatches - 1;
  return {mean, 2.0 * std::sqrt(var / kBatches)};
}

bool VariantReport::all_dominated() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const DeviationRow& r) { return !r.valid || r.dominated; });
}

std::vector<double> default_delta_grid() {
  std::vector<double> grid(30);
  for (int i = 0; i < 30; ++i) grid[static_cast<std::size_t>(i)] = 0.01 * (i + 1);
  return grid;
}

double dominance_slack(double bound, std::size_t M) {
  return 2.0 * std::sqrt(bound * (1.0 - bound) / static_cast<double>(M)) + 0.02;
}

DeviationReport validate_bounds(const TransitionKernel& kernel, const RootLaw& root_law, const DeviationSetup& setup) {
  setup.params.validate();
  if (setup.replicates < 1) throw std::invalid_argument("validate_bounds needs at least one replicate");
  if (setup.n < 2) throw std::invalid_argument("validate_bounds needs n >= 2");
  const auto grid = setup.delta_grid.empty() ? default_delta_grid() : setup.delta_grid;

  const TestFunction g1 = indicator_1d(setup.indicator);
  const TestFunction g3 = indicator_children(setup.indicator, kernel);
  const TestFunction h2 = indicator_pair(setup.indicator);
  auto function_for = [&](BoundVariant v) -> const TestFunction& {
    switch (v) {
      case BoundVariant::thm2_gn:
      case BoundVariant::thm2_tn: return g3;
      case BoundVariant::pairs: return h2;
      default: return g1;
    }
  };

  // stats[r][v]
  std::vector<std::array<double, 5>> stats(setup.replicates);
  parallel_for(setup.replicates, setup.threads, [&](std::size_t r) {
    const auto tree = simulate_tree(kernel, root_law, setup.n + 1, setup.seed + r);
    for (std::size_t i = 0; i < 5; ++i) stats[r][i] = variant_statistic(kAllVariants[i], function_for(kAllVariants[i]), tree, setup.n);
  });

  DeviationReport report;
  report.n = setup.n;
  report.replicates = setup.replicates;
  report.params = setup.params;
  Rng x0_rng(setup.seed, 0xabcdefULL);
  const double x0 = root_law.sample(x0_rng);
  for (std::size_t i = 0; i < 5; ++i) {
    const BoundVariant v = kAllVariants[i];
    const TestFunction& f = function_for(v);
    VariantReport vr;
    vr.variant = v;
    vr.bar = validity_bar(v, f, setup.n, setup.params);
    vr.reference = reference_value(v, f, kernel, x0, setup.reference_steps, setup.seed);
    for (double delta : grid) {
      std::size_t hits = 0;
      for (const auto& s : stats)
        if (s[i] - vr.reference.value >= delta) ++hits;
      DeviationRow row;
      row.delta = delta;
      row.empirical = static_cast<double>(hits) / static_cast<double>(setup.replicates);
      row.bound = deviation_bound_unchecked(v, f, setup.n, delta, setup.params);
      row.valid = delta >= vr.bar;
      row.dominated = row.empirical <= row.bound + dominance_slack(row.bound, setup.replicates);
      vr.rows.push_back(row);
    }
    report.variants.push_back(std::move(vr));
  }
  return report;
}

void write_deviation_csv(std::ostream& out, const VariantReport& report) {
  out << "delta,empirical,bound,valid,dominated\n";
  for (const auto& r : report.rows) {
    out << csv::format_double(r.delta) << ',' << csv::format_double(r.empirical) << ','
        << csv::format_double(r.bound) << ',' << (r.valid ? 1 : 0) << ',' << (r.dominated ? 1 : 0) << '\n';
  }
}

ErgodicityInspection inspect_ergodicity(const TransitionKernel& kernel, Interval D, std::size_t grid, int max_power) {
  const Interval S = kernel.support();
  if (!std::isfinite(S.length())) throw std::invalid_argument("ergodicity inspection needs a bounded support");
  if (grid < 10 || max_power < 2) throw std::invalid_argument("ergodicity inspection grid too small");
  const double dy = S.length() / static_cast<double>(grid);
  std::vector<double> pts(grid);
  for (std::size_t i = 0; i < grid; ++i) pts[i] = S.lo + (static_cast<double>(i) + 0.5) * dy;

  std::vector<double> K(grid * grid);
  for (std::size_t i = 0; i < grid; ++i) {
    double row = 0.0;
    // Cell masses from the conditional CDF when the kernel has one, so that
    // narrow supports (parents near the upper edge) are not missed.
    double prev = kernel.q_cdf(pts[i], S.lo).value_or(0.0);
    for (std::size_t j = 0; j < grid; ++j) {
      if (const auto F = kernel.q_cdf(pts[i], S.lo + static_cast<double>(j + 1) * dy)) {
        K[i * grid + j] = *F - prev;
        prev = *F;
      } else {
        const auto q = kernel.q_density(pts[i], pts[j]);
        if (!q) throw std::invalid_argument("ergodicity inspection needs the kernel density");
        K[i * grid + j] = *q * dy;
      }
      row += K[i * grid + j];
    }
    if (!(row > 0.0)) throw std::runtime_error("kernel density vanishes on a grid row");
    for (std::size_t j = 0; j < grid; ++j) K[i * grid + j] /= row;
  }

  std::vector<double> pi(grid, 1.0 / static_cast<double>(grid)), next(grid);
  for (int it = 0; it < 5000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < grid; ++i)
      for (std::size_t j = 0; j < grid; ++j) next[j] += pi[i] * K[i * grid + j];
    double diff = 0.0;
    for (std::size_t j = 0; j < grid; ++j) diff += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (diff < 1e-14) break;
  }

  ErgodicityInspection out;
  std::vector<double> Km(grid * grid, 0.0), tmp(grid * grid);
  for (std::size_t i = 0; i < grid; ++i) Km[i * grid + i] = 1.0;
  for (int m = 0; m <= max_power; ++m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
      double l1 = 0.0;
      for (std::size_t j = 0; j < grid; ++j) l1 += std::abs(Km[i * grid + j] - pi[j]);
      worst = std::max(worst, l1);
    }
    out.tv_decay.push_back(worst);
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (std::size_t i = 0; i < grid; ++i)
      for (std::size_t k = 0; k < grid; ++k) {
        const double a = Km[i * grid + k];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < grid; ++j) tmp[i * grid + j] += a * K[k * grid + j];
      }
    Km.swap(tmp);
  }

  // Least-squares fit of log e(m) over m >= 1 (while above round-off), then
  // the smallest R with e(m) <= R rho^m at every inspected m.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int m = 1; m <= max_power; ++m) {
    const double e = out.tv_decay[static_cast<std::size_t>(m)];
    if (e < 1e-12) break;
    sx += m;
    sy += std::log(e);
    sxx += m * m;
    sxy += m * std::log(e);
    ++cnt;
  }
  double rho = 0.25;
  if (cnt >= 2) rho = std::exp((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx));
  rho = std::clamp(rho, 1e-3, 0.499);
  double R = 0.0;
  for (int m = 0; m <= max_power; ++m) R = std::max(R, out.tv_decay[static_cast<std::size_t>(m)] / std::pow(rho, m));

  double qd = 0.0;
  const std::size_t dgrid = 100;
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j <= dgrid; ++j) {
      const double y = D.lo + D.length() * static_cast<double>(j) / dgrid;
      if (!S.contains_open(y)) continue;
      qd = std::max(qd, *kernel.q_density(pts[i], y));
    }
  out.params = {R, rho, qd};
  return out;
}

}  // namespace bmc
