#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <bmc/config.hpp>
#include <bmc/deviation.hpp>
#include <bmc/experiment.hpp>
#include <bmc/simulate.hpp>

using namespace bmc;

namespace {

TestFunction norms_only(double l1, double l2sq, double linf) {
  TestFunction g;
  g.l1 = l1;
  g.l2sq = l2sq;
  g.linf = linf;
  g.eval = [](std::span<const double>) { return 0.0; };
  return g;
}

double brute_sigma(double base, double a, double b, int n) {
  if (n == 1) return base;
  double best = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= n - 1; ++l) best = std::min(best, a * a * std::pow(2.0, l) + b * b / std::pow(2.0, l));
  return base + best;
}

}  // namespace

TEST_CASE("kappa constants") {
  const auto k = kappas({1.0, 0.25, 1.0});
  CHECK(k.k1 == doctest::Approx(200.0));
  CHECK(k.k2 == doctest::Approx(20.0 / 3.0));
  CHECK(k.k3 == doctest::Approx(2400.0));
  CHECK(k.k4 == doctest::Approx(40.0 / 3.0));
  CHECK(k.k5 == doctest::Approx(200.0));

  Rng rng(31, 0);
  for (int i = 0; i < 50; ++i) {
    const double R = 0.1 + 10 * rng.uniform(), r = 0.001 + 0.498 * rng.uniform(), q = 5 * rng.uniform();
    const auto got = kappas({R, r, q});
    const double c = 4 * R * R * (1 + r) * (1 + r);
    CHECK(got.k1 == doctest::Approx(32 * std::max({q, 4 * q * q, c})));
    CHECK(got.k2 == doctest::Approx(16.0 / 3 * std::max(1 + R * r, R * (1 + r))));
    CHECK(got.k3 == doctest::Approx(96 * std::max({q, 16 * q * q, c / ((1 - 2 * r) * (1 - 2 * r))})));
    CHECK(got.k4 == doctest::Approx(16.0 / 3 * std::max(1 + R * r, R * (1 + r) / (1 - 2 * r))));
    CHECK(got.k5 == doctest::Approx(std::max(q, q * q) * got.k1));
  }
  CHECK_THROWS_WITH(kappas({1.0, 0.6, 1.0}), "rho must lie in (0, 0.5)");
  CHECK_THROWS(kappas({-1.0, 0.25, 1.0}));
  CHECK_THROWS(kappas({1.0, 0.25, -0.1}));
}

TEST_CASE("variance proxies") {
  const auto g = indicator_1d({0.0, 0.125});
  CHECK(sigma1n(g, 1) == doctest::Approx(0.125));
  CHECK(sigma1n(g, 10) == doctest::Approx(3.0 / 8.0));
  for (int n = 1; n <= 20; ++n) {
    CHECK(sigma1n(g, n) == doctest::Approx(brute_sigma(0.125, 0.125, 1.0, n)));
    // The minimum only exists from n = 2 on; from there it runs over growing sets.
    if (n >= 2) CHECK(sigma1n(g, n + 1) <= sigma1n(g, n));
  }
  for (double t : {0.5, 2.0, 7.0}) {
    const auto s = norms_only(t * g.l1, t * t * g.l2sq, t * g.linf);
    CHECK(sigma1n(s, 10) == doctest::Approx(t * t * sigma1n(g, 10)));
  }

  CHECK_THROWS_WITH(sigma2n(g, 5), "supply kernel norms");
  auto g3 = norms_only(0.5, 0.5, 1.0);
  g3.pg_l1 = 0.3;
  g3.pg_linf = 0.8;
  g3.pg2_l1 = 0.2;
  CHECK(sigma2n(g3, 1) == doctest::Approx(0.2));
  CHECK(sigma2n(g3, 9) == doctest::Approx(brute_sigma(0.2, 0.3, 0.8, 9)));

  const double a = 0.3;
  const auto h = indicator_pair({0.0, a});
  CHECK(h.l1 == doctest::Approx(a * a));
  CHECK(*h.linf1 == doctest::Approx(a));
  for (int n = 1; n <= 12; ++n) CHECK(sigma3n(h, n) == doctest::Approx(brute_sigma(a * a, a * a, a, n)));
  CHECK_THROWS(sigma3n(g, 4));
}

TEST_CASE("bounds: validity bar, clipping, monotonicity and asymptote") {
  const ErgodicityParams p{1.0, 0.25, 1.0};
  const auto g = indicator_1d({0.0, 0.125});
  CHECK(validity_bar(BoundVariant::thm1_gn, g, 10, p) == doctest::Approx(4.0 / 1024));
  CHECK(validity_bar(BoundVariant::thm1_tn, g, 10, p) == doctest::Approx(4.0 * 2.0 / 2047));
  try {
    bound_gn(g, 10, 1e-3, p, Theorem::thm1);
    FAIL("expected a validity error");
  } catch (const BoundError& e) {
    CHECK(std::string(e.what()).find("delta below validity threshold") != std::string::npos);
    CHECK(e.bar() == doctest::Approx(4.0 / 1024));
  }
  CHECK_THROWS_AS(bound_gn(g, 10, 0.1, p, Theorem::pairs), std::invalid_argument);

  for (auto v : kAllVariants) {
    TestFunction f = v == BoundVariant::pairs ? indicator_pair({0.0, 0.5}) : g;
    f.pg_l1 = 0.1;
    f.pg_linf = 0.5;
    f.pg2_l1 = 0.1;
    const double bar = validity_bar(v, f, 10, p);
    double prev = 2.0;
    for (int i = 0; i < 100; ++i) {
      const double delta = bar + i * 0.05;
      const double b = deviation_bound(v, f, 10, delta, p);
      CHECK(b <= 1.0);
      CHECK(b >= 0.0);
      CHECK(b <= prev);
      prev = b;
    }
  }

  // Large delta: the exponent approaches |G_n| delta / (k2 |g|_inf).
  const int n = 1;
  const double delta = 1e3;
  const double k2 = kappas(p).k2;
  const double got = std::log(bound_gn(g, n, delta, p, Theorem::thm1));
  const double asymptote = -2.0 * delta / (k2 * g.linf);
  CHECK(std::abs(got / asymptote - 1.0) < 0.01);
}

TEST_CASE("whole-tree triplet bound scales like |T_{n-1}| / n") {
  const ErgodicityParams p{1.0, 0.25, 1.0};
  auto g = norms_only(0.5, 0.5, 1.0);
  g.pg_l1 = 0.35;
  g.pg_linf = 1.0;
  g.pg2_l1 = 0.35;
  const double delta = 0.5;
  const double e12 = -std::log(bound_tn(g, 12, delta, p, Theorem::thm2));
  const double e15 = -std::log(bound_tn(g, 15, delta, p, Theorem::thm2));
  // n^-1 |T_{n-1}|: |T_11| = 4095 and |T_14| = 32767.
  CHECK(std::abs(e12 / e15 - (4095.0 / 12) / (32767.0 / 15)) < 1e-12);
}

TEST_CASE("bounds degrade to 1 as rho approaches 1/2") {
  const auto g = indicator_1d({0.0, 0.125});
  double prev = 0.0;
  for (double rho : {0.25, 0.4, 0.49, 0.499}) {
    const double b = deviation_bound_unchecked(BoundVariant::thm1_tn, g, 10, 0.2, {1.0, rho, 1.0});
    CHECK(b >= prev);
    prev = b;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("variant statistics on a hand-built tree") {
  // n = 2 plus one extra generation for the triplets.
  std::vector<double> t(tree_size(3));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i % 4) * 0.5;  // 0, .5, 1, 1.5, ...
  const TreeSample tree(3, t);
  const auto g = indicator_1d({0.4, 1.1});
  // G_2 = nodes 3..6 with traits 1.5, 0, .5, 1 -> 2 of 4 inside.
  CHECK(variant_statistic(BoundVariant::thm1_gn, g, tree, 2) == doctest::Approx(0.5));
  // T_2 = nodes 0..6: 0, .5, 1, 1.5, 0, .5, 1 -> 4 of 7.
  CHECK(variant_statistic(BoundVariant::thm1_tn, g, tree, 2) == doctest::Approx(4.0 / 7.0));
  const auto h = indicator_pair({0.4, 1.1});
  // Pairs (parent, child) over T_2 minus the root.
  double expect = 0.0;
  for (std::uint64_t u = 1; u < 7; ++u) expect += (t[(u - 1) / 2] >= 0.4 && t[(u - 1) / 2] <= 1.1 && t[u] >= 0.4 && t[u] <= 1.1);
  CHECK(variant_statistic(BoundVariant::pairs, h, tree, 2) == doctest::Approx(expect / 6.0));
}

TEST_CASE("reference value of a chain with known invariant law") {
  ModelConfig mc;
  mc.kind = "bar";
  mc.bar_f0 = mc.bar_f1 = "zero";
  const auto k = make_kernel(mc);
  const auto g = indicator_1d({0.0, 1.0});
  const auto ref = reference_value(BoundVariant::thm1_gn, g, *k, 0.0, 200000, 3);
  const double exact = 0.5 * std::erf(1.0 / std::sqrt(2.0));
  CHECK(std::abs(ref.value - exact) < std::max(2.0 * ref.mc_halfwidth, 0.005));
  CHECK(ref.mc_halfwidth > 0.0);
  CHECK(ref.mc_halfwidth < 0.01);
}

TEST_CASE("kernel norms of the children indicator") {
  const GrowthFragModel m(2.0, TrialRate::baseline().splitting_rate());
  const Interval A{1.5, 2.0};
  const auto g = indicator_children(A, m);
  const auto F = [](double x, double y) {
    if (y <= x / 2) return 0.0;
    return 1.0 - std::sqrt((5.0 - 2.0 * y) / (5.0 - x));
  };
  double l1 = 0.0, sup = 0.0;
  const int G = 20000;
  for (int i = 0; i < G; ++i) {
    const double x = (i + 0.5) * 5.0 / G;
    const double mass = F(x, 2.0) - F(x, 1.5);
    l1 += mass * 5.0 / G;
    sup = std::max(sup, mass);
  }
  REQUIRE(g.pg_l1.has_value());
  CHECK(*g.pg_l1 == doctest::Approx(l1).epsilon(2e-3));
  CHECK(*g.pg_linf == doctest::Approx(sup).epsilon(2e-3));
  CHECK(*g.pg2_l1 == *g.pg_l1);
  const double tri[3] = {0.0, 1.7, 2.2};
  CHECK(g.eval(tri) == 0.5);
}

TEST_CASE("centred statistic decays like |T_n|^(-1/2)") {
  ModelConfig mc;
  mc.kind = "bar";
  const auto k = make_kernel(mc);  // f = x / 2, unit Gaussian noise: nu is centred Gaussian
  TestFunction g;
  g.eval = [](std::span<const double> x) {
    return (x[0] >= 0.0 && x[0] <= 1.0 ? 1.0 : 0.0) - (x[0] >= -1.0 && x[0] < 0.0 ? 1.0 : 0.0);
  };
  std::vector<double> sizes, errs;
  for (int n : {8, 10, 12}) {
    double mean_abs = 0.0;
    const int M = 200;
    for (int r = 0; r < M; ++r) {
      const auto tree = simulate_tree(*k, RootLaw::point(0.0), n + 1, 1000 + r);
      mean_abs += std::abs(variant_statistic(BoundVariant::thm1_tn, g, tree, n));
    }
    sizes.push_back(static_cast<double>(tree_size(n)));
    errs.push_back(mean_abs / M);
  }
  const double slope = loglog_slope(sizes, errs);
  CHECK(slope > -0.65);
  CHECK(slope < -0.35);
}

TEST_CASE("small Monte Carlo validation run") {
  const GrowthFragModel m(2.0, TrialRate::large_spike().splitting_rate());
  DeviationSetup s;
  s.n = 6;
  s.replicates = 100;
  s.params = default_gf_ergodicity();
  s.reference_steps = 20000;
  s.threads = 2;
  const auto report = validate_bounds(m, RootLaw::uniform(1.25, 2.25), s);
  REQUIRE(report.variants.size() == 5);
  for (const auto& v : report.variants) {
    CHECK(v.rows.size() == 30);
    for (const auto& r : v.rows) {
      CHECK(r.valid == (r.delta >= v.bar));
      CHECK(r.empirical >= 0.0);
      CHECK(r.empirical <= 1.0);
      CHECK(r.dominated == (r.empirical <= r.bound + dominance_slack(r.bound, 100)));
    }
    CHECK(v.all_dominated());
  }
  s.threads = 1;
  const auto again = validate_bounds(m, RootLaw::uniform(1.25, 2.25), s);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 30; ++j) CHECK(again.variants[i].rows[j].empirical == report.variants[i].rows[j].empirical);
  CHECK(dominance_slack(0.25, 100) == doctest::Approx(2 * std::sqrt(0.25 * 0.75 / 100) + 0.02));
}

TEST_CASE("ergodicity inspection") {
  for (const auto& r : {TrialRate::baseline(), TrialRate::large_spike(), TrialRate::high_spike()}) {
    const GrowthFragModel m(2.0, r.splitting_rate());
    const auto insp = inspect_ergodicity(m, {1.5, 2.0}, 200, 10);
    CHECK(insp.params.rho > 0.0);
    CHECK(insp.params.rho < 0.5);
    CHECK(insp.tv_decay.front() <= 2.0 + 1e-12);
    CHECK(insp.tv_decay.back() < insp.tv_decay[1]);
    for (std::size_t mm = 0; mm < insp.tv_decay.size(); ++mm)
      CHECK(insp.tv_decay[mm] <= insp.params.R * std::pow(insp.params.rho, static_cast<double>(mm)) * (1 + 1e-12));
    // The shipped triple dominates the inspected one.
    const auto shipped = default_gf_ergodicity();
    CHECK(shipped.qd >= insp.params.qd);
    CHECK(shipped.rho >= insp.params.rho);
  }
}
